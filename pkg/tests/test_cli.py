import csv
import io
import subprocess
import sys

import numpy as np
import pytest

import rklt.fast as fast
from rklt.cli import main, parse_r
from rklt.codec import ar1_texture
from rklt.pgm import read_pgm, write_pgm


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_r():
    assert parse_r("1..4,8") == [1, 2, 3, 4, 8]
    assert parse_r("15") == [15]


def test_derive_coarse(capsys):
    code, out, _ = run(["derive", "--rho-step", "0.1"], capsys)
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert rows[0][0] == "rho_first_seen" and len(rows[0]) == 65
    assert [r[0] for r in rows[1:]] == ["0.1", "0.4", "0.7", "0.8"]


def test_derive_n4(capsys):
    code, out, _ = run(["derive", "--n", "4", "--format", "jsonl"], capsys)
    assert code == 0
    assert out.count("\n") == 1
    assert '"entries": [1, 1, 1, 1, 1, 1, -1, -1, 1, -1, -1, 1, 1, -1, 1, -1]' in out


def test_derive_text_and_builtin(capsys):
    code, out, _ = run(["derive", "--rho-step", "0.5", "--format", "text"], capsys)
    assert code == 0 and out.startswith("# matrix 1, first seen at rho=0.5")
    code, out, _ = run(["derive", "--builtin"], capsys)
    assert code == 0 and out.splitlines()[1].startswith("T1,")


@pytest.mark.parametrize("alpha,needle", [("0", "degenerate"), ("3.2", "rho=0.103"), ("-1", "alpha")])
def test_derive_bad_alpha(alpha, needle, capsys):
    code, _, err = run(["derive", "--alpha", alpha], capsys)
    assert code == 2 and needle in err


def test_metrics_default_table(capsys):
    code, out, _ = run(["metrics"], capsys)
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "transform,rho,Cg,eta,eps,mse"
    assert lines[2] == "T1,0.3,0.2829,80.7088,1.6751,0.0659"
    assert len(lines) == 9


def test_metrics_selected(capsys, tmp_path):
    code, out, _ = run(["metrics", "--transform", "K,T4", "--rho", "0.7,0.8",
                        "--dump-matrices", str(tmp_path)], capsys)
    assert code == 0
    rows = {(r[0], r[1]): r for r in csv.reader(io.StringIO(out))}
    assert rows["K0.7", "0.7"][2] == "2.5588"
    assert rows["T4", "0.8"][2] == "3.4058"
    dumped = np.loadtxt(tmp_path / "T4.csv", delimiter=",")
    assert dumped.shape == (8, 8)


def test_metrics_errors(capsys):
    assert run(["metrics", "--transform", "T9", "--rho", "0.5"], capsys)[0] == 2
    assert run(["metrics", "--transform", "T1"], capsys)[0] == 2
    assert run(["metrics", "--rho", "1.5"], capsys)[0] == 2


def test_fastcheck(capsys, tmp_path):
    code, out, _ = run(["fastcheck", "--dump-factors", str(tmp_path)], capsys)
    assert code == 0
    assert "T1 OK (24 adds, 57.14% fewer than 56; 1000 random trials, max abs error 0)" in out
    assert "T4 OK (22 adds, 60.71% fewer" in out
    assert (tmp_path / "T4_0_butterfly_A1.csv").exists()


def test_fastcheck_detects_corruption(capsys, monkeypatch):
    bad = [row[:] for row in fast._B21]
    bad[0][0] = -1
    monkeypatch.setattr(fast, "_B21", bad)
    code, out, _ = run(["fastcheck"], capsys)
    assert code == 1 and "T1 FAIL" in out


@pytest.fixture
def image_file(tmp_path):
    path = tmp_path / "tex.pgm"
    write_pgm(path, ar1_texture((40, 48), 0.8, seed=1))
    return path


def test_compress(capsys, image_file, tmp_path):
    out_img = tmp_path / "out.pgm"
    code, out, _ = run(["compress", "--input", str(image_file), "--transform", "DCT",
                        "--r", "64", "--output", str(out_img)], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["transform"] == "DCT" and float(rows[0]["mse"]) <= 0.5
    assert read_pgm(out_img).shape == (40, 48)


def test_compress_many_outputs(capsys, image_file, tmp_path):
    report = tmp_path / "rep.csv"
    code, _, _ = run(["compress", "--input", str(image_file), "--transform", "T2,K0.4",
                      "--r", "3,15", "--report", str(report), "--output", str(tmp_path / "o.pgm")], capsys)
    assert code == 0
    assert len(report.read_text().splitlines()) == 5
    assert (tmp_path / "o_K0.4_r15.pgm").exists()


@pytest.mark.parametrize("r", ["0", "65", "x"])
def test_compress_bad_r(r, capsys, image_file):
    try:
        code = main(["compress", "--input", str(image_file), "--transform", "DCT", "--r", r])
    except SystemExit as exc:
        code = exc.code
    assert code == 2


def test_compress_unreadable(capsys, tmp_path):
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"not an image")
    assert run(["compress", "--input", str(bad), "--transform", "DCT", "--r", "5"], capsys)[0] == 2
    assert run(["compress", "--input", str(tmp_path / "none.pgm"), "--transform", "DCT", "--r", "5"],
               capsys)[0] == 2


def test_sweep(capsys, tmp_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for s in range(2):
        write_pgm(corpus / f"{s}.pgm", ar1_texture((16, 16), 0.8, seed=s))
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert run(["sweep", "--corpus", str(corpus), "--output", str(out1)], capsys)[0] == 0
    assert run(["sweep", "--corpus", str(corpus), "--output", str(out2), "--threads", "3"], capsys)[0] == 0
    lines = out1.read_text().splitlines()
    assert len(lines) == 1 + 8 * 45
    assert lines[1].startswith("T1,1,")
    assert out1.read_bytes() == out2.read_bytes()


def test_sweep_missing_corpus(capsys, tmp_path):
    assert run(["sweep", "--corpus", str(tmp_path / "nope")], capsys)[0] == 2
    assert run(["sweep", "--corpus", str(tmp_path)], capsys)[0] == 2


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "rklt.cli", "fastcheck", "--trials", "10"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "T4 OK" in res.stdout
