"""Command-line front end.

Exit codes: 0 success, 2 usage or domain error, 1 internal invariant violation.
"""
import argparse
import csv
import io
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import approximations, codec, fast, metrics, registry
from .errors import AlphaOutOfRange, DegenerateTransform, RetainOutOfRange
from .markov import MarkovModel, klt_matrix
from .pgm import PGMError, load_image, write_pgm

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2

IMAGE_SUFFIXES = {".pgm", ".pnm", ".png", ".tif", ".tiff", ".bmp"}


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    n: int = 8
    alpha: float = 2.0
    rho: list = field(default_factory=list)
    rho_step: float = 0.001
    transform_id: list = field(default_factory=list)
    r: list = field(default_factory=list)
    input_path: str = None
    output_path: str = None
    corpus_dir: str = None
    mssim_window: str = "gaussian"

    _REQUIRED = {
        "derive": ("n", "alpha", "rho_step"),
        "metrics": (),
        "fastcheck": (),
        "compress": ("input_path", "transform_id", "r"),
        "sweep": ("corpus_dir", "transform_id", "r"),
    }

    def validate(self):
        if self.command not in self._REQUIRED:
            raise UsageError(f"unknown command {self.command!r}")
        missing = [f for f in self._REQUIRED[self.command] if getattr(self, f) in (None, [], "")]
        if missing:
            raise UsageError(f"{self.command}: missing {', '.join(missing)}")
        for r in self.r:
            codec.retain_mask(r)
        return self


def parse_r(text):
    """'15', '1..45', '1,5,10' or combinations like '1..4,8'."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    if not out:
        raise UsageError(f"no r values in {text!r}")
    return out


def parse_floats(text):
    return [float(s) for s in text.split(",") if s.strip()]


def _emit(text, path):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def matrix_to_csv(m):
    """Row-major CSV; floats written with repr so they round-trip exactly."""
    m = np.asarray(m)
    fmt = int if np.issubdtype(m.dtype, np.integer) else float
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in m:
        w.writerow([repr(fmt(v)) for v in row])
    return buf.getvalue()


def cmd_derive(cfg, fmt="csv", builtin=False):
    if builtin:
        text = approximations.catalog_to_jsonl() if fmt == "jsonl" else approximations.catalog_to_csv()
        _emit(text, cfg.output_path)
        return EXIT_OK
    found = approximations.derive_catalog(cfg.n, cfg.alpha, cfg.rho_step)
    n = cfg.n
    if fmt == "text":
        lines = []
        for k, (rho, core) in enumerate(found):
            lines.append(f"# matrix {k + 1}, first seen at rho={rho:g}")
            lines.extend(" ".join(f"{v:2d}" for v in row) for row in core.entries)
        _emit("\n".join(lines) + "\n", cfg.output_path)
        return EXIT_OK
    if fmt == "jsonl":
        import json
        text = "".join(json.dumps({"rho_first_seen": rho, "n": n,
                                   "entries": core.entries.ravel().tolist()}) + "\n"
                       for rho, core in found)
        _emit(text, cfg.output_path)
        return EXIT_OK
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rho_first_seen"] + [f"t{i}_{j}" for i in range(n) for j in range(n)])
    for rho, core in found:
        w.writerow([f"{rho:g}"] + core.entries.ravel().tolist())
    _emit(buf.getvalue(), cfg.output_path)
    return EXIT_OK


def _metrics_rows(cfg, synthesis):
    if not cfg.rho and not cfg.transform_id:
        return metrics.table2(cfg.n, synthesis)
    if not cfg.rho:
        raise UsageError("--rho is required when --transform is given")
    names = cfg.transform_id or ["K"]
    rows = []
    for rho in cfg.rho:
        model = MarkovModel(cfg.n, rho)
        for name in names:
            if name == "K":
                label, t = f"K{rho:g}", klt_matrix(model)
            else:
                label, (t, _) = name, registry.resolve(name, cfg.n)
            rows.append(metrics.evaluate(label, t, model, synthesis))
    return rows


def cmd_metrics(cfg, synthesis="transpose", dump_dir=None):
    rows = _metrics_rows(cfg, synthesis)
    _emit(metrics.records_to_csv(rows), cfg.output_path)
    if dump_dir:
        d = Path(dump_dir)
        d.mkdir(parents=True, exist_ok=True)
        for rec in rows:
            name = rec.transform_id
            t = klt_matrix(MarkovModel(cfg.n, rec.rho)) if name.startswith("K") else registry.resolve(name, cfg.n)[0]
            (d / f"{name}.csv").write_text(matrix_to_csv(metrics.as_matrix(t)))
    return EXIT_OK


def cmd_fastcheck(trials=1000, seed=0, dump_dir=None, out=None):
    out = out or sys.stdout
    rng = np.random.default_rng(seed)
    ok = True
    for ident in ("T1", "T2", "T3", "T4"):
        f = fast.factorization(ident)
        problems = fast.verify(f)
        core = approximations.catalog_entry(ident).transform.core.entries
        x = rng.integers(-1000, 1001, size=(8, trials))
        err = int(np.abs(fast.apply_forward(f, x) - core @ x).max())
        if err:
            problems.append(f"{ident}: fast path differs from dense product by {err}")
        if problems:
            ok = False
            for p in problems:
                print(f"{ident} FAIL {p}", file=out)
        else:
            print(f"{ident} OK ({f.counted_additions()} adds, "
                  f"{fast.reduction_pct(f.counted_additions()):.2f}% fewer than {fast.DIRECT_ADDITIONS}; "
                  f"{trials} random trials, max abs error {err})", file=out)
        if dump_dir:
            d = Path(dump_dir)
            d.mkdir(parents=True, exist_ok=True)
            for k, factor in enumerate(f.factors):
                (d / f"{ident}_{k}_{factor.kind}.csv").write_text(matrix_to_csv(factor.matrix))
    print(f"exact KLT direct: {fast.DIRECT_ADDITIONS} additions, {fast.DIRECT_MULTIPLICATIONS} multiplications",
          file=out)
    return EXIT_OK if ok else EXIT_INTERNAL


def cmd_compress(cfg, pairing="transpose", report_path=None):
    try:
        img = load_image(cfg.input_path)
    except (OSError, PGMError) as exc:
        raise UsageError(f"cannot read {cfg.input_path}: {exc}") from exc
    reports = []
    for name in cfg.transform_id:
        t, f = registry.resolve(name)
        for r in cfg.r:
            out, rep = codec.compress_image(img, t, r, name, pairing, cfg.mssim_window, f,
                                            image_name=Path(cfg.input_path).name)
            reports.append(rep)
            if cfg.output_path:
                target = Path(cfg.output_path)
                if len(cfg.transform_id) * len(cfg.r) > 1:
                    target = target.with_name(f"{target.stem}_{name}_r{r}{target.suffix or '.pgm'}")
                write_pgm(target, out)
    _emit(codec.reports_to_csv(reports), report_path)
    return EXIT_OK


def load_corpus(directory):
    d = Path(directory)
    if not d.is_dir():
        raise UsageError(f"corpus directory {directory} does not exist")
    files = sorted(p for p in d.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not files:
        raise UsageError(f"no images found in {directory}")
    try:
        return [load_image(p) for p in files]
    except (OSError, PGMError) as exc:
        raise UsageError(str(exc)) from exc


def cmd_sweep(cfg, pairing="transpose", threads=None):
    corpus = load_corpus(cfg.corpus_dir)
    transforms = [(name, registry.resolve(name)[0]) for name in cfg.transform_id]
    rows = codec.rate_quality_sweep(corpus, transforms, cfg.r, pairing, cfg.mssim_window, threads)
    _emit(codec.reports_to_csv(rows, sweep=True), cfg.output_path)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="rklt", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("derive", help="sweep rho and list the distinct rounded KLT matrices")
    d.add_argument("--n", type=int, default=8)
    d.add_argument("--alpha", type=float, default=2.0)
    d.add_argument("--rho-step", type=float, default=0.001)
    d.add_argument("--format", choices=("csv", "jsonl", "text"), default="csv")
    d.add_argument("--builtin", action="store_true", help="export the built-in T1..T4 catalog instead")
    d.add_argument("--output")

    m = sub.add_parser("metrics", help="coding gain, efficiency, error energy and MSE")
    m.add_argument("--rho", type=parse_floats, default=[])
    m.add_argument("--transform", type=registry.split_names, default=[],
                   help="comma list of T1..T4, K, K<rho>, DCT")
    m.add_argument("--n", type=int, default=8)
    m.add_argument("--cg-synthesis", choices=("transpose", "inverse"), default="transpose")
    m.add_argument("--dump-matrices", metavar="DIR")
    m.add_argument("--output")

    f = sub.add_parser("fastcheck", help="verify factorizations and addition counts")
    f.add_argument("--trials", type=int, default=1000)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--dump-factors", metavar="DIR")

    for name, helptext in (("compress", "compress one image"), ("sweep", "average quality over a corpus")):
        c = sub.add_parser(name, help=helptext)
        if name == "compress":
            c.add_argument("--input", required=True)
            c.add_argument("--transform", type=registry.split_names, required=True)
            c.add_argument("--r", type=parse_r, required=True)
            c.add_argument("--report", help="CSV report path (default stdout)")
        else:
            c.add_argument("--corpus", required=True)
            c.add_argument("--transforms", type=registry.split_names,
                           default=registry.split_names("T1,T2,T3,T4,K0.3,K0.4,K0.7,K0.8"))
            c.add_argument("--r", type=parse_r, default=list(range(1, 46)))
            c.add_argument("--threads", type=int)
        c.add_argument("--output")
        c.add_argument("--mssim-window", choices=("gaussian", "uniform"), default="gaussian")
        c.add_argument("--pairing", choices=("transpose", "inverse"), default="transpose",
                       help="right-hand factor of the 2D transform: T^T or T^-1")
    return p


def _config(args):
    cmd = args.command
    cfg = RunConfig(cmd, output_path=getattr(args, "output", None))
    if cmd == "derive":
        cfg.n, cfg.alpha, cfg.rho_step = args.n, args.alpha, args.rho_step
    elif cmd == "metrics":
        cfg.n, cfg.rho, cfg.transform_id = args.n, args.rho, args.transform
    elif cmd == "compress":
        cfg.input_path, cfg.transform_id, cfg.r = args.input, args.transform, args.r
        cfg.mssim_window = args.mssim_window
    elif cmd == "sweep":
        cfg.corpus_dir, cfg.transform_id, cfg.r = args.corpus, args.transforms, args.r
        cfg.mssim_window = args.mssim_window
    return cfg.validate()


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        if cfg.command == "derive":
            return cmd_derive(cfg, args.format, args.builtin)
        if cfg.command == "metrics":
            return cmd_metrics(cfg, args.cg_synthesis, args.dump_matrices)
        if cfg.command == "fastcheck":
            return cmd_fastcheck(args.trials, args.seed, args.dump_factors)
        if cfg.command == "compress":
            return cmd_compress(cfg, args.pairing, args.report)
        return cmd_sweep(cfg, args.pairing, args.threads)
    except AlphaOutOfRange as exc:
        print(f"rklt: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DegenerateTransform as exc:
        print(f"rklt: rounding produced a degenerate matrix ({exc}); increase alpha", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, RetainOutOfRange, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"rklt: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
