import numpy as np
import pytest

from rklt.pgm import PGMError, encode_pgm, load_image, parse_pgm, read_pgm, write_pgm


def test_round_trip(tmp_path, rng):
    img = rng.integers(0, 256, size=(7, 11)).astype(np.uint8)
    write_pgm(tmp_path / "a.pgm", img)
    np.testing.assert_array_equal(read_pgm(tmp_path / "a.pgm"), img)
    np.testing.assert_array_equal(load_image(tmp_path / "a.pgm"), img)


def test_header_comments():
    data = b"P5\n# made by hand\n2 1 # width height\n255\n\x01\xff"
    np.testing.assert_array_equal(parse_pgm(data), [[1, 255]])


def test_ascii_variant():
    np.testing.assert_array_equal(parse_pgm(b"P2 2 2 255\n0 10\n20 255\n"), [[0, 10], [20, 255]])


def test_maxval_is_rescaled():
    np.testing.assert_array_equal(parse_pgm(b"P2 3 1 15 0 15 7"), [[0, 255, 119]])


@pytest.mark.parametrize("data", [
    b"P6\n1 1\n255\n\x00\x00\x00",
    b"P5\n2 2\n255\n\x00",
    b"P5\n2 2\n65535\n" + b"\x00" * 8,
    b"P5\n2",
    b"P2 2 2 255 1 2 3",
    b"P5 0 2 255 ",
])
def test_malformed(data):
    with pytest.raises(PGMError):
        parse_pgm(data)


def test_encode_rejects_color():
    with pytest.raises(PGMError):
        encode_pgm(np.zeros((2, 2, 3)))


def test_pillow_formats(tmp_path, rng):
    pil = pytest.importorskip("PIL.Image")
    img = rng.integers(0, 256, size=(9, 5)).astype(np.uint8)
    pil.fromarray(img).save(tmp_path / "a.png")
    np.testing.assert_array_equal(load_image(tmp_path / "a.png"), img)
