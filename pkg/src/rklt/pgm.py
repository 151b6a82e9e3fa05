"""Minimal 8-bit PGM (P5, and P2 on read) support."""
from pathlib import Path

import numpy as np


class PGMError(ValueError):
    pass


def _tokens(data):
    """Yield (token, offset_after_token) from a PNM header, skipping comments."""
    i = 0
    n = len(data)
    while i < n:
        c = data[i:i + 1]
        if c == b"#":
            while i < n and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
        elif c.isspace():
            i += 1
        else:
            start = i
            while i < n and not data[i:i + 1].isspace() and data[i:i + 1] != b"#":
                i += 1
            yield data[start:i], i


def parse_pgm(data):
    tokens = _tokens(data)
    try:
        magic, _ = next(tokens)
        width, _ = next(tokens)
        height, _ = next(tokens)
        maxval, end = next(tokens)
        width, height, maxval = int(width), int(height), int(maxval)
    except (StopIteration, ValueError) as exc:
        raise PGMError("truncated or malformed PGM header") from exc
    if magic not in (b"P5", b"P2"):
        raise PGMError(f"unsupported magic {magic!r}; expected P5 or P2")
    if not 0 < maxval <= 255:
        raise PGMError(f"only 8-bit PGM is supported (maxval={maxval})")
    if width <= 0 or height <= 0:
        raise PGMError(f"bad dimensions {width}x{height}")

    if magic == b"P5":
        raster = data[end + 1:end + 1 + width * height]
        if len(raster) != width * height:
            raise PGMError(f"expected {width * height} pixel bytes, got {len(raster)}")
        pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    else:
        values = [int(t) for t, _ in tokens]
        if len(values) < width * height:
            raise PGMError("not enough pixel values")
        pixels = np.array(values[:width * height], dtype=np.int64).reshape(height, width)
    if maxval != 255:
        pixels = np.floor(pixels * (255.0 / maxval) + 0.5)
    return np.ascontiguousarray(pixels, dtype=np.uint8)


def read_pgm(path):
    return parse_pgm(Path(path).read_bytes())


def encode_pgm(img):
    img = np.asarray(img)
    if img.ndim != 2:
        raise PGMError("PGM images are single channel")
    h, w = img.shape
    return b"P5\n%d %d\n255\n" % (w, h) + np.clip(img, 0, 255).astype(np.uint8).tobytes()


def write_pgm(path, img):
    Path(path).write_bytes(encode_pgm(img))


def load_image(path):
    """Read a grayscale image; PGM natively, other formats through Pillow."""
    path = Path(path)
    if path.suffix.lower() in (".pgm", ".pnm"):
        return read_pgm(path)
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover
        raise PGMError(f"{path.name}: only PGM is readable without Pillow") from exc
    with Image.open(path) as im:
        return np.asarray(im.convert("L"), dtype=np.uint8)
