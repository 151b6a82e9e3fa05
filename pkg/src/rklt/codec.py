"""JPEG-like block codec: 8x8 transform, zig-zag coefficient retention, quality metrics.

Blocks are handled as stacked arrays of shape (..., 8, 8) so a whole image
is transformed in one batched matrix product.
"""
import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter, uniform_filter

from .approximations import ScaledTransform, round_half_up
from .errors import DimensionMismatch, RetainOutOfRange, SingularTransform
from .fast import apply_forward

BLOCK = 8

JPEG_LUMINANCE_Q = np.array([
    [16, 11, 10, 16, 24, 40, 51, 61],
    [12, 12, 14, 19, 26, 58, 60, 55],
    [14, 13, 16, 24, 40, 57, 69, 56],
    [14, 17, 22, 29, 51, 87, 80, 62],
    [18, 22, 37, 56, 68, 109, 103, 77],
    [24, 35, 55, 64, 81, 104, 113, 92],
    [49, 64, 78, 87, 103, 121, 120, 101],
    [72, 92, 95, 98, 112, 100, 103, 99],
], dtype=float)


def zigzag_order(n=BLOCK):
    """(row, col) positions in JPEG scan order: (0,0), (0,1), (1,0), (2,0), ..."""
    cells = [(i, j) for i in range(n) for j in range(n)]
    # odd anti-diagonals run top-right to bottom-left, even ones the other way
    return sorted(cells, key=lambda p: (p[0] + p[1], p[0] if (p[0] + p[1]) % 2 else p[1]))


ZIGZAG = tuple(zigzag_order())


def retain_mask(r):
    if isinstance(r, bool) or int(r) != r or not 1 <= r <= BLOCK * BLOCK:
        raise RetainOutOfRange(f"r must be an integer in [1, {BLOCK * BLOCK}], got {r!r}")
    mask = np.zeros((BLOCK, BLOCK), dtype=bool)
    rows, cols = zip(*ZIGZAG[:int(r)])
    mask[list(rows), list(cols)] = True
    return mask


def zigzag_retain(spectrum, r):
    """Zero every coefficient at zig-zag index >= r."""
    return np.where(retain_mask(r), spectrum, 0.0)


def _matrices(t, pairing):
    """(left, right, left_inverse, right_inverse) for B = left @ A @ right."""
    if isinstance(t, ScaledTransform):
        m, inv = t.matrix, t.inverse
    else:
        m = np.asarray(t, dtype=float)
        if m.shape != (BLOCK, BLOCK):
            raise DimensionMismatch(f"transform must be {BLOCK}x{BLOCK}, got {m.shape}")
        if np.linalg.matrix_rank(m) < BLOCK:
            raise SingularTransform("transform is not invertible")
        inv = np.linalg.inv(m)
    if pairing == "transpose":
        return m, m.T, inv, inv.T
    if pairing == "inverse":
        return m, inv, inv, m
    raise ValueError(f"unknown pairing {pairing!r}")


def _fast_core_2d(factorized, blocks):
    """T @ A @ T.T for stacked blocks using the add/subtract network only."""
    shape = blocks.shape
    a = blocks.reshape(-1, BLOCK, BLOCK)
    cols = apply_forward(factorized, a.transpose(1, 0, 2).reshape(BLOCK, -1))   # T @ A
    ta = cols.reshape(BLOCK, -1, BLOCK).transpose(1, 0, 2)
    rows = apply_forward(factorized, ta.transpose(2, 0, 1).reshape(BLOCK, -1))  # T @ (T A)^T
    out = rows.reshape(BLOCK, -1, BLOCK).transpose(1, 2, 0)
    return out.reshape(shape)


def transform_block_2d(t, block, direction="forward", pairing="transpose", factorized=None):
    """2D transform of one block or a stack of blocks.

    Forward is ``T @ A @ T.T`` with ``pairing="transpose"`` and
    ``T @ A @ inv(T)`` with ``pairing="inverse"``; the inverse direction
    undoes whichever was chosen.  For orthonormal transforms both pairings
    are the same map.

    ``factorized`` (forward only) routes the integer core through its fast
    factorization and applies the diagonal scaling afterwards.
    """
    block = np.asarray(block, dtype=float)
    if block.shape[-2:] != (BLOCK, BLOCK):
        raise DimensionMismatch(f"expected {BLOCK}x{BLOCK} blocks, got shape {block.shape}")
    if direction not in ("forward", "inverse"):
        raise ValueError(f"unknown direction {direction!r}")

    if factorized is not None and direction == "forward":
        if not isinstance(t, ScaledTransform):
            raise TypeError("the fast path needs a ScaledTransform")
        if pairing == "inverse" and not t.orthogonal_core:
            raise ValueError("the fast path only realizes T A T^T")
        u = t.scaling
        return np.outer(u, u) * _fast_core_2d(factorized, block)

    left, right, left_inv, right_inv = _matrices(t, pairing)
    if direction == "forward":
        return left @ block @ right
    return left_inv @ block @ right_inv


def scaling_outer(t, pairing="transpose"):
    """R such that the scaled 2D transform equals R * (integer-core transform)."""
    u = t.scaling
    if pairing == "inverse" and not t.orthogonal_core:
        return np.outer(u, 1.0 / u)
    return np.outer(u, u)


def core_transform_2d(t, block, pairing="transpose"):
    core = t.core.entries.astype(float)
    if pairing == "inverse" and not t.orthogonal_core:
        return core @ block @ np.linalg.inv(core)
    return core @ block @ core.T


def _check_q(q):
    q = np.asarray(q, dtype=float)
    if q.shape != (BLOCK, BLOCK) or not np.all(q > 0):
        raise ValueError("quantization matrix must be 8x8 with positive entries")
    return q


def explicit_quantization(block, t, q, pairing="transpose"):
    """round((R * B_core) / Q): scale the integer-core output, then quantize."""
    q = _check_q(q)
    b = core_transform_2d(t, np.asarray(block, dtype=float), pairing)
    return round_half_up(scaling_outer(t, pairing) * b / q).astype(np.int64)


def absorbed_quantization(block, t, q, pairing="transpose"):
    """round(B_core / (Q / R)): the scaling folded into the quantization table."""
    q = _check_q(q)
    b = core_transform_2d(t, np.asarray(block, dtype=float), pairing)
    q_tilde = q / scaling_outer(t, pairing)
    return round_half_up(b / q_tilde).astype(np.int64)


def absorbed_table(t, q, pairing="transpose"):
    return _check_q(q) / scaling_outer(t, pairing)


def pad_to_blocks(img):
    h, w = img.shape
    ph, pw = (-h) % BLOCK, (-w) % BLOCK
    if ph or pw:
        img = np.pad(img, ((0, ph), (0, pw)), mode="edge")
    return img


def to_blocks(img):
    h, w = img.shape
    return img.reshape(h // BLOCK, BLOCK, w // BLOCK, BLOCK).swapaxes(1, 2)


def from_blocks(blocks):
    hb, wb = blocks.shape[:2]
    return blocks.swapaxes(1, 2).reshape(hb * BLOCK, wb * BLOCK)


def _check_image(img):
    img = np.asarray(img)
    if img.ndim != 2 or img.size == 0:
        raise ValueError(f"expected a 2D grayscale image, got shape {img.shape}")
    if img.min() < 0 or img.max() > 255:
        raise ValueError("pixel values must lie in [0, 255]")
    return img


def image_mse(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"image shapes differ: {a.shape} vs {b.shape}")
    d = a - b
    return float(np.mean(d * d))


def psnr_from_mse(mse, peak=255.0):
    if mse == 0:
        return float("inf")
    return float(10.0 * np.log10(peak * peak / mse))


def image_psnr(a, b):
    return psnr_from_mse(image_mse(a, b))


SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_SIGMA = 1.5


def image_mssim(a, b, window="gaussian", data_range=255.0):
    """Mean structural similarity.

    ``window="gaussian"``: 11x11 Gaussian, sigma 1.5.  ``window="uniform"``:
    8x8 box.  Local statistics use population (biased) variances, and the
    mean is taken over positions where the window lies inside the image.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"image shapes differ: {a.shape} vs {b.shape}")
    if window == "gaussian":
        filt = lambda x: gaussian_filter(x, SSIM_SIGMA, truncate=3.5)
        pad = 5
    elif window == "uniform":
        filt = lambda x: uniform_filter(x, size=8)
        pad = 4
    else:
        raise ValueError(f"unknown window {window!r}")
    if min(a.shape) <= 2 * pad:
        raise ValueError(f"image {a.shape} too small for the {window} window")

    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    mu_a, mu_b = filt(a), filt(b)
    var_a = filt(a * a) - mu_a * mu_a
    var_b = filt(b * b) - mu_b * mu_b
    cov = filt(a * b) - mu_a * mu_b
    ssim = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2))
    return float(ssim[pad:-pad, pad:-pad].mean())


def compression_rate_pct(r):
    return 100.0 * (BLOCK * BLOCK - r) / (BLOCK * BLOCK)


@dataclass(frozen=True)
class CompressionReport:
    transform_id: str
    r: int
    mse: float
    psnr_db: float
    mssim: float
    compression_rate_pct: float
    image: str = ""

    def csv_row(self):
        return [self.image, self.transform_id, self.r, f"{self.mse:.6f}", f"{self.psnr_db:.6f}",
                f"{self.mssim:.6f}", f"{self.compression_rate_pct:.4f}"]


def reconstruct(img, t, r, pairing="transpose", factorized=None):
    """Compress and decompress; returns the reconstructed uint8 image."""
    img = _check_image(img)
    h, w = img.shape
    mask = retain_mask(r)
    blocks = to_blocks(pad_to_blocks(img).astype(float))
    spectrum = transform_block_2d(t, blocks, "forward", pairing, factorized)
    spectrum = np.where(mask, spectrum, 0.0)
    restored = transform_block_2d(t, spectrum, "inverse", pairing)
    out = np.clip(round_half_up(from_blocks(restored)), 0, 255).astype(np.uint8)
    return out[:h, :w]


def compress_image(img, t, r, transform_id="", pairing="transpose", window="gaussian",
                   factorized=None, image_name=""):
    img = _check_image(img)
    out = reconstruct(img, t, r, pairing, factorized)
    m = image_mse(img, out)
    report = CompressionReport(transform_id, int(r), m, psnr_from_mse(m),
                               image_mssim(img, out, window), compression_rate_pct(r), image_name)
    return out, report


def default_threads():
    value = os.environ.get("RKLT_THREADS")
    if value:
        return max(1, int(value))
    return min(8, os.cpu_count() or 1)


def rate_quality_sweep(corpus, transforms, r_values, pairing="transpose", window="gaussian",
                       threads=None):
    """Average MSE/PSNR/MSSIM over a corpus for every (transform, r).

    ``transforms`` is a sequence of (name, transform) pairs or a mapping.
    Rows come back ordered by the given transform order, then ascending r,
    regardless of how the work was scheduled.
    """
    corpus = [_check_image(img) for img in corpus]
    if not corpus:
        raise ValueError("corpus is empty")
    items = list(transforms.items()) if hasattr(transforms, "items") else list(transforms)
    r_values = sorted(set(int(r) for r in r_values))
    for r in r_values:
        retain_mask(r)

    def per_image(img):
        out = {}
        for name, t in items:
            for r in r_values:
                _, rep = compress_image(img, t, r, name, pairing, window)
                out[name, r] = rep
        return out

    threads = default_threads() if threads is None else threads
    if threads > 1 and len(corpus) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(per_image, corpus))
    else:
        results = [per_image(img) for img in corpus]

    rows = []
    for name, _ in items:
        for r in r_values:
            reps = [res[name, r] for res in results]
            rows.append(CompressionReport(
                name, r,
                float(np.mean([x.mse for x in reps])),
                float(np.mean([x.psnr_db for x in reps])),
                float(np.mean([x.mssim for x in reps])),
                compression_rate_pct(r)))
    return rows


REPORT_HEADER = ["image", "transform", "r", "mse", "psnr", "mssim", "rate_pct"]
SWEEP_HEADER = ["transform", "r", "mse", "psnr", "mssim", "rate_pct"]


def reports_to_csv(reports, sweep=False):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER if sweep else REPORT_HEADER)
    for rep in reports:
        row = rep.csv_row()
        w.writerow(row[1:] if sweep else row)
    return buf.getvalue()


def ar1_texture(shape, rho, seed, mean=128.0, std=40.0):
    """8-bit image drawn from a separable 2D AR(1) field (correlation rho per axis)."""
    rng = np.random.default_rng(seed)
    field = rng.standard_normal(shape)
    a = np.sqrt(1.0 - rho * rho)
    for axis in (0, 1):
        field = np.moveaxis(field, axis, -1).copy()
        # stationary start: first sample has unit variance
        for k in range(1, field.shape[-1]):
            field[..., k] = rho * field[..., k - 1] + a * field[..., k]
        field = np.moveaxis(field, -1, axis)
    return np.clip(round_half_up(mean + std * field), 0, 255).astype(np.uint8)
