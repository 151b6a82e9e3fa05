"""Coding and proximity figures of merit for a transform under an AR(1) model."""
import csv
import io
from dataclasses import dataclass

import numpy as np

from .approximations import ScaledTransform, catalog_entry
from .errors import DimensionMismatch, SingularTransform
from .markov import MarkovModel, autocorrelation_matrix, klt_matrix


def as_matrix(t):
    if isinstance(t, ScaledTransform):
        return t.matrix
    return np.asarray(t, dtype=float)


def _inverse(t):
    m = as_matrix(t)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or np.linalg.matrix_rank(m) < m.shape[0]:
        raise SingularTransform("transform is not invertible")
    if isinstance(t, ScaledTransform):
        return t.inverse
    return np.linalg.inv(m)


def unified_coding_gain(t_hat, model, synthesis="transpose"):
    """Unified coding gain in dB.

    ``A_k = h_k R_x h_k^T`` for analysis row h_k; ``B_k`` is the squared norm
    of the k-th synthesis vector.  ``synthesis`` picks where that vector is
    read from:

    * ``"transpose"`` -- rows of ``t_hat.T`` (columns of t_hat).  This is the
      convention that reproduces the published coding-gain figures for the
      non-orthogonal approximations.
    * ``"inverse"`` -- rows of ``inv(t_hat)``.

    The two coincide for orthonormal transforms.
    """
    m = as_matrix(t_hat)
    rx = autocorrelation_matrix(model)
    if synthesis == "transpose":
        _inverse(t_hat)  # singular input is still an error
        g = m.T
    elif synthesis == "inverse":
        g = _inverse(t_hat)
    else:
        raise ValueError(f"unknown synthesis convention {synthesis!r}")
    a = np.einsum("ki,ij,kj->k", m, rx, m)
    b = np.sum(g * g, axis=1)
    return float(-10.0 * np.mean(np.log10(a * b)))


def transform_efficiency(t_hat, model):
    m = as_matrix(t_hat)
    r = np.abs(m @ autocorrelation_matrix(model) @ m.T)
    return float(100.0 * np.trace(r) / r.sum())


def align_signs(reference, t_hat):
    """Flip rows of t_hat to have non-negative inner product with reference rows."""
    ref = np.asarray(reference, dtype=float)
    m = as_matrix(t_hat)
    if ref.shape != m.shape:
        raise DimensionMismatch(f"shapes differ: {ref.shape} vs {m.shape}")
    s = np.where(np.sum(ref * m, axis=1) < 0, -1.0, 1.0)
    return m * s[:, None]


def total_error_energy(reference, t_hat):
    d = np.asarray(reference, dtype=float) - align_signs(reference, t_hat)
    return float(np.pi * np.sum(d * d))


def mse(reference, t_hat, model):
    """(1/N) tr{(ref - T) R_x (ref - T)^T} after sign alignment."""
    d = np.asarray(reference, dtype=float) - align_signs(reference, t_hat)
    return float(np.trace(d @ autocorrelation_matrix(model) @ d.T) / model.n)


def klt_mse(t_hat, model):
    return mse(klt_matrix(model), t_hat, model)


@dataclass(frozen=True)
class MetricsRecord:
    transform_id: str
    rho: float
    coding_gain_db: float
    efficiency_pct: float
    total_error_energy: float
    mse: float

    def csv_row(self):
        return [self.transform_id, f"{self.rho:g}", f"{self.coding_gain_db:.4f}",
                f"{self.efficiency_pct:.4f}", f"{self.total_error_energy:.4f}", f"{self.mse:.4f}"]


def evaluate(transform_id, t_hat, model, synthesis="transpose"):
    k = klt_matrix(model)
    return MetricsRecord(
        transform_id, model.rho,
        unified_coding_gain(t_hat, model, synthesis),
        transform_efficiency(t_hat, model),
        total_error_energy(k, t_hat),
        mse(k, t_hat, model))


TABLE2_PAIRS = (("T1", 0.3), ("T2", 0.4), ("T3", 0.7), ("T4", 0.8))


def table2(n=8, synthesis="transpose"):
    """Exact KLT and catalog approximation at each of the four reference rho values."""
    rows = []
    for ident, rho in TABLE2_PAIRS:
        model = MarkovModel(n, rho)
        rows.append(evaluate(f"K{rho:g}", klt_matrix(model), model, synthesis))
        rows.append(evaluate(ident, catalog_entry(ident).transform, model, synthesis))
    return rows


CSV_HEADER = ["transform", "rho", "Cg", "eta", "eps", "mse"]


def records_to_csv(records):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow(r.csv_row())
    return buf.getvalue()
