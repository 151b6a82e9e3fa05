"""Exact KLT, autocorrelation and DCT-II matrices for first-order Markov signals.

For an AR(1) source with correlation coefficient ``rho`` the covariance is
the Toeplitz matrix ``rho**|i-j|``.  Its eigenvectors form the KLT.  The
eigenvalues also have a closed form through the roots ``omega`` of

    tan(N*omega) = -(1 - rho**2) sin(omega) / ((1 + rho**2) cos(omega) - 2 rho)

which :func:`solve_eigenfrequencies` finds by sign-scan plus bisection.  The
canonical KLT comes from a dense symmetric eigensolver; the closed form is
kept as an independent cross-check.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import RootBracketingFailure

BISECTION_WIDTH = 1e-14
SCAN_DENSITY = 64


@dataclass(frozen=True)
class MarkovModel:
    n: int
    rho: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"blocklength must be an integer >= 2, got {self.n!r}")
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in the open interval (0, 1), got {self.rho!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "rho", float(self.rho))


@dataclass(frozen=True)
class EigenSolution:
    omegas: np.ndarray
    lambdas: np.ndarray


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def autocorrelation_matrix(model):
    idx = np.arange(model.n)
    return model.rho ** np.abs(idx[:, None] - idx[None, :])


def frequency_equation(omega, model):
    """Pole-free form of the transcendental equation; zero at every omega_i.

    Obtained by multiplying both sides by ``cos(N w) * ((1+rho^2) cos w - 2 rho)``,
    so it has no poles where ``tan(N w)`` blows up.
    """
    n, rho = model.n, model.rho
    omega = np.asarray(omega, dtype=float)
    return (np.sin(n * omega) * ((1 + rho * rho) * np.cos(omega) - 2 * rho)
            + np.cos(n * omega) * (1 - rho * rho) * np.sin(omega))


def eigenvalue_from_frequency(omega, rho):
    return (1 - rho * rho) / (1 + rho * rho - 2 * rho * np.cos(omega))


def _bisect(f, lo, hi, flo):
    while hi - lo > BISECTION_WIDTH:
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid < 0) == (flo < 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_eigenfrequencies(model):
    """Return the N roots omega_i in (0, pi), ascending, with their lambda_i.

    Since lambda decreases with omega, ascending omegas give descending
    eigenvalues, the same order as the rows of :func:`klt_matrix`.
    """
    f = lambda w: float(frequency_equation(w, model))
    # endpoints 0 and pi are trivial zeros of the pole-free form
    grid = np.linspace(0.0, np.pi, SCAN_DENSITY * model.n + 1)[1:-1]
    values = frequency_equation(grid, model)

    roots = []
    for k in range(len(grid)):
        if values[k] == 0.0:
            roots.append(grid[k])
        elif k + 1 < len(grid) and values[k + 1] != 0.0 and (values[k] < 0) != (values[k + 1] < 0):
            roots.append(_bisect(f, grid[k], grid[k + 1], values[k]))

    if len(roots) != model.n:
        raise RootBracketingFailure(
            f"found {len(roots)} brackets, expected {model.n} (n={model.n}, rho={model.rho})")
    omegas = np.array(roots)
    return EigenSolution(_frozen(omegas), _frozen(eigenvalue_from_frequency(omegas, model.rho)))


def fix_row_signs(m, tol=1e-12):
    """Flip rows so the first entry that is not ~0 is positive."""
    m = np.array(m, dtype=float)
    for row in m:
        nz = np.flatnonzero(np.abs(row) > tol * np.abs(row).max())
        if nz.size and row[nz[0]] < 0:
            row *= -1
    return m


@lru_cache(maxsize=256)
def _klt(model):
    w, v = np.linalg.eigh(autocorrelation_matrix(model))
    order = np.argsort(-w, kind="stable")
    return _frozen(fix_row_signs(v[:, order].T)), _frozen(w[order])


def klt_matrix(model):
    """KLT matrix: rows are unit eigenvectors of R_x by descending eigenvalue."""
    return _klt(model)[0]


def klt_eigenvalues(model):
    return _klt(model)[1]


def klt_matrix_closed_form(model, layout="corrected"):
    """KLT entries from the analytic expression in terms of omega_i and lambda_i.

    ``layout="corrected"`` uses row index i for the phase offset
    ``(i+1)*pi/2`` and column index j in the frequency term
    ``omega_i*(j - (N-1)/2)``.  That yields the orthonormal eigenbasis.
    ``layout="printed"`` places i in both positions, as the expression is
    commonly typeset.  That variant is not orthogonal and is exposed only
    so that the discrepancy can be demonstrated.
    """
    sol = solve_eigenfrequencies(model)
    n = model.n
    i = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    w = sol.omegas[:, None]
    if layout == "corrected":
        phase = w * (j - (n - 1) / 2) + (i + 1) * np.pi / 2
    elif layout == "printed":
        phase = w * (i - (n - 1) / 2) + (j + 1) * np.pi / 2
    else:
        raise ValueError(f"unknown layout {layout!r}")
    return np.sqrt(2.0 / (n + sol.lambdas))[:, None] * np.sin(phase)


def dct_matrix(n):
    """Orthonormal DCT-II matrix."""
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n!r}")
    k = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    m = np.sqrt(2.0 / n) * np.cos(np.pi * k * (2 * j + 1) / (2 * n))
    m[0] = 1.0 / np.sqrt(n)
    return m
