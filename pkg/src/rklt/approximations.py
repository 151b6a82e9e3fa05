"""Rounded-KLT approximations.

A low-complexity core is ``T = round(alpha * K)`` with entries in {-1, 0, 1}.
It becomes usable as ``S @ T`` where S is diagonal and chosen so that rows have
unit norm (and the whole matrix is orthonormal when T has orthogonal rows).
"""
import csv
import io
import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import AlphaOutOfRange, DegenerateTransform, NotDiagonalizableHere
from .markov import MarkovModel, klt_matrix


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class IntegerTransform:
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        if not np.array_equal(m, np.round(m)):
            raise ValueError("entries must be integers")
        m = m.astype(np.int64)
        if not np.isin(m, (-1, 0, 1)).all():
            raise ValueError("entries must lie in {-1, 0, 1}")
        zero_rows = np.flatnonzero(~m.any(axis=1))
        if zero_rows.size:
            raise DegenerateTransform(f"all-zero rows {zero_rows.tolist()} make the matrix singular")
        object.__setattr__(self, "entries", _frozen(m))

    @property
    def n(self):
        return self.entries.shape[0]

    def __eq__(self, other):
        if not isinstance(other, IntegerTransform):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def gram(self):
        """T @ T.T in exact integer arithmetic."""
        return self.entries @ self.entries.T

    def has_orthogonal_rows(self):
        g = self.gram()
        return not np.any(g - np.diag(np.diag(g)))


@dataclass(frozen=True, eq=False)
class ScaledTransform:
    core: IntegerTransform
    scaling: np.ndarray
    orthogonal_core: bool
    name: str = field(default="")

    def __post_init__(self):
        s = np.asarray(self.scaling, dtype=float)
        if s.shape != (self.core.n,):
            raise ValueError(f"scaling needs {self.core.n} values, got shape {s.shape}")
        if not (np.all(np.isfinite(s)) and np.all(s > 0) and np.all(s <= 1)):
            raise ValueError("scaling values must be finite and lie in (0, 1]")
        object.__setattr__(self, "scaling", _frozen(s))

    @property
    def n(self):
        return self.core.n

    @cached_property
    def matrix(self):
        return _frozen(self.scaling[:, None] * self.core.entries)

    @cached_property
    def inverse(self):
        if self.orthogonal_core:
            return _frozen(self.matrix.T.copy())
        return _frozen(np.linalg.inv(self.matrix))


def round_half_up(x):
    return np.floor(np.asarray(x) + 0.5)


def alpha_upper_bound(klt):
    """3 / (2 gamma), gamma being the largest |entry| of the KLT."""
    return 1.5 / np.abs(klt).max()


def round_scaled(klt, alpha, rho=None):
    """Element-wise round(alpha * klt) restricted to {-1, 0, 1}.

    ``rho`` is only used to label a raised :class:`AlphaOutOfRange`.
    """
    if alpha < 0:
        raise AlphaOutOfRange(f"alpha must be non-negative, got {alpha}", rho=rho)
    t = round_half_up(alpha * np.asarray(klt, dtype=float))
    if np.abs(t).max() > 1:
        where = "" if rho is None else f" at rho={rho:g}"
        raise AlphaOutOfRange(
            f"alpha={alpha} rounds entries outside {{-1,0,1}}{where}; "
            f"bound is {alpha_upper_bound(klt):.6f}", rho=rho)
    return IntegerTransform(t.astype(np.int64))


def orthogonalize(core, name="", branch=None):
    """Attach the diagonal S to an integer core.

    With orthogonal rows S is the inverse square root of ``T T^T``, which is
    then diagonal, so the element-wise root is exact.  Otherwise only the
    diagonal of ``T T^T`` is used and S merely normalizes the rows.  Pass
    ``branch="orthogonal"`` or ``"diagonal"`` to force a case; forcing the
    orthogonal one on a non-diagonal Gram matrix raises
    :class:`NotDiagonalizableHere`.
    """
    g = core.gram()
    d = np.diag(g)
    orthogonal = core.has_orthogonal_rows()
    if branch == "orthogonal" and not orthogonal:
        raise NotDiagonalizableHere("T T^T is not diagonal; its matrix square root is not supported")
    if branch not in (None, "orthogonal", "diagonal"):
        raise ValueError(f"unknown branch {branch!r}")
    return ScaledTransform(core, 1.0 / np.sqrt(d.astype(float)), orthogonal, name=name)


def rho_grid(step):
    """rho = step, 2 step, ... up to 1 - step, without accumulating drift."""
    if not 0 < step < 1:
        raise ValueError(f"step must lie in (0, 1), got {step}")
    count = int(np.floor((1 - step) / step + 1e-9))
    return [round(k * step, 12) for k in range(1, count + 1)]


def derive_catalog(n, alpha, step):
    """Sweep rho and collect each distinct rounded KLT with the first rho it appeared at."""
    seen = {}
    out = []
    previous = None
    for rho in rho_grid(step):
        core = round_scaled(klt_matrix(MarkovModel(n, rho)), alpha, rho=rho)
        if core == previous:
            continue
        previous = core
        if core not in seen:
            seen[core] = rho
            out.append((rho, core))
    return out


# Table of the four rounded approximations for N = 8, alpha = 2.
_T1 = [[0, 1, 1, 1, 1, 1, 1, 0],
       [1, 1, 1, 0, 0, -1, -1, -1],
       [1, 1, 0, -1, -1, 0, 1, 1],
       [1, 0, -1, -1, 1, 1, 0, -1],
       [1, 0, -1, 1, 1, -1, 0, 1],
       [1, -1, 0, 1, -1, 0, 1, -1],
       [1, -1, 1, 0, 0, 1, -1, 1],
       [0, -1, 1, -1, 1, -1, 1, 0]]
_T2 = [[0, 1, 1, 1, 1, 1, 1, 0],
       [1, 1, 1, 0, 0, -1, -1, -1],
       [1, 1, 0, -1, -1, 0, 1, 1],
       [1, 0, -1, -1, 1, 1, 0, -1],
       [1, -1, -1, 1, 1, -1, -1, 1],
       [1, -1, 0, 1, -1, 0, 1, -1],
       [0, -1, 1, 0, 0, 1, -1, 0],
       [0, -1, 1, -1, 1, -1, 1, 0]]
_T3 = [[1, 1, 1, 1, 1, 1, 1, 1],
       [1, 1, 1, 0, 0, -1, -1, -1],
       [1, 1, 0, -1, -1, 0, 1, 1],
       [1, 0, -1, -1, 1, 1, 0, -1],
       [1, -1, -1, 1, 1, -1, -1, 1],
       [1, -1, 0, 1, -1, 0, 1, -1],
       [0, -1, 1, 0, 0, 1, -1, 0],
       [0, -1, 1, -1, 1, -1, 1, 0]]
_T4 = [[1, 1, 1, 1, 1, 1, 1, 1],
       [1, 1, 1, 0, 0, -1, -1, -1],
       [1, 0, 0, -1, -1, 0, 0, 1],
       [1, 0, -1, -1, 1, 1, 0, -1],
       [1, -1, -1, 1, 1, -1, -1, 1],
       [1, -1, 0, 1, -1, 0, 1, -1],
       [0, -1, 1, 0, 0, 1, -1, 0],
       [0, -1, 1, -1, 1, -1, 1, 0]]

_R6 = 1 / np.sqrt(6)
_R8 = 1 / (2 * np.sqrt(2))
_H = 0.5

_TABLE = [
    ("T1", _T1, [_R6] * 8, (0.0, 0.4)),
    ("T2", _T2, [_R6, _R6, _R6, _R6, _R8, _R6, _H, _R6], (0.4, 0.7)),
    ("T3", _T3, [_R8, _R6, _R6, _R6, _R8, _R6, _H, _R6], (0.7, 0.8)),
    ("T4", _T4, [_R8, _R6, _H, _R6, _R8, _R6, _H, _R6], (0.8, 1.0)),
]


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    transform: ScaledTransform
    rho_interval: tuple

    def contains(self, rho):
        lo, hi = self.rho_interval
        if lo == 0.0:
            return 0.0 < rho < hi
        return lo <= rho < hi


def _build_catalog():
    entries = []
    for ident, m, s, interval in _TABLE:
        core = IntegerTransform(np.array(m, dtype=np.int64))
        st = ScaledTransform(core, np.array(s), core.has_orthogonal_rows(), name=ident)
        entries.append(CatalogEntry(ident, st, interval))
    return tuple(entries)


_CATALOG = _build_catalog()


def builtin_catalog():
    return list(_CATALOG)


def catalog_entry(ident):
    for e in _CATALOG:
        if e.id == ident:
            return e
    raise KeyError(f"unknown catalog id {ident!r}; expected one of T1..T4")


def lookup(rho):
    """Catalog entry whose rho interval contains ``rho``."""
    for e in _CATALOG:
        if e.contains(rho):
            return e
    raise ValueError(f"rho={rho} is outside (0, 1)")


def exact_scaling(core):
    """S diagonal as exact strings, e.g. '1/sqrt(6)'."""
    out = []
    for d in np.diag(core.gram()).tolist():
        root = int(round(d ** 0.5))
        out.append(f"1/{root}" if root * root == d else f"1/sqrt({d})")
    return out


def _interval_text(interval):
    lo, hi = interval
    return ("(" if lo == 0.0 else "[") + f"{lo:g},{hi:g})"


def catalog_records(entries=None):
    entries = builtin_catalog() if entries is None else entries
    for e in entries:
        yield {
            "id": e.id,
            "interval": _interval_text(e.rho_interval),
            "rho_low": e.rho_interval[0],
            "rho_high": e.rho_interval[1],
            "entries": e.transform.core.entries.ravel().tolist(),
            "scaling": [repr(float(v)) for v in e.transform.scaling],
        }


def catalog_to_jsonl(entries=None):
    return "".join(json.dumps(r) + "\n" for r in catalog_records(entries))


def catalog_to_csv(entries=None):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "interval"] + [f"t{i}{j}" for i in range(8) for j in range(8)]
               + [f"s{i}" for i in range(8)])
    for r in catalog_records(entries):
        w.writerow([r["id"], r["interval"]] + r["entries"] + r["scaling"])
    return buf.getvalue()
