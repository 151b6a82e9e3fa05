"""Sparse factorizations T_i = P_i A_{2,i} A_1 and their add/subtract realization.

Every non-permutation factor is an integer matrix with entries in {-1, 0, 1}.
Applying it costs ``nnz(row) - 1`` additions per output row; negations are
folded into the add/subtract and counted as free.  The two-stage blocks of
T3 and T4 are stored as two separate factors so that the count follows their
printed decomposition rather than their dense product.
"""
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .approximations import catalog_entry
from .errors import DimensionMismatch

BUTTERFLY = "butterfly_A1"
BLOCK_DIAGONAL = "block_diagonal_A2"
PERMUTATION = "permutation"

DIRECT_ADDITIONS = 56
DIRECT_MULTIPLICATIONS = 64


@dataclass(frozen=True, eq=False)
class SparseFactor:
    kind: str
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.int64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("factor must be square")
        if not np.isin(m, (-1, 0, 1)).all():
            raise ValueError("factor entries must lie in {-1, 0, 1}")
        if self.kind == PERMUTATION:
            if not (np.isin(m, (0, 1)).all() and (m.sum(0) == 1).all() and (m.sum(1) == 1).all()):
                raise ValueError("not a permutation matrix")
        elif self.kind == BUTTERFLY:
            if not np.array_equal(m, butterfly(m.shape[0])):
                raise ValueError("butterfly factor must be [[I, J], [J, -I]]")
        elif self.kind != BLOCK_DIAGONAL:
            raise ValueError(f"unknown factor kind {self.kind!r}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        # one (index, sign) list per output row, precomputed for the add/sub network
        object.__setattr__(self, "_rows", tuple(
            tuple((int(j), int(row[j])) for j in np.flatnonzero(row)) for row in m))

    @property
    def additions(self):
        if self.kind == PERMUTATION:
            return 0
        return int(sum(max(len(r) - 1, 0) for r in self._rows))

    def apply(self, x):
        """Apply to ``x`` of shape (n, ...) using only adds, subtracts and moves."""
        if self.kind == PERMUTATION:
            return x[[r[0][0] for r in self._rows]]
        out = np.empty_like(x)
        for i, terms in enumerate(self._rows):
            if not terms:
                out[i] = 0
                continue
            j, s = terms[0]
            acc = x[j].copy() if s > 0 else -x[j]
            for j, s in terms[1:]:
                if s > 0:
                    acc += x[j]
                else:
                    acc -= x[j]
            out[i] = acc
        return out


def butterfly(n):
    h = n // 2
    eye = np.eye(h, dtype=np.int64)
    flip = eye[::-1]
    return np.block([[eye, flip], [flip, -eye]])


def _blockdiag(upper, lower):
    z = np.zeros((4, 4), dtype=np.int64)
    return np.block([[np.asarray(upper), z], [z, np.asarray(lower)]])


def _permutation(targets):
    p = np.zeros((8, 8), dtype=np.int64)
    p[np.arange(8), targets] = 1
    return p


_B2 = [[-1, -1, 0, 1],
       [-1, 1, -1, 0],
       [1, 0, -1, 1],
       [0, 1, 1, 1]]

_B21 = [[1, 1, 0, -1],
        [1, -1, 1, 0],
        [1, 0, -1, 1],
        [0, 1, 1, 1]]

_B22 = [[1, 1, 0, -1],
        [1, -1, -1, 1],
        [0, -1, 1, 0],
        [0, 1, 1, 1]]

# (left, right) stages; the block equals left @ right
_B23 = ([[1, 1, 1, 0],
         [1, -1, -1, 0],
         [0, -1, 1, 0],
         [0, 1, 0, 1]],
        [[1, 0, 0, 1],
         [0, 1, 0, 0],
         [0, 0, 1, 0],
         [1, 0, 0, -1]])

_B24 = ([[1, 1, 0, 0],
         [1, -1, 0, 0],
         [0, 0, -1, 0],
         [0, 0, 0, 1]],
        [[1, 0, 0, 1],
         [0, 1, 1, 0],
         [0, 1, -1, 0],
         [1, 0, 0, -1]])

# row i of P picks input index targets[i]
_P1 = _permutation([3, 7, 0, 4, 2, 6, 1, 5])
_P2 = _permutation([3, 7, 0, 4, 1, 6, 2, 5])
_P34 = _permutation([0, 7, 3, 4, 1, 6, 2, 5])

_EYE4 = np.eye(4, dtype=np.int64)


def _stages(ident):
    a1 = SparseFactor(BUTTERFLY, butterfly(8))
    if ident == "T1":
        middle = [SparseFactor(BLOCK_DIAGONAL, _blockdiag(_B21, _B2))]
        perm = _P1
    elif ident == "T2":
        middle = [SparseFactor(BLOCK_DIAGONAL, _blockdiag(_B22, _B2))]
        perm = _P2
    elif ident in ("T3", "T4"):
        left, right = _B23 if ident == "T3" else _B24
        middle = [SparseFactor(BLOCK_DIAGONAL, _blockdiag(right, _B2)),
                  SparseFactor(BLOCK_DIAGONAL, _blockdiag(left, _EYE4))]
        perm = _P34
    else:
        raise KeyError(f"no factorization for {ident!r}; expected one of T1..T4")
    return [a1] + middle + [SparseFactor(PERMUTATION, perm)]


_PRINTED_ADDITIONS = {"T1": 24, "T2": 24, "T3": 24, "T4": 22}


@dataclass(frozen=True, eq=False)
class FactorizedTransform:
    """Factors are stored in application order: ``factors[0]`` acts first."""
    id: str
    factors: tuple
    addition_count: int

    @property
    def n(self):
        return self.factors[0].matrix.shape[0]

    def product(self):
        return reduce(lambda acc, f: f.matrix @ acc, self.factors[1:], self.factors[0].matrix)

    def counted_additions(self):
        return sum(f.additions for f in self.factors)


def factorization(ident):
    factors = tuple(_stages(ident))
    return FactorizedTransform(ident, factors, _PRINTED_ADDITIONS[ident])


def apply_forward(f, x):
    """Compute ``core @ x`` through the factor chain.

    ``x`` may be a length-N vector or an (N, m) array whose columns are
    transformed independently.
    """
    x = np.asarray(x)
    if x.ndim == 0 or x.shape[0] != f.n:
        raise DimensionMismatch(f"expected leading dimension {f.n}, got shape {x.shape}")
    if x.dtype.kind not in "fiuO":
        x = x.astype(float)
    for factor in f.factors:
        x = factor.apply(x)
    return x


def verify(f, core=None):
    """Return a list of problems found; empty when the factorization is sound."""
    core = catalog_entry(f.id).transform.core.entries if core is None else core
    problems = []
    if not np.array_equal(f.product(), core):
        problems.append(f"{f.id}: factor product differs from the catalog matrix")
    counted = f.counted_additions()
    if counted != f.addition_count:
        problems.append(f"{f.id}: recounted {counted} additions, expected {f.addition_count}")
    return problems


def reduction_pct(fast, direct=DIRECT_ADDITIONS):
    return 100.0 * (direct - fast) / direct


def operation_counts():
    """Rows of (id, fast additions, direct additions, multiplications, reduction %)."""
    rows = []
    for ident in ("T1", "T2", "T3", "T4"):
        fast = factorization(ident).counted_additions()
        rows.append((ident, fast, DIRECT_ADDITIONS, 0, reduction_pct(fast)))
    rows.append(("exactKLT", None, DIRECT_ADDITIONS, DIRECT_MULTIPLICATIONS, None))
    return rows
