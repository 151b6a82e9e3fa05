import numpy as np
import pytest

import rklt.fast as fast
from rklt.approximations import catalog_entry
from rklt.errors import DimensionMismatch
from rklt.fast import (
    BLOCK_DIAGONAL,
    BUTTERFLY,
    PERMUTATION,
    SparseFactor,
    apply_forward,
    butterfly,
    factorization,
    operation_counts,
    reduction_pct,
    verify,
)

IDS = ["T1", "T2", "T3", "T4"]


def core(ident):
    return catalog_entry(ident).transform.core.entries


@pytest.mark.parametrize("ident", IDS)
def test_product_equals_core(ident):
    f = factorization(ident)
    np.testing.assert_array_equal(f.product(), core(ident))
    assert verify(f) == []
    assert f.factors[0].kind == BUTTERFLY
    assert f.factors[-1].kind == PERMUTATION
    assert all(x.kind == BLOCK_DIAGONAL for x in f.factors[1:-1])


def test_addition_counts():
    assert {i: factorization(i).counted_additions() for i in IDS} == {"T1": 24, "T2": 24, "T3": 24, "T4": 22}


def test_butterfly_shape():
    b = butterfly(8)
    np.testing.assert_array_equal(b[:4, :4], np.eye(4))
    np.testing.assert_array_equal(b[4:, 4:], -np.eye(4))
    np.testing.assert_array_equal(b[:4, 4:], np.eye(4)[::-1])


def test_factor_validation():
    with pytest.raises(ValueError):
        SparseFactor(BUTTERFLY, np.eye(8))
    with pytest.raises(ValueError):
        SparseFactor(PERMUTATION, 2 * np.eye(8) - 1)
    with pytest.raises(ValueError):
        SparseFactor("diagonal", np.eye(8))
    with pytest.raises(ValueError):
        SparseFactor(BLOCK_DIAGONAL, 2 * np.eye(8))


def test_all_ones_through_t4():
    out = apply_forward(factorization("T4"), np.ones(8, dtype=np.int64))
    np.testing.assert_array_equal(out, [8, 0, 0, 0, 0, 0, 0, 0])


def test_impulse_through_t2():
    e0 = np.zeros(8, dtype=np.int64)
    e0[0] = 1
    np.testing.assert_array_equal(apply_forward(factorization("T2"), e0), core("T2")[:, 0])


@pytest.mark.parametrize("ident", IDS)
def test_integer_inputs_exact(ident, rng):
    x = rng.integers(-255, 256, size=(8, 1000))
    np.testing.assert_array_equal(apply_forward(factorization(ident), x), core(ident) @ x)


@pytest.mark.parametrize("ident", IDS)
def test_real_inputs(ident, rng):
    x = rng.normal(size=(8, 10_000))
    got = apply_forward(factorization(ident), x)
    assert np.abs(got - core(ident) @ x).max() <= 1e-12


class NoMul:
    """Scalar that supports add/sub/neg only."""

    def __init__(self, v):
        self.v = v

    def __add__(self, o):
        return NoMul(self.v + o.v)

    def __sub__(self, o):
        return NoMul(self.v - o.v)

    def __neg__(self):
        return NoMul(-self.v)

    def __mul__(self, o):
        raise AssertionError("multiplication used")

    __rmul__ = __mul__
    __truediv__ = __mul__


@pytest.mark.parametrize("ident", IDS)
def test_no_multiplications(ident):
    vals = [3, -1, 4, 1, -5, 9, 2, -6]
    x = np.empty((8, 1), dtype=object)
    for i, v in enumerate(vals):
        x[i, 0] = NoMul(v)
    out = apply_forward(factorization(ident), x)
    assert [o.v for o in out[:, 0]] == (core(ident) @ np.array(vals)).tolist()


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        apply_forward(factorization("T1"), np.ones(7))
    with pytest.raises(DimensionMismatch):
        apply_forward(factorization("T1"), np.float64(1.0))


def test_verify_detects_wrong_product():
    bad = core("T1").copy()
    bad[0, 0] = 1
    assert verify(factorization("T1"), core=bad)


def test_verify_detects_wrong_count(monkeypatch):
    monkeypatch.setitem(fast._PRINTED_ADDITIONS, "T4", 21)
    assert any("additions" in p for p in verify(factorization("T4")))


def test_unknown_factorization():
    with pytest.raises(KeyError):
        factorization("T9")


def test_operation_counts_table():
    rows = operation_counts()
    assert [r[0] for r in rows] == IDS + ["exactKLT"]
    assert rows[-1] == ("exactKLT", None, 56, 64, None)
    assert [round(r[4], 2) for r in rows[:4]] == [57.14, 57.14, 57.14, 60.71]
    assert all(r[3] == 0 for r in rows[:4])


def test_reduction_pct():
    assert reduction_pct(56) == 0
    assert reduction_pct(22) == pytest.approx(100 * 34 / 56)
