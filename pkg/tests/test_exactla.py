from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from htbgg import _kernels_py
from htbgg.exactla import (GF, HAVE_EXTENSION, QQ, FieldMismatchError, Mat, SparseMat, kernel_basis,
                           parse_field, rank, solve_linear, split_off_iso)


def naive_rank(rows):
    """Textbook elimination over Fraction, independent of the library."""
    m = [[Fraction(x) for x in r] for r in rows]
    r = 0
    for c in range(len(m[0]) if m else 0):
        k = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if k is None:
            continue
        m[r], m[k] = m[k], m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c] / m[r][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
    return r


matrices = st.integers(1, 6).flatmap(lambda r: st.integers(1, 6).flatmap(
    lambda c: st.lists(st.lists(st.integers(-4, 4), min_size=c, max_size=c), min_size=r, max_size=r)))
fields = st.sampled_from([QQ, GF(2), GF(7), GF(32003)])


def test_parse_field():
    assert parse_field("Q") is QQ
    assert parse_field("GF:7") == GF(7)
    assert GF(7).descriptor == "GF:7"
    with pytest.raises(ValueError):
        parse_field("R")
    with pytest.raises(ValueError):
        GF(8)


def test_known_rank_and_kernel():
    A = Mat.from_rows(QQ, [[1, 2, 3], [2, 4, 6], [1, 0, 1]])
    assert A.rank() == 2
    K = A.kernel_basis()
    assert K.cols == 1 and (A @ K).is_zero()
    assert kernel_basis(A) == [(-1, -1, 1)]


def test_rational_inverse_exact():
    A = Mat.from_rows(QQ, [[2, 1], [1, 1]])
    assert A.inverse() == Mat.from_rows(QQ, [[1, -1], [-1, 2]])
    B = Mat.from_rows(QQ, [[3, 0], [0, 2]])
    assert B.inverse().a[1, 1] == Fraction(1, 2)


def test_gf_arithmetic_wraps():
    F = GF(7)
    A = Mat.from_rows(F, [[3, 5], [1, 2]])
    assert A.inverse() @ A == Mat.identity(F, 2)
    assert F.inv(3) == 5
    assert Mat.from_rows(F, [[1, 1], [1, 1]]).scale(7).is_zero()


def test_rank_depends_on_characteristic():
    rows = [[1, 1, 0], [0, 1, 1], [1, 0, 1]]
    assert Mat.from_rows(QQ, rows).rank() == 3
    assert Mat.from_rows(GF(2), rows).rank() == 2


def test_field_mismatch():
    with pytest.raises(FieldMismatchError):
        Mat.identity(QQ, 2) @ Mat.identity(GF(5), 2)


def test_solve_and_inconsistent():
    A = Mat.from_rows(QQ, [[1, 1], [1, -1]])
    assert solve_linear(A, [2, 0]) == (1, 1)
    assert solve_linear(Mat.from_rows(QQ, [[1, 1], [1, 1]]), [1, 2]) is None


def test_split_off_iso():
    f = Mat.from_rows(QQ, [[1, 0, 1], [0, 0, 0], [0, 1, 1]])
    s = split_off_iso(f)
    assert s.Y.cols == 2 and s.Z.cols == 1 and s.C.cols == 1
    assert (f @ s.Z).is_zero()
    assert s.B.hstack(s.C).rank() == 3


@given(matrices)
def test_rank_matches_naive_over_q(rows):
    assert Mat.from_rows(QQ, rows).rank() == naive_rank(rows)


@given(matrices, fields)
def test_rank_nullity(rows, F):
    A = Mat.from_rows(F, rows)
    K = A.kernel_basis()
    assert A.rank() + K.cols == A.cols
    assert (A @ K).is_zero()
    assert K.rank() == K.cols


@given(matrices, fields, st.lists(st.integers(-3, 3), min_size=6, max_size=6))
def test_solve_consistent_systems(rows, F, y):
    A = Mat.from_rows(F, rows)
    x0 = Mat.from_columns(F, [y[:A.cols]], A.cols)
    b = A @ x0
    x = A.solve(b)
    assert x is not None and A @ x == b


@given(matrices, fields)
def test_rref_idempotent(rows, F):
    A = Mat.from_rows(F, rows)
    R, piv = A.rref()
    R2, piv2 = R.rref()
    assert R == R2 and piv == piv2 and len(piv) == A.rank()


@given(st.integers(1, 5), fields, st.integers(0, 10 ** 6))
def test_inverse_roundtrip(n, F, seed):
    rng = np.random.default_rng(seed)
    A = Mat.from_rows(F, [[F.random_element(rng) for _ in range(n)] for _ in range(n)])
    if A.rank() < n:
        return
    assert A.inverse() @ A == Mat.identity(F, n)


@given(matrices, fields)
def test_sparse_matches_dense(rows, F):
    A = Mat.from_rows(F, rows)
    r, c = np.nonzero(A.a != 0)
    S = SparseMat(F, A.shape, r, c, [A.a[i, j] for i, j in zip(r, c)])
    assert S.to_dense() == A
    assert S.rank() == A.rank()
    K = S.kernel_basis()
    assert K.cols == A.cols - A.rank() and (A @ K).is_zero()


@given(st.integers(1, 8), st.integers(1, 8), st.sampled_from([2, 3, 7, 32003]), st.integers(0, 10 ** 6))
def test_compiled_kernel_agrees_with_fallback(r, c, p, seed):
    rng = np.random.default_rng(seed)
    arr = rng.integers(0, p, size=(r, c)).astype(np.int64)
    a1, a2 = arr.copy(), arr.copy()
    piv_py = list(_kernels_py.rref_modp(a1, p))
    if HAVE_EXTENSION:
        from htbgg import _kernels
        piv_c = list(_kernels.rref_modp(a2, p))
        assert piv_c == piv_py
        assert np.array_equal(a1, a2)
    assert len(piv_py) == rank(Mat(GF(p), arr.copy()))
