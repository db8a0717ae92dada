from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from fecomplex2d.errors import DependentColumnsError, ShapeError, SingularMatrix
from fecomplex2d.exact_linalg import (RatMatrix, as_fraction, bareiss_echelon, complement_basis,
                                      integer_rows, invert, is_zero, multiply, nullity, nullspace,
                                      rank, rref, solve)


def naive_rank(rows):
    """Textbook elimination over Fraction; the oracle for every rank test."""
    a = [[Fraction(x) for x in r] for r in rows]
    if not a:
        return 0
    r = 0
    for c in range(len(a[0])):
        p = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c] / a[r][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        r += 1
    return r


fractions = st.builds(Fraction, st.integers(-6, 6), st.integers(1, 4))


@st.composite
def matrices(draw, max_dim=12):
    m = draw(st.integers(0, max_dim))
    n = draw(st.integers(0, max_dim))
    # sparse entries make rank deficiency common
    entry = st.one_of(st.just(Fraction(0)), st.just(Fraction(0)), fractions)
    return RatMatrix.from_rows([[draw(entry) for _ in range(n)] for _ in range(m)], cols=n)


@st.composite
def square(draw, n_max=6):
    n = draw(st.integers(1, n_max))
    return RatMatrix.from_rows([[draw(fractions) for _ in range(n)] for _ in range(n)])


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_rank_matches_naive_oracle(m):
    assert rank(m) == naive_rank(m.data)


@settings(max_examples=100, deadline=None)
@given(matrices())
def test_rank_of_transpose(m):
    assert rank(m) == rank(m.transpose())


@settings(max_examples=100, deadline=None)
@given(matrices(8))
def test_nullspace_is_kernel_of_full_size(m):
    ns = nullspace(m)
    assert ns.cols == nullity(m) == m.cols - rank(m)
    assert is_zero(multiply(m, ns))
    assert rank(ns) == ns.cols


@settings(max_examples=100, deadline=None)
@given(square())
def test_inverse_or_singular(m):
    if rank(m) == m.rows:
        assert multiply(invert(m), m) == RatMatrix.identity(m.rows)
        assert multiply(m, invert(m)) == RatMatrix.identity(m.rows)
    else:
        with pytest.raises(SingularMatrix):
            invert(m)


@settings(max_examples=60, deadline=None)
@given(square(), st.integers(1, 3), st.data())
def test_solve_reproduces_rhs(m, k, data):
    if rank(m) < m.rows:
        return
    b = RatMatrix.from_rows([[data.draw(fractions) for _ in range(k)] for _ in range(m.rows)])
    assert multiply(m, solve(m, b)) == b


@settings(max_examples=100, deadline=None)
@given(matrices(7))
def test_complement_completes_a_basis(m):
    if rank(m) < m.cols:
        with pytest.raises(DependentColumnsError):
            complement_basis(m, m.rows)
        return
    keep = complement_basis(m, m.rows)
    assert len(keep) == m.rows - m.cols
    ident = RatMatrix.identity(m.rows)
    full = m.hstack(ident.select_columns(keep))
    assert rank(full) == m.rows


def test_rref_and_pivots():
    m = RatMatrix.from_rows([[1, 2, 3], [2, 4, 6], [0, 1, 1]])
    rows, piv = rref(m)
    assert piv == [0, 1]
    assert rows[0] == [1, 0, 1] and rows[1] == [0, 1, 1]


def test_bareiss_keeps_integers():
    rows = integer_rows(RatMatrix.from_rows([["1/2", "1/3"], ["1/4", "1/6"]]))
    assert all(isinstance(x, int) for r in rows for x in r)
    r, piv, _ = bareiss_echelon(rows)
    assert r == 1 and piv == [0]


def test_as_fraction_rejects_floats():
    assert as_fraction("3/9") == Fraction(1, 3)
    with pytest.raises(TypeError):
        as_fraction(0.5)


def test_shape_errors():
    with pytest.raises(ShapeError):
        multiply(RatMatrix(2, 3), RatMatrix(2, 3))
    with pytest.raises(ShapeError):
        RatMatrix(2, 2, [[Fraction(1)]])
