from fractions import Fraction

import pytest

from fecomplex2d import bernstein as bz
from fecomplex2d.bernstein import REFERENCE_TRIANGLE, TriangleGeom
from fecomplex2d.elements import (TEST_TRIANGLES, ElementSpec, WeightFamily, build_dofs, check_unisolvence,
                                  determinant, dof_counts, dof_matrix, evaluate_dofs, generator_fields,
                                  validate, weight_count, weight_fields)
from fecomplex2d.errors import GeometryError, ParameterError
from fecomplex2d.exact_linalg import RatMatrix, complement_basis, multiply, nullspace, rank, solve
from fecomplex2d.lattice import SmoothnessPair, enumerate_lattice, geometric_decomposition

ALL_TRIANGLES = (REFERENCE_TRIANGLE,) + TEST_TRIANGLES


def min_k(family, r1, r2=(-1, -1)):
    for k in range(0, 16):
        try:
            validate(ElementSpec(family, k, r1, r2))
            return k
        except ParameterError:
            continue
    raise AssertionError("no admissible degree")


GRID = [
    ("scalar_smooth", (-1, -1), (-1, -1)),
    ("scalar_smooth", (0, -1), (-1, -1)),
    ("scalar_smooth", (0, 0), (-1, -1)),
    ("scalar_smooth", (1, 0), (-1, -1)),
    ("scalar_smooth", (2, 1), (-1, -1)),
    ("scalar_smooth", (3, 1), (-1, -1)),
    ("vector_div", (-1, -1), (-1, -1)),
    ("vector_div", (0, -1), (-1, -1)),
    ("vector_div", (1, 0), (0, -1)),
    ("vector_div", (1, 0), (0, 0)),
    ("vector_div", (1, 0), (1, 0)),
    ("vector_div", (-1, -1), (0, 0)),
    ("vector_div_tn", (-1, -1), (-1, -1)),
    ("vector_div_tn", (0, -1), (-1, -1)),
    ("vector_div_tn", (1, -1), (-1, -1)),
    ("sym_div", (0, -1), (-1, -1)),
    ("sym_div", (0, -1), (0, 0)),
    ("sym_div", (1, -1), (0, -1)),
    ("matrix_divdiv_plus", (1, 0), (0, 0)),
    ("matrix_divdiv_plus", (1, 0), (-1, -1)),
    ("sym_divdiv_plus", (0, -1), (-1, -1)),
    ("sym_divdiv_plus", (1, -1), (-1, -1)),
    ("sym_divdiv_plus", (2, 0), (0, 0)),
    ("sym_divdiv_relaxed", (0, -1), (-1, -1)),
    ("sym_divdiv_relaxed", (1, -1), (-1, -1)),
]


@pytest.mark.parametrize("family,r1,r2", GRID)
@pytest.mark.parametrize("extra", [0, 1])
def test_unisolvence_grid(family, r1, r2, extra):
    spec = ElementSpec(family, min_k(family, r1, r2) + extra, r1, r2)
    dofs = build_dofs(spec)
    assert len(dofs) == spec.space_dim
    for geom in ALL_TRIANGLES:
        v = check_unisolvence(dofs, geom)
        assert v.square and v.nonsingular, (spec, geom)


# ---------------------------------------------------------------- counts

def test_argyris_counts_and_labels():
    spec = ElementSpec("scalar", 5, (2, 1))
    assert dof_counts(spec) == (6, 1, 0)
    assert len(build_dofs(spec)) == 21


def test_vector_div_counts():
    assert dof_counts(ElementSpec("vector_div", 4, (1, 0), (0, -1))) == (6, 2, 6)


def test_bdm1_counts():
    dofs = build_dofs(ElementSpec("vector_div_tn", 1, (-1, -1)))
    assert dofs.counts() == (0, 2, 0) and len(dofs) == 6


def test_stenberg_tangential_moments_are_local():
    dofs = build_dofs(ElementSpec("vector_div_tn", 2, (0, -1)))
    tang = [d for d in dofs.functionals if d.label == "edge-tangential"]
    assert tang and not any(d.shared for d in tang)


def test_hu_zhang_counts():
    dofs = build_dofs(ElementSpec("sym_div", 3, (0, -1), (-1, -1)))
    labels = dofs.label_counts()
    assert len(dofs) == 30
    assert labels["vertex-jet"] == 9
    assert labels["edge-tau-n"] == 12
    assert labels["interior-div"] + labels.get("interior-air", 0) == 9


def test_divdiv_plus_k5_needs_bubble_bound():
    """The 63 functional set at k=5, r1=(1,0), r2=(0,0) is rejected: dim B_3(0,0) = 1 < 3."""
    spec = ElementSpec("sym_divdiv_plus", 5, (1, 0), (0, 0))
    assert spec.space_dim == 63
    with pytest.raises(ParameterError, match="B_3"):
        build_dofs(spec)


def test_broken_parameters_rejected():
    with pytest.raises(ParameterError):
        build_dofs(ElementSpec("scalar_smooth", 3, (2, 1)))
    with pytest.raises(ParameterError):
        ElementSpec("no_such_family", 3, (0, 0))
    with pytest.raises(GeometryError):
        TriangleGeom(((0, 0), (1, 0), (2, 0)))


# ---------------------------------------------------------------- structure

def test_scalar_block_triangularity():
    for k, r in [(5, (2, 1)), (9, (4, 2)), (6, (2, 0)), (7, (3, 1))]:
        spec = ElementSpec("scalar_smooth", k, r)
        dofs = build_dofs(spec)
        dec = geometric_decomposition(k, r)
        nodes = enumerate_lattice(k)
        col = {a: i for i, a in enumerate(nodes)}
        m = dof_matrix(dofs, TEST_TRIANGLES[0])
        for i, d in enumerate(dofs.functionals):
            if d.kind == "point":
                outside = [a for a in nodes if a not in dec.s0[(d.entity,)]]
            elif d.kind == "edge":
                e = [(0, 1), (0, 2), (1, 2)][d.entity]
                outside = list(dec.s2) + [a for f, part in dec.s1.items() if f != e for a in part]
            else:
                continue
            assert all(m.data[i][col[a]] == 0 for a in outside), d.describe()


def test_determinant_matches_rank():
    m = dof_matrix(build_dofs(ElementSpec("scalar_smooth", 3, (1, 0))), REFERENCE_TRIANGLE)
    assert determinant(m) != 0
    assert determinant(RatMatrix.from_rows([[1, 2], [2, 4]])) == 0
    assert determinant(RatMatrix.from_rows([[0, 1], [1, 0]])) == -1


def _rows_on(functionals, shape, k, geom):
    basis = bz.field_basis(shape, k)
    return RatMatrix.from_columns([evaluate_dofs(functionals, f, geom) for f in basis], rows=len(functionals))


@pytest.mark.parametrize("k,r1,r2", [(4, (1, 0), (0, -1)), (5, (1, 0), (0, 0)), (2, (0, -1), (-1, -1))])
def test_bubble_moments_replace_interior_block(k, r1, r2):
    """Moments against B^div_k span the same functionals on B^div_k as the div and curl moments."""
    geom = TEST_TRIANGLES[1]
    dofs = build_dofs(ElementSpec("vector_div", k, r1, r2))
    boundary = [d for d in dofs.functionals if d.kind != "interior"]
    interior = [d for d in dofs.functionals if d.kind == "interior"]
    ns = nullspace(_rows_on(boundary, "vector", k, geom))
    a = multiply(_rows_on(interior, "vector", k, geom), ns)
    # moments v -> int v . q for q running over the bubble basis
    qs = [bz.field_from_coeffs("vector", k, ns.column(j)) for j in range(ns.cols)]
    b_rows = []
    for q in qs:
        b_rows.append([bz.integrate(bz.inner(bz.field_from_coeffs("vector", k, ns.column(j)), q), geom)
                       for j in range(ns.cols)])
    b = RatMatrix.from_rows(b_rows, cols=ns.cols)
    assert rank(a) == rank(b) == rank(a.vstack(b)) == ns.cols


def test_relaxed_trace_determines_normal_div():
    """On each edge the n.div tau moments lie in the span of vertex values, t tau n and tr2 moments."""
    k, r1, r2 = 3, (0, -1), (-1, -1)
    geom = TEST_TRIANGLES[2]
    relaxed = build_dofs(ElementSpec("sym_divdiv_relaxed", k, r1, r2))
    plus = build_dofs(ElementSpec("sym_divdiv_plus", k, r1, r2))
    for e in range(3):
        base = [d for d in relaxed.functionals
                if d.kind == "point" or (d.entity == e and d.label in ("edge-ttn", "edge-tr2"))]
        ndiv = [d for d in plus.functionals if d.kind == "edge" and d.entity == e and d.label == "edge-n-div"]
        assert ndiv
        m_base = _rows_on(base, "sym", k, geom)
        m_all = m_base.vstack(_rows_on(ndiv, "sym", k, geom))
        assert rank(m_all) == rank(m_base)


def test_quotient_choice_does_not_change_the_annihilator():
    geom = TEST_TRIANGLES[0]
    fam = WeightFamily("bubble", 3, SmoothnessPair(0, -1), "R")
    base = weight_fields(WeightFamily("bubble", 3, SmoothnessPair(0, -1)), geom)
    chosen = weight_fields(fam, geom)
    assert len(chosen) == len(base) - 1 == weight_count(fam)
    gram = RatMatrix.from_rows([[bz.integrate(bz.inner(a, b), geom) for b in base] for a in base])
    gens = generator_fields("R", geom)
    rhs = RatMatrix.from_rows([[bz.integrate(bz.inner(a, g), geom) for g in gens] for a in base])
    proj = solve(gram, rhs)
    # a second complement, chosen greedily from the back
    n = len(base)
    rev = RatMatrix.from_rows(list(reversed(proj.data)))
    other = [n - 1 - i for i in complement_basis(rev, n)]

    def rows(ws):
        return [[bz.integrate(bz.inner(w, f), geom) for f in bz.field_basis("scalar", 3)] for w in ws]

    a = RatMatrix.from_rows(rows(chosen))
    b = RatMatrix.from_rows(rows([base[i] for i in other]))
    # the quotient is taken against the projection of the generator onto the weight span
    projected = base[0].scale(proj.data[0][0])
    for i in range(1, n):
        projected = projected + base[i].scale(proj.data[i][0])
    g = RatMatrix.from_rows(rows([projected]))
    assert rank(a.vstack(g)) == rank(b.vstack(g)) == rank(a.vstack(b).vstack(g))


def test_zero_dimensional_quotient_warns():
    with pytest.warns(UserWarning, match="zero dimensional"):
        from fecomplex2d.elements import _build_dofs_cached
        _build_dofs_cached.cache_clear()
        dofs = build_dofs(ElementSpec("sym_divdiv_plus", 3, (0, -1), (-1, -1)))
    assert dofs.warnings


def test_interpolation_reproduces_polynomials():
    geom = TEST_TRIANGLES[1]
    spec = ElementSpec("vector_div", 4, (1, 0), (0, -1))
    dofs = build_dofs(spec)
    m = dof_matrix(dofs, geom)
    u = bz.vector(bz.polynomial_in_xy({(2, 1): 3, (0, 0): 1}, geom, 4), bz.polynomial_in_xy({(1, 3): -1}, geom, 4))
    vals = evaluate_dofs(dofs.functionals, u, geom)
    coeffs = solve(m, RatMatrix.from_columns([vals]))
    assert [row[0] for row in coeffs.data] == bz.field_to_coeffs(u, 4)
