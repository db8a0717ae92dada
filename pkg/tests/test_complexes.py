from fractions import Fraction

import pytest

from fecomplex2d.complexes import (ComplexSpec, SpaceDef, assemble_chain, assemble_global, assemble_operator,
                                   build_chain, chain_verdict, check_poly_identity, derham_grid,
                                   derham_table_row, mutation_test, poly_identity, rotate_complex,
                                   verify_bubble_complex, verify_complex)
from fecomplex2d.elements import ElementSpec, dof_counts
from fecomplex2d.errors import InclusionError, ParameterError
from fecomplex2d.exact_linalg import RatMatrix, rank
from fecomplex2d.lattice import bubble_dim
from fecomplex2d.mesh import annulus_mesh, builtin, unit_square_mesh

SQUARE = builtin("square-diagonal-1")
MESHES = [SQUARE, builtin("square-crisscross-1"), builtin("square-diagonal-2")]

DERHAM_ROWS = [  # (k, r1, r2)
    (1, (-1, -1), (-1, -1)),
    (4, (1, 0), (0, -1)),
    (4, (1, 0), (0, 0)),
    (2, (0, -1), (-1, -1)),
    (4, (-1, -1), (0, 0)),
]


# ---------------------------------------------------------------- spaces

def test_global_dimensions():
    assert assemble_global(ElementSpec("scalar_smooth", 2, (0, 0)), SQUARE).dim == 9
    assert assemble_global(ElementSpec("vector_div", 4, (1, 0), (0, -1)), SQUARE).dim == 46
    assert assemble_global(ElementSpec("scalar_smooth", 3, (0, -1)), SQUARE).dim == 18


@pytest.mark.parametrize("mesh", MESHES)
@pytest.mark.parametrize("k,r1,r2", DERHAM_ROWS)
def test_dimension_closed_form(mesh, k, r1, r2):
    for spec in (ElementSpec("scalar_smooth", k + 1, (r1[0] + 1, r1[1] + 1)),
                 ElementSpec("vector_div", k, r1, r2), ElementSpec("scalar_smooth", k - 1, r2)):
        c0, c1, c2 = dof_counts(spec)
        want = c0 * mesh.n_vertices + c1 * mesh.n_edges + c2 * mesh.n_triangles
        assert assemble_global(spec, mesh).dim == want


# ---------------------------------------------------------------- operators

def test_standard_pair_ranks():
    v0 = assemble_global(ElementSpec("scalar_smooth", 2, (0, 0)), SQUARE)
    v1 = assemble_global(ElementSpec("vector_div", 1, (-1, -1), (-1, -1)), SQUARE)
    v2 = assemble_global(ElementSpec("scalar_smooth", 0, (-1, -1)), SQUARE)
    curl = assemble_operator(v0, v1, "curl")
    div = assemble_operator(v1, v2, "div")
    assert (v0.dim, v1.dim, v2.dim) == (9, 10, 2)
    assert curl.rank == 8 and div.rank == 2
    one = v0.interpolate(lambda g: __import__("fecomplex2d").elements.global_field("scalar", {(0, 0): 1}, g))
    assert not any(curl.matrix.apply(one))


def test_inclusion_failure_is_reported():
    # curl of continuous quadratics is not continuous at vertices
    v0 = assemble_global(ElementSpec("scalar_smooth", 2, (0, 0)), SQUARE)
    v1 = assemble_global(ElementSpec("vector_div", 2, (0, -1), (-1, -1)), SQUARE)
    with pytest.raises(InclusionError):
        assemble_operator(v0, v1, "curl")


@pytest.mark.parametrize("k,r1,r2", DERHAM_ROWS)
def test_inclusion_certificates(k, r1, r2):
    chain = build_chain(ComplexSpec("derham", k, r1, r2))
    spaces = [assemble_global(s, SQUARE) for s in chain.spaces]
    # assembling succeeds only when every shared target DoF is single valued
    for a, b, op in zip(spaces, spaces[1:], chain.ops):
        assert assemble_operator(a, b, op).matrix.shape == (b.dim, a.dim)


@pytest.mark.parametrize("k,r1,r2", [(4, (1, 0), (0, 0)), (4, (1, 0), (1, 0)), (6, (2, 0), (1, 0))])
def test_subspace_monotonicity(k, r1, r2):
    """A space with smoother divergence embeds into the one with minimal divergence smoothness."""
    low = (max(r1[0] - 1, -1), max(r1[1] - 1, -1))
    small = assemble_global(ElementSpec("vector_div", k, r1, r2), SQUARE)
    big = assemble_global(ElementSpec("vector_div", k, r1, low), SQUARE)
    emb = assemble_operator(small, big, "id")
    assert rank(emb.matrix) == small.dim < big.dim or small.dim == big.dim
    with pytest.raises(InclusionError):
        assemble_operator(big, small, "id")


# ---------------------------------------------------------------- verdicts

def test_standard_complex():
    v = verify_complex(ComplexSpec("derham", 1, (-1, -1), (-1, -1)), SQUARE)
    assert v.exact and v.dims == [9, 10, 2] and v.alternating_sum == 0
    assert v.warnings  # dim B_0(-1,-1) = 1 sits on the bound


def test_c1_vertex_derham_complex():
    v = verify_complex(ComplexSpec("derham", 4, (1, 0), (0, -1)), SQUARE)
    assert v.exact and v.dims == [29, 46, 18] and v.ranks == [28, 18]


def test_elasticity_complex():
    v = verify_complex(ComplexSpec("elasticity", 3, (0, -1), (-1, -1)), SQUARE)
    assert v.exact and v.dims == [29, 50, 24] and v.left_kernel_expected == 3
    assert 3 - 29 + 50 - 24 == v.alternating_sum == 0


@pytest.mark.parametrize("kind,k,r1,r2,r3", [
    ("derham", 4, (1, 0), (0, -1), None),
    ("derham", 2, (0, -1), (-1, -1), None),
    ("elasticity", 3, (0, -1), (-1, -1), None),
    ("divdiv_bdm_start", 3, (0, -1), (-1, -1), None),
    ("divdiv_relaxed", 3, (0, -1), (-1, -1), None),
    ("curldiv", 4, (1, 0), (1, 0), (-1, -1)),
])
def test_mesh_independence(kind, k, r1, r2, r3):
    verdicts = [verify_complex(ComplexSpec(kind, k, r1, r2, r3), m) for m in MESHES]
    assert all(v.exact for v in verdicts)
    assert all(v.is_complex for v in verdicts)


def test_curl_div_kernel_of_augmented_start():
    v = verify_complex(ComplexSpec("curldiv", 4, (1, 0), (1, 0), (-1, -1)), SQUARE)
    assert v.exact and len(v.dims) == 4 and v.kernel_dims[0] == 1
    assert v.spaces[0]["augmented_with_R"]


def test_divdiv_kernels_are_rt():
    for kind in ("divdiv_bdm_start", "divdiv_relaxed"):
        v = verify_complex(ComplexSpec(kind, 3, (0, -1), (-1, -1)), SQUARE)
        assert v.exact and v.kernel_dims[0] == 3


def test_continuous_divdiv_at_k5_is_rejected():
    with pytest.raises(ParameterError):
        verify_complex(ComplexSpec("divdiv_plus", 5, (1, 0), (0, 0)), SQUARE)


def test_not_simply_connected():
    v = verify_complex(ComplexSpec("derham", 1, (-1, -1), (-1, -1)), annulus_mesh())
    assert v.is_complex and v.exact is None
    assert v.betti_obstruction == 1
    assert v.euler_characteristic == 0


@pytest.mark.parametrize("k,r1,r2", [(1, (-1, -1), (-1, -1)), (2, (0, -1), (-1, -1)), (2, (0, -1), (0, 0)),
                                     (3, (0, -1), (-1, -1)), (4, (1, 0), (0, 0))])
def test_complex_property_universal(k, r1, r2):
    for mesh in (SQUARE, unit_square_mesh(1, "crisscross")):
        try:
            ac = assemble_chain(build_chain(ComplexSpec("derham", k, r1, r2)), mesh)
        except ParameterError:
            continue
        v = chain_verdict(ac.operators, ac.dims, len(ac.generators))
        assert v.checks["a_zero_compositions"]


# ---------------------------------------------------------------- rotation

@pytest.mark.parametrize("kind,k,r1,r2", [
    ("derham", 1, (-1, -1), (-1, -1)),
    ("derham", 4, (1, 0), (0, -1)),
    ("elasticity", 3, (0, -1), (-1, -1)),
    ("divdiv_bdm_start", 3, (0, -1), (-1, -1)),
])
def test_rotation_preserves_verdict(kind, k, r1, r2):
    cs = ComplexSpec(kind, k, r1, r2)
    a = verify_complex(cs, SQUARE)
    b = rotate_complex(cs, SQUARE)
    assert (a.dims, a.ranks, a.exact) == (b.dims, b.ranks, b.exact)


def test_hessian_complex():
    v = rotate_complex(ComplexSpec("elasticity", 5, (0, -1), (0, 0)), SQUARE)
    assert v.exact and v.spec.get("rotated")


def test_rotated_kind_matches_flag():
    cs = ComplexSpec("derham", 4, (1, 0), (0, -1))
    a = verify_complex(ComplexSpec("derham_rotated", 4, (1, 0), (0, -1)), SQUARE)
    assert a.exact and a.dims == rotate_complex(cs, SQUARE).dims


# ---------------------------------------------------------------- bubbles and identities

def test_bubble_complex_examples():
    v = verify_bubble_complex(4, (1, 0), (0, -1))
    assert v.dims == [0, 6, 7, 1] and v.alternating_sum == 0 and v.exact
    assert verify_bubble_complex(5, (1, 0), (0, -1)).alternating_sum == 0
    with pytest.raises(ParameterError):
        verify_bubble_complex(2, (1, 0), (1, 0))


@pytest.mark.parametrize("k,r1,r2", [(4, (1, 0), (0, -1)), (5, (1, 0), (0, -1)), (4, (1, 0), (0, 0)),
                                     (2, (0, -1), (-1, -1)), (4, (0, -1), (0, 0)), (6, (2, 0), (1, 0))])
def test_bubble_dimension_identity(k, r1, r2):
    v = verify_bubble_complex(k, r1, r2)
    assert v.dims[1] == bubble_dim(k - 1, r2) + bubble_dim(k + 1, (r1[0] + 1, r1[1] + 1)) - 1
    assert v.exact


def test_polynomial_identity():
    assert poly_identity(1) == 1 - 6 + 6 - 1 == 0
    assert poly_identity(10) == 0
    assert check_poly_identity(20)
    with pytest.raises(ParameterError):
        check_poly_identity(0)


def test_table_rows():
    assert derham_table_row(4, (1, 0), (0, -1)) == (1, -1, 1)
    grid = list(derham_grid(5))
    assert len(grid) > 20
    assert all(derham_table_row(k, r1, r2) == (1, -1, 1) for k, r1, r2 in grid)


# ---------------------------------------------------------------- dimension count logic

@pytest.mark.parametrize("cs", [ComplexSpec("derham", 4, (1, 0), (0, -1)),
                                ComplexSpec("elasticity", 3, (0, -1), (-1, -1))])
def test_mutation_flips_both(cs):
    out = mutation_test(cs, SQUARE)
    assert out["before"]["surjective"] and out["before"]["ker_equals_img"]
    assert not out["after"]["surjective"] and not out["after"]["ker_equals_img"]
    assert out["after"]["alternating_sum"] == 0 and out["flipped_together"]


def test_counting_argument_on_small_chains():
    """With matching left kernel and zero alternating sum, surjectivity and exactness agree."""
    d1 = RatMatrix.from_rows([[1, 0], [0, 0], [0, 0]])  # R^2 -> R^3, kernel dim 1
    d2 = RatMatrix.from_rows([[0, 1, 0], [0, 0, 1]])
    v = chain_verdict([d1, d2], [2, 3, 2], 1)
    assert v.checks["d_last_surjective"] and v.checks["c_ker_equals_img_1"] and v.exact
    d2_bad = RatMatrix.from_rows([[0, 1, 0], [0, 0, 0]])
    w = chain_verdict([d1, d2_bad], [2, 3, 2], 1)
    assert not w.checks["d_last_surjective"] and not w.checks["c_ker_equals_img_1"]
