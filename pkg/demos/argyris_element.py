"""Build the Argyris element from smoothness parameters and check it is unisolvent.

    python demos/argyris_element.py
"""

from fractions import Fraction

from fecomplex2d.bernstein import REFERENCE_TRIANGLE
from fecomplex2d.elements import ElementSpec, TEST_TRIANGLES, build_dofs, check_unisolvence, determinant, dof_matrix
from fecomplex2d.lattice import geometric_decomposition

# C2 at vertices, C1 across edges, quintic.
spec = ElementSpec("scalar_smooth", 5, (2, 1))
dec = geometric_decomposition(5, (2, 1))
print("lattice split (vertex, edge, interior):", dec.counts())

dofs = build_dofs(spec)
print("per vertex / edge / triangle:", dofs.counts())
print("labels:", dofs.label_counts())

for name, tri in [("reference", REFERENCE_TRIANGLE)] + [(f"fixed {i}", t) for i, t in enumerate(TEST_TRIANGLES)]:
    v = check_unisolvence(dofs, tri)
    print(f"{name:10s} {v.rows}x{v.cols} rank {v.rank}", "nonsingular" if v.nonsingular else "SINGULAR")

# the determinant is an exact rational, no tolerance involved
det = determinant(dof_matrix(dofs, REFERENCE_TRIANGLE))
assert isinstance(det, Fraction) and det != 0
print("det on the reference triangle:", det)
