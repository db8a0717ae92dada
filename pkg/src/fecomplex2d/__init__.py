"""Exact rational smooth finite elements and finite element complexes in two dimensions."""

from .bernstein import BernsteinPoly, PolyField, TriangleGeom, REFERENCE_TRIANGLE
from .complexes import (ComplexSpec, ExactnessVerdict, GlobalSpace, assemble_global, assemble_operator,
                        check_poly_identity, rotate_complex, verify_bubble_complex, verify_complex)
from .elements import ElementSpec, build_dofs, check_unisolvence, dof_counts
from .errors import (FecError, GeometryError, InclusionError, ParameterError, ParseError, QuotientError,
                     ShapeError, SingularMatrix, TopologyError)
from .exact_linalg import RatMatrix, complement_basis, nullspace, rank
from .lattice import SmoothnessPair, geometric_decomposition
from .mesh import Mesh, load, unit_square_mesh

__version__ = "0.1.0"

__all__ = [
    "BernsteinPoly", "PolyField", "TriangleGeom", "REFERENCE_TRIANGLE", "ComplexSpec", "ExactnessVerdict",
    "GlobalSpace", "assemble_global", "assemble_operator", "check_poly_identity", "rotate_complex",
    "verify_bubble_complex", "verify_complex", "ElementSpec", "build_dofs", "check_unisolvence",
    "dof_counts", "FecError", "GeometryError", "InclusionError", "ParameterError", "ParseError",
    "QuotientError", "ShapeError", "SingularMatrix", "TopologyError", "RatMatrix", "complement_basis",
    "nullspace", "rank", "SmoothnessPair", "geometric_decomposition", "Mesh", "load", "unit_square_mesh",
]
