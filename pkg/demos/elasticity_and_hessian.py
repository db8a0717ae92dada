"""Elasticity complex and its rotation, the Hessian complex.

    python demos/elasticity_and_hessian.py
"""

from fecomplex2d.complexes import ComplexSpec, rotate_complex, verify_complex
from fecomplex2d.mesh import builtin

mesh = builtin("square-diagonal-1")

# P1 -> C1 scalars --Air--> symmetric H(div) --div--> vector L2
el = verify_complex(ComplexSpec("elasticity", 3, (0, -1), (-1, -1)), mesh)
print("elasticity dims", [3] + el.dims, "alternating sum", el.alternating_sum, "exact", el.exact)

# hess instead of Air, sym curl-free instead of div-free
he = rotate_complex(ComplexSpec("elasticity", 3, (0, -1), (-1, -1)), mesh)
print("hessian    dims", [3] + he.dims, "exact", he.exact)

he5 = rotate_complex(ComplexSpec("elasticity", 5, (0, -1), (0, 0)), mesh)
print("hessian k=5 r2=(0,0)", he5.dims, he5.exact)
