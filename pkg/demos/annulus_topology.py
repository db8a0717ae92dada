"""Why simple connectivity matters: the standard complex on a square with a hole.

    python demos/annulus_topology.py
"""

from fecomplex2d.complexes import ComplexSpec, verify_complex
from fecomplex2d.mesh import annulus_mesh, builtin

for mesh, name in ((builtin("square-diagonal-2"), "square"), (annulus_mesh(), "annulus")):
    info = mesh.info()
    v = verify_complex(ComplexSpec("derham", 1, (-1, -1), (-1, -1)), mesh)
    print(f"{name}: V={info['vertices']} E={info['edges']} T={info['triangles']} chi={info['euler_characteristic']}")
    print("   is complex", v.is_complex, "exact", v.exact, "betti obstruction", v.betti_obstruction)
# On the annulus the curl-free part of div-free fields is one dimension larger than curl of
# potentials: exactness is not expected there, only d o d = 0.
