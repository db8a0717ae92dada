"""De Rham complex with C1 vertex continuity on the two triangle square.

Space dims should read 29/46/18, curl kernel 1 (constants) and div onto.

    python demos/smooth_derham.py
"""

from fecomplex2d.complexes import ComplexSpec, mutation_test, verify_complex
from fecomplex2d.mesh import builtin

mesh = builtin("square-diagonal-1")
cs = ComplexSpec("derham", 4, (1, 0), (0, -1))
v = verify_complex(cs, mesh)

for s in v.spaces:
    print(s["space"]["family"], s["space"]["k"], s["space"]["r1"], "dim", s["dim"])
print("ranks", v.ranks, "kernels", v.kernel_dims)
for name, ok in sorted(v.checks.items()):
    print(f"  {name:22s} {ok}")
print("exact:", v.exact)

# Kill one interior functional of the last space: the counting argument says
# surjectivity and ker = img must fail together.
m = mutation_test(cs, mesh)
print("after mutation:", m["after"])

# Same chain on finer meshes
for name in ("square-crisscross-1", "square-diagonal-2"):
    w = verify_complex(cs, builtin(name))
    print(name, w.dims, w.exact)
