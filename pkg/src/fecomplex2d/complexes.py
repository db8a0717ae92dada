"""Global spaces, operator matrices and exactness verdicts on a mesh.

A global space is described by a :class:`SpaceDef`: an element, an optional
number of scalar copies (vector valued Lagrange type spaces) and a rotation
flag.  A rotated space holds fields ``w`` whose quarter turn ``R w`` (``R t R^T``
for matrices) lies in the unrotated space, so its functionals are ``l(R w)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

from . import bernstein as bz
from .bernstein import PolyField, TriangleGeom
from .elements import (ElementSpec, DoFSet, build_dofs, evaluate_dofs, generator_fields,
                       global_field, validate)
from .errors import InclusionError, ParameterError, ShapeError
from .exact_linalg import RatMatrix, invert, is_zero, multiply, nullspace, rank, solve
from .lattice import SmoothnessPair, as_pair, binom, bubble_dim, enumerate_lattice
from .mesh import Mesh


# ---------------------------------------------------------------- spaces

@dataclass(frozen=True)
class SpaceDef:
    spec: ElementSpec
    copies: int = 1
    rotated: bool = False

    def __post_init__(self):
        if self.copies != 1 and self.spec.family != "scalar_smooth":
            raise ShapeError("only scalar elements can be copied componentwise")
        if self.copies not in (1, 2):
            raise ShapeError("copies must be 1 or 2")

    @property
    def shape(self) -> str:
        return "vector" if self.copies == 2 else self.spec.shape

    @property
    def k(self) -> int:
        return self.spec.k

    def label(self) -> str:
        s = str(self.spec)
        if self.copies == 2:
            s += "^2"
        return "rot " + s if self.rotated else s

    def echo(self) -> dict:
        out = self.spec.echo()
        if self.copies != 1:
            out["copies"] = self.copies
        if self.rotated:
            out["rotated"] = True
        return out


@dataclass(frozen=True)
class _Slot:
    kind: str  # vertex | edge | cell
    entity: int  # local vertex or edge; 0 for cell slots
    pos: int


class LocalElement:
    """Functionals of a :class:`SpaceDef` on one triangle, with their slot in the global numbering."""

    def __init__(self, sd: SpaceDef):
        self.sd = sd
        self.dofs: DoFSet = build_dofs(sd.spec)
        funcs = self.dofs.functionals
        self.items = [(c, d) for d in funcs for c in range(sd.copies)]
        # regroup so that each entity block keeps (functional, component) order
        self.items.sort(key=lambda cd: funcs.index(cd[1]))
        counters: dict = {}
        slots = []
        for c, d in self.items:
            if d.kind == "point":
                key = ("vertex", d.entity)
            elif d.shared:
                key = ("edge", d.entity)
            else:
                key = ("cell", 0)
            n = counters.get(key, 0)
            counters[key] = n + 1
            slots.append(_Slot(key[0], key[1], n))
        self.slots = slots
        self.per_vertex = counters.get(("vertex", 0), 0)
        self.per_edge = counters.get(("edge", 0), 0)
        self.per_cell = counters.get(("cell", 0), 0)

    def __len__(self) -> int:
        return len(self.items)

    def evaluate(self, u: PolyField, geom: TriangleGeom) -> list[Fraction]:
        if self.sd.rotated:
            u = bz.rotate_field(u)
        if self.sd.copies == 1:
            return evaluate_dofs(self.dofs.functionals, u, geom)
        vals = [evaluate_dofs(self.dofs.functionals, bz.scalar(p), geom) for p in u.comps]
        index = {d: i for i, d in enumerate(self.dofs.functionals)}
        return [vals[c][index[d]] for c, d in self.items]

    def matrix(self, fields: Sequence[PolyField], geom: TriangleGeom) -> RatMatrix:
        return RatMatrix.from_columns([self.evaluate(f, geom) for f in fields], rows=len(self))


_local_cache: dict = {}


def local_element(sd: SpaceDef) -> LocalElement:
    hit = _local_cache.get(sd)
    if hit is None:
        hit = _local_cache[sd] = LocalElement(sd)
    return hit


def _shape_key(geom: TriangleGeom) -> TriangleGeom:
    """Translate so vertex 0 sits at the origin; every local quantity is translation invariant."""
    (x0, y0), p1, p2 = geom.vertices
    return TriangleGeom(((0, 0), (p1[0] - x0, p1[1] - y0), (p2[0] - x0, p2[1] - y0)))


_inverse_cache: dict = {}


def local_basis(sd: SpaceDef, geom: TriangleGeom) -> RatMatrix:
    """Bernstein coefficients (columns) of the local dual basis, cached per triangle shape."""
    g = _shape_key(geom)
    key = (sd, g.vertices)
    hit = _inverse_cache.get(key)
    if hit is None:
        le = local_element(sd)
        hit = invert(le.matrix(bz.field_basis(sd.shape, sd.k), g))
        _inverse_cache[key] = hit
    return hit


@dataclass
class GlobalSpace:
    """Finite element space on a mesh with deterministic global numbering.

    Vertex blocks come first, then shared edge blocks, then the per triangle
    block (local edge functionals and interior moments).
    """

    sd: SpaceDef
    mesh: Mesh
    local: LocalElement = field(init=False, repr=False)
    maps: list[list[int]] = field(init=False, repr=False)

    def __post_init__(self):
        self.local = local_element(self.sd)
        le, m = self.local, self.mesh
        ov = 0
        oe = m.n_vertices * le.per_vertex
        oc = oe + m.n_edges * le.per_edge
        self.maps = []
        for c, tri in enumerate(m.triangles):
            idx = []
            for s in le.slots:
                if s.kind == "vertex":
                    idx.append(ov + tri[s.entity] * le.per_vertex + s.pos)
                elif s.kind == "edge":
                    idx.append(oe + m.cell_edges[c][s.entity] * le.per_edge + s.pos)
                else:
                    idx.append(oc + c * le.per_cell + s.pos)
            self.maps.append(idx)

    @property
    def dim(self) -> int:
        le, m = self.local, self.mesh
        return m.n_vertices * le.per_vertex + m.n_edges * le.per_edge + m.n_triangles * le.per_cell

    def counts(self) -> dict:
        le = self.local
        return {"per_vertex": le.per_vertex, "per_edge": le.per_edge, "per_triangle": le.per_cell}

    def owners(self) -> dict[int, list[int]]:
        """Triangles touching the entity that carries each global DoF."""
        out: dict[int, list[int]] = {}
        for c, idx in enumerate(self.maps):
            for g in idx:
                out.setdefault(g, []).append(c)
        return out

    def interpolate(self, u_of_geom) -> list[Fraction]:
        """DoF vector of a field given per triangle by ``u_of_geom(geom)``; raises if not single valued."""
        vals: dict[int, Fraction] = {}
        for c, idx in enumerate(self.maps):
            geom = self.mesh.geometry(c)
            u = u_of_geom(geom)
            if u.degree < self.sd.k:
                u = PolyField(u.shape, tuple(p.elevate(self.sd.k) for p in u.comps))
            for g, v in zip(idx, self.local.evaluate(u, geom)):
                old = vals.setdefault(g, v)
                if old != v:
                    raise InclusionError(f"field is not single valued at DoF {g} of {self.sd.label()}")
        return [vals.get(i, Fraction(0)) for i in range(self.dim)]

    def describe(self) -> dict:
        return {"space": self.sd.echo(), "dim": self.dim, **self.counts()}


def assemble_global(spec: ElementSpec | SpaceDef, mesh: Mesh) -> GlobalSpace:
    sd = spec if isinstance(spec, SpaceDef) else SpaceDef(spec)
    validate(sd.spec)
    return GlobalSpace(sd, mesh)


# ---------------------------------------------------------------- operators

def _curl_div(u: PolyField, geom: TriangleGeom) -> PolyField:
    return bz.curl(bz.div(u, geom), geom)


def _identity(u: PolyField, geom: TriangleGeom) -> PolyField:
    return u


_LOCAL_OPS = {"curl_div": _curl_div, "id": _identity}
_ORDER = {"grad": 1, "curl": 1, "rot": 1, "div": 1, "grad_vector": 1, "hess": 2, "air": 2,
          "sym_curl": 1, "sym_grad": 1, "divdiv": 2, "rotrot": 2, "curl_div": 2, "id": 0}


def apply_op(name: str, u: PolyField, geom: TriangleGeom) -> PolyField:
    if name in _LOCAL_OPS:
        return _LOCAL_OPS[name](u, geom)
    return bz.apply_operator(name, u, geom)


@dataclass
class OperatorMatrix:
    src: GlobalSpace
    dst: GlobalSpace
    op: str
    matrix: RatMatrix

    @property
    def rank(self) -> int:
        return rank(self.matrix)


_transfer_cache: dict = {}


def _transfer(src: SpaceDef, dst: SpaceDef, op: str, geom: TriangleGeom) -> RatMatrix:
    """Local matrix: dst functionals applied to ``op`` of the src dual basis."""
    g = _shape_key(geom)
    key = (src, dst, op, g.vertices)
    hit = _transfer_cache.get(key)
    if hit is not None:
        return hit
    images = [apply_op(op, f, g) for f in bz.field_basis(src.shape, src.k)]
    if images and (images[0].shape != dst.shape or images[0].degree != dst.k):
        shape = images[0].shape
        if shape == "matrix" and dst.shape == "sym":
            raise ShapeError(f"{op} produces non symmetric fields")
        if images[0].degree > dst.k or shape != dst.shape:
            raise ShapeError(f"{op} maps {src.label()} to {shape} degree {images[0].degree}, "
                             f"not into {dst.label()}")
        images = [PolyField(u.shape, tuple(p.elevate(dst.k) for p in u.comps)) for u in images]
    e = local_element(dst).matrix(images, g)
    hit = multiply(e, local_basis(src, g))
    _transfer_cache[key] = hit
    return hit


def assemble_operator(src: GlobalSpace, dst: GlobalSpace, op: str) -> OperatorMatrix:
    """Exact matrix of ``op`` in the DoF coordinates; certifies ``op(src)`` lies in ``dst``.

    Each shared target DoF is computed on every triangle around its entity;
    the values must agree (zero where the source function is not supported),
    otherwise the image leaves the target space and :class:`InclusionError` is raised.
    """
    if src.mesh is not dst.mesh:
        raise ShapeError("spaces live on different meshes")
    contrib: dict[int, dict[int, dict[int, Fraction]]] = {}
    for c in range(src.mesh.n_triangles):
        w = _transfer(src.sd, dst.sd, op, src.mesh.geometry(c))
        rmap, cmap = dst.maps[c], src.maps[c]
        for i, gr in enumerate(rmap):
            row = w.data[i]
            slot = contrib.setdefault(gr, {})
            for j, gc in enumerate(cmap):
                if row[j]:
                    slot.setdefault(gc, {})[c] = row[j]
    owners = dst.owners()
    data = [[Fraction(0)] * src.dim for _ in range(dst.dim)]
    for gr, cols in contrib.items():
        tris = owners[gr]
        for gc, per in cols.items():
            vals = {per.get(t, Fraction(0)) for t in tris}
            if len(vals) != 1:
                raise InclusionError(
                    f"{op} of source DoF {gc} of {src.sd.label()} is not single valued "
                    f"at target DoF {gr} of {dst.sd.label()}")
            data[gr][gc] = vals.pop()
    return OperatorMatrix(src, dst, op, RatMatrix(dst.dim, src.dim, data))


# ---------------------------------------------------------------- complexes

KINDS = ("derham", "derham_rotated", "bubble", "curldiv", "elasticity", "divdiv_plus",
         "divdiv_bdm_start", "divdiv_relaxed")

_ROTATED_OP = {"curl": "grad", "div": "rot", "air": "hess", "sym_curl": "sym_grad", "divdiv": "rotrot"}


@dataclass(frozen=True)
class ComplexSpec:
    kind: str
    k: int
    r1: SmoothnessPair
    r2: SmoothnessPair = SmoothnessPair(-1, -1)
    r3: SmoothnessPair | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown complex kind {self.kind!r}")
        object.__setattr__(self, "r1", as_pair(self.r1))
        object.__setattr__(self, "r2", as_pair(self.r2))
        if self.r3 is not None:
            object.__setattr__(self, "r3", as_pair(self.r3))

    @property
    def r0(self) -> SmoothnessPair:
        return self.r1.shift(1)

    def echo(self) -> dict:
        out = {"kind": self.kind, "k": self.k, "r0": list(self.r0.as_tuple()),
               "r1": list(self.r1.as_tuple()), "r2": list(self.r2.as_tuple())}
        if self.r3 is not None:
            out["r3"] = list(self.r3.as_tuple())
        return out


@dataclass(frozen=True)
class Chain:
    """Spaces ``V_0 .. V_n`` joined by ``ops``; ``generators`` span the expected kernel of the first map."""

    spaces: tuple[SpaceDef, ...]
    ops: tuple[str, ...]
    generators: str
    augmented: bool = False  # V_0 x R with the extra map c -> c x


def _scalar(k, r, copies=1, rotated=False) -> SpaceDef:
    return SpaceDef(ElementSpec("scalar_smooth", k, r), copies, rotated)


def _need(cond: bool, text: str) -> None:
    if not cond:
        raise ParameterError(text)


def build_chain(cs: ComplexSpec) -> Chain:
    """Spaces and operators of the complex named by ``cs.kind`` (parameter hypotheses are checked)."""
    k, r1, r2 = cs.k, cs.r1, cs.r2
    kind = cs.kind
    if kind in ("derham", "derham_rotated"):
        _need(r1.rv >= 2 * r1.re + 1, f"r1={r1} violates r1^v >= 2 r1^e + 1")
        spaces = (_scalar(k + 1, cs.r0), SpaceDef(ElementSpec("vector_div", k, r1, r2)), _scalar(k - 1, r2))
        chain = Chain(spaces, ("curl", "div"), "R")
        return rotate_chain(chain) if kind == "derham_rotated" else chain
    if kind == "elasticity":
        _need(r1.rv >= 2 * r1.re + 2, f"r1={r1} violates r1^v >= 2 r1^e + 2")
        spaces = (_scalar(k + 2, r1.shift(2)), SpaceDef(ElementSpec("sym_div", k, r1, r2)),
                  _scalar(k - 1, r2, copies=2))
        return Chain(spaces, ("air", "div"), "P1")
    if kind == "curldiv":
        r3 = cs.r3 if cs.r3 is not None else SmoothnessPair(-1, -1)
        _need(r2.dominates(r1.shift(-1).floor(0)), f"r2={r2} violates r2 >= max(r1 - 1, 0)")
        _need(r3.dominates(r2.shift(-2).floor(-1)), f"r3={r3} violates r3 >= max(r2 - 2, -1)")
        _need(r3.rv >= 2 * r3.re, f"r3={r3} violates r3^v >= 2 r3^e")
        kmin = max(2 * r1.rv + 2, 2 * r2.rv + 2, 2 * r3.rv + 4, 3)
        _need(k >= kmin, f"k={k} violates k >= {kmin}")
        _need(bubble_dim(k - 3, r3) >= 1 if k >= 3 else False, f"dim B_{k - 3}{r3} = 0")
        spaces = (_scalar(k + 1, cs.r0), SpaceDef(ElementSpec("vector_div", k, r1, r2)),
                  SpaceDef(ElementSpec("vector_div", k - 2, r2.shift(-1), r3)), _scalar(k - 3, r3))
        return Chain(spaces, ("curl", "curl_div", "div"), "R", augmented=True)
    if kind == "divdiv_plus":
        spaces = (_scalar(k + 1, r1.shift(1), copies=2), SpaceDef(ElementSpec("sym_divdiv_plus", k, r1, r2)),
                  _scalar(k - 2, r2))
        return Chain(spaces, ("sym_curl", "divdiv"), "RT")
    if kind in ("divdiv_bdm_start", "divdiv_relaxed"):
        _need(r1.re == -1 and r1.rv >= 0, f"{kind} needs r1 = (r1^v, -1) with r1^v >= 0, got {r1}")
        top = SmoothnessPair(r1.rv + 1, 0)
        if kind == "divdiv_bdm_start":
            first = SpaceDef(ElementSpec("vector_div", k + 1, top, SmoothnessPair(r1.rv, 0)))
            mid = SpaceDef(ElementSpec("sym_divdiv_plus", k, r1, r2))
        else:
            first = _scalar(k + 1, top, copies=2)
            mid = SpaceDef(ElementSpec("sym_divdiv_relaxed", k, r1, r2))
        return Chain((first, mid, _scalar(k - 2, r2)), ("sym_curl", "divdiv"), "RT")
    raise ParameterError(f"{kind} is verified with verify_bubble_complex")


def rotate_chain(chain: Chain) -> Chain:
    """Conjugate every field by the quarter turn; curl/div become grad/rot and so on."""
    if chain.augmented:
        raise ParameterError("the augmented curl-div chain has no rotated form here")
    try:
        ops = tuple(_ROTATED_OP[o] for o in chain.ops)
    except KeyError as exc:
        raise ParameterError(f"operator {exc} has no rotated counterpart") from None
    spaces = tuple(replace(s, rotated=s.shape != "scalar") for s in chain.spaces)
    return Chain(spaces, ops, chain.generators + "_rotated")


def _generator_terms(name: str):
    rotated = name.endswith("_rotated")
    base = name.removesuffix("_rotated")

    def fields(geom: TriangleGeom) -> list[PolyField]:
        gens = generator_fields(base, geom)
        if rotated:
            # the rotated space holds R^{-1} = -R of the original generators; spans agree
            gens = [bz.rotate_field(g) for g in gens]
        return gens

    return fields


# ---------------------------------------------------------------- verdicts

@dataclass
class ExactnessVerdict:
    spec: dict
    spaces: list[dict]
    dims: list[int]
    ranks: list[int]
    kernel_dims: list[int]
    left_kernel_expected: int
    alternating_sum: int
    euler_characteristic: int
    checks: dict[str, bool]
    is_complex: bool
    exact: bool | None
    betti_obstruction: int | None = None
    notes: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        if self.exact is None:
            return self.is_complex
        return self.exact

    def failed_checks(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v]

    def as_dict(self) -> dict:
        return {
            "spec": self.spec,
            "spaces": self.spaces,
            "dims": self.dims,
            "ranks": self.ranks,
            "kernel_dims": self.kernel_dims,
            "left_kernel_expected": self.left_kernel_expected,
            "alternating_sum": self.alternating_sum,
            "euler_characteristic": self.euler_characteristic,
            "checks": dict(sorted(self.checks.items())),
            "is_complex": self.is_complex,
            "exact": self.exact,
            "betti_obstruction": self.betti_obstruction,
            "notes": list(self.notes),
            "warnings": list(self.warnings),
        }


def chain_verdict(mats: Sequence[RatMatrix], dims: Sequence[int], generator_dim: int,
                  generators_in_kernel: bool = True, chi: int = 1, spec: dict | None = None,
                  spaces: list[dict] | None = None) -> ExactnessVerdict:
    """Dimension count verdict for ``gens -> V_0 -> ... -> V_n -> 0`` from the operator matrices."""
    ranks = [rank(m) for m in mats]
    kernels = [d - r for d, r in zip(dims[:-1], ranks)]
    checks: dict[str, bool] = {}
    composed = all(is_zero(multiply(b, a)) for a, b in zip(mats, mats[1:]))
    checks["a_zero_compositions"] = composed
    checks["b_first_kernel"] = kernels[0] == generator_dim and generators_in_kernel
    for i in range(1, len(mats)):
        checks[f"c_ker_equals_img_{i}"] = ranks[i - 1] == kernels[i]
    checks["d_last_surjective"] = ranks[-1] == dims[-1]
    alt = generator_dim + sum((-1) ** (i + 1) * d for i, d in enumerate(dims))
    checks["e_alternating_sum"] = alt == 0
    notes = []
    betti = None
    exact: bool | None = all(checks.values())
    if chi != 1:
        exact = None
        betti = kernels[1] - ranks[0] if len(mats) > 1 else 0
        notes.append(f"mesh is not simply connected (chi={chi}); only the complex property is asserted")
    return ExactnessVerdict(spec or {}, spaces or [], list(dims), ranks, kernels, generator_dim, alt,
                            chi, checks, composed, exact, betti, notes)


@dataclass
class AssembledChain:
    chain: Chain
    spaces: list[GlobalSpace]
    operators: list[RatMatrix]
    generators: list[list[Fraction]]  # DoF vectors in V_0 (plus the R slot when augmented)

    @property
    def dims(self) -> list[int]:
        d = [s.dim for s in self.spaces]
        if self.chain.augmented:
            d[0] += 1
        return d


def assemble_chain(chain: Chain, mesh: Mesh) -> AssembledChain:
    spaces = [assemble_global(sd, mesh) for sd in chain.spaces]
    mats = [assemble_operator(a, b, op).matrix for a, b, op in zip(spaces, spaces[1:], chain.ops)]
    gens_of = _generator_terms(chain.generators)
    count = len(gens_of(mesh.geometry(0)))
    gvecs = [spaces[0].interpolate(lambda g, i=i: gens_of(g)[i]) for i in range(count)]
    if chain.augmented:
        x = spaces[1].interpolate(lambda g: global_field("vector", ({(1, 0): 1}, {(0, 1): 1}), g))
        first = mats[0]
        mats[0] = RatMatrix(first.rows, first.cols + 1,
                            [row + [xv] for row, xv in zip(first.data, x)])
        gvecs = [v + [Fraction(0)] for v in gvecs]
    return AssembledChain(chain, spaces, mats, gvecs)


def _boundary_warnings(cs: ComplexSpec) -> list[str]:
    out = []
    if cs.kind in ("derham", "derham_rotated") and bubble_dim(cs.k - 1, cs.r2) == 1:
        out.append(f"dim B_{cs.k - 1}{cs.r2} = 1 sits exactly on the bound dim B_(k-1)(r2) >= 1")
    return out


def verify_complex(cs: ComplexSpec, mesh: Mesh, rotated: bool = False) -> ExactnessVerdict:
    """Build every space and operator of ``cs`` on ``mesh`` and decide exactness by ranks."""
    chain = build_chain(cs)
    if rotated:
        chain = rotate_chain(chain)
    return verify_chain(chain, mesh, cs)


def verify_chain(chain: Chain, mesh: Mesh, cs: ComplexSpec | None = None) -> ExactnessVerdict:
    ac = assemble_chain(chain, mesh)
    in_kernel = all(not any(ac.operators[0].apply(g)) for g in ac.generators)
    spec = cs.echo() if cs is not None else {}
    if chain.spaces[0].rotated or chain.ops[0] in _ROTATED_OP.values():
        spec = {**spec, "rotated": True}
    spaces = [s.describe() for s in ac.spaces]
    if chain.augmented:
        spaces[0]["augmented_with_R"] = True
    v = chain_verdict(ac.operators, ac.dims, len(ac.generators), in_kernel,
                      mesh.euler_characteristic(), spec, spaces)
    v.spec["mesh"] = mesh.info()
    if cs is not None:
        v.warnings.extend(_boundary_warnings(cs))
    return v


def rotate_complex(cs: ComplexSpec, mesh: Mesh) -> ExactnessVerdict:
    """Verdict of the rotated chain (grad/rot, hess/rot, sym grad/rotrot)."""
    return verify_complex(cs, mesh, rotated=True)


def mutate_last_interior(ac: AssembledChain) -> list[RatMatrix]:
    """Operators with one interior DoF row of the last space zeroed (dimensions unchanged)."""
    last = ac.spaces[-1]
    rows = [i for i in sorted(set(ac.spaces[-1].maps[0])) if _is_cell_dof(last, i)]
    if not rows:
        raise ParameterError("the last space has no interior DoF to delete")
    r = rows[-1]
    m = ac.operators[-1]
    data = [list(row) for row in m.data]
    data[r] = [Fraction(0)] * m.cols
    return list(ac.operators[:-1]) + [RatMatrix(m.rows, m.cols, data)]


def _is_cell_dof(space: GlobalSpace, g: int) -> bool:
    m, le = space.mesh, space.local
    return g >= m.n_vertices * le.per_vertex + m.n_edges * le.per_edge


def mutation_test(cs: ComplexSpec, mesh: Mesh) -> dict:
    """Counting argument check: a zeroed interior row must flip surjectivity and ker = img together."""
    ac = assemble_chain(build_chain(cs), mesh)
    base = chain_verdict(ac.operators, ac.dims, len(ac.generators))
    mutated = chain_verdict(mutate_last_interior(ac), ac.dims, len(ac.generators))
    n = len(ac.operators) - 1
    key = f"c_ker_equals_img_{n}"
    return {
        "spec": cs.echo(),
        "before": {"surjective": base.checks["d_last_surjective"], "ker_equals_img": base.checks[key],
                   "alternating_sum": base.alternating_sum},
        "after": {"surjective": mutated.checks["d_last_surjective"], "ker_equals_img": mutated.checks[key],
                  "alternating_sum": mutated.alternating_sum},
        "flipped_together": (base.checks["d_last_surjective"] != mutated.checks["d_last_surjective"]
                             and base.checks[key] != mutated.checks[key]),
    }


# ---------------------------------------------------------------- bubble complex

def verify_bubble_complex(k: int, r1, r2) -> ExactnessVerdict:
    """Single triangle chain ``B_(k+1)(r1+1) -> B^div_k -> B_(k-1)(r2) -> R`` (mean value last)."""
    r1, r2 = as_pair(r1), as_pair(r2)
    if bubble_dim(k - 1, r2) < 1 if k >= 1 else True:
        raise ParameterError(f"dim B_{k - 1}{r2} = 0 violates dim B_(k-1)(r2) >= 1")
    spec = ElementSpec("vector_div", k, r1, r2)
    dofs = build_dofs(spec)
    geom = bz.REFERENCE_TRIANGLE
    r0 = r1.shift(1)
    b0 = _bubble_nodes_checked(k + 1, r0)
    b2 = _bubble_nodes_checked(k - 1, r2)
    boundary = [d for d in dofs.functionals if d.kind != "interior"]
    basis = bz.field_basis("vector", k)
    bmat = RatMatrix.from_columns([evaluate_dofs(boundary, f, geom) for f in basis], rows=len(boundary))
    ns = nullspace(bmat)  # columns: coefficient vectors of B^div_k
    # curl: B_(k+1)(r0) -> coefficients in P_k^2, then coordinates in the kernel basis
    curls = []
    for a in b0:
        u = bz.curl(bz.scalar(bz.BernsteinPoly.monomial(a)), geom)
        curls.append(bz.field_to_coeffs(u, k))
    cmat = RatMatrix.from_columns(curls, rows=2 * binom(k + 2, 2)) if curls else RatMatrix(ns.rows, 0)
    if cmat.cols:
        if not is_zero(multiply(bmat, cmat)):
            raise InclusionError("curl of a bubble has nonzero boundary DoFs")
        d1 = solve_columns(ns, cmat)
    else:
        d1 = RatMatrix(ns.cols, 0)
    index = {a: i for i, a in enumerate(enumerate_lattice(k - 1))}
    inside = set(b2)
    d2_cols = []
    for j in range(ns.cols):
        u = bz.field_from_coeffs("vector", k, ns.column(j))
        (p,) = bz.div(u, geom).comps
        for a, c in zip(enumerate_lattice(k - 1), p.coeffs):
            if c and a not in inside:
                raise InclusionError("div of a div bubble leaves B_(k-1)(r2)")
        d2_cols.append([p.coeffs[index[a]] for a in b2])
    d2 = RatMatrix.from_columns(d2_cols, rows=len(b2))
    mean = [bz.integrate(bz.BernsteinPoly.monomial(a), geom) for a in b2]
    d3 = RatMatrix.from_rows([mean], cols=len(b2))
    dims = [len(b0), ns.cols, len(b2), 1]
    v = chain_verdict([d1, d2, d3], dims, 0, True, 1,
                      {"kind": "bubble", "k": k, "r0": list(r0.as_tuple()), "r1": list(r1.as_tuple()),
                       "r2": list(r2.as_tuple())},
                      [{"space": "B_k+1(r0)", "dim": dims[0]}, {"space": "B^div_k(r1,r2)", "dim": dims[1]},
                       {"space": "B_k-1(r2)", "dim": dims[2]}, {"space": "R", "dim": 1}])
    v.checks["bubble_dimension_identity"] = dims[1] == dims[2] + dims[0] - 1
    v.exact = all(v.checks.values())
    return v


def _bubble_nodes_checked(m: int, r: SmoothnessPair):
    from .elements import _bubble_nodes
    return _bubble_nodes(m, r)


def solve_columns(basis: RatMatrix, vectors: RatMatrix) -> RatMatrix:
    """Coordinates ``X`` with ``basis X = vectors`` for a full column rank ``basis``."""
    gram = multiply(basis.transpose(), basis)
    x = solve(gram, multiply(basis.transpose(), vectors))
    if multiply(basis, x) != vectors:
        raise InclusionError("vectors are not in the span of the basis")
    return x


# ---------------------------------------------------------------- identities

def poly_identity(k: int) -> int:
    return 1 - binom(k + 3, 2) + 2 * binom(k + 2, 2) - binom(k + 1, 2)


def derham_table_row(k: int, r1, r2) -> tuple[int, int, int]:
    """Per entity alternating sums ``C_0j - C_1j + C_2j`` for vertices, edges, triangles."""
    r1, r2 = as_pair(r1), as_pair(r2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        c0 = build_dofs(ElementSpec("scalar_smooth", k + 1, r1.shift(1))).counts()
        c1 = build_dofs(ElementSpec("vector_div", k, r1, r2)).counts()
        c2 = build_dofs(ElementSpec("scalar_smooth", k - 1, r2)).counts()
    return tuple(a - b + c for a, b, c in zip(c0, c1, c2))


def derham_grid(k_max: int = 6, rv_max: int = 2):
    """Admissible de Rham parameters with ``k <= k_max`` and small smoothness."""
    for k in range(1, k_max + 1):
        for r1v in range(-1, rv_max + 1):
            for r1e in range(-1, (r1v - 1) // 2 + 1):
                r1 = SmoothnessPair(r1v, r1e)
                for r2v in range(-1, rv_max + 1):
                    for r2e in range(-1, r2v // 2 + 1):
                        r2 = SmoothnessPair(r2v, r2e)
                        try:
                            validate(ElementSpec("vector_div", k, r1, r2))
                        except ParameterError:
                            continue
                        yield k, r1, r2


def check_poly_identity(k_max: int, table_k_max: int = 0) -> bool:
    """Polynomial de Rham identity for ``k <= k_max`` and optionally the per entity table rows."""
    if k_max < 1:
        raise ParameterError("k_max must be at least 1")
    if any(poly_identity(k) != 0 for k in range(1, k_max + 1)):
        return False
    if table_k_max:
        return all(derham_table_row(k, r1, r2) == (1, -1, 1) for k, r1, r2 in derham_grid(table_k_max))
    return True


def clear_caches() -> None:
    """Drop every memoized local quantity (used to check that results do not depend on cache state)."""
    from . import elements, lattice
    _local_cache.clear()
    _inverse_cache.clear()
    _transfer_cache.clear()
    for mod in (bz, elements, lattice):
        for obj in vars(mod).values():
            if callable(getattr(obj, "cache_clear", None)):
                obj.cache_clear()


__all__ = [
    "SpaceDef", "GlobalSpace", "OperatorMatrix", "ComplexSpec", "Chain", "ExactnessVerdict",
    "AssembledChain", "KINDS", "assemble_global", "assemble_operator", "assemble_chain", "build_chain",
    "rotate_chain", "verify_complex", "verify_chain", "rotate_complex", "chain_verdict",
    "verify_bubble_complex", "mutation_test", "mutate_last_interior", "check_poly_identity",
    "poly_identity", "derham_table_row", "derham_grid", "local_basis", "local_element",
    "clear_caches",
]
