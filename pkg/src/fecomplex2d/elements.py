"""Degree of freedom families and local unisolvence.

Every family is described by an :class:`ElementSpec`.  :func:`build_dofs`
turns it into an ordered :class:`DoFSet` of geometry free functional
descriptors.  The descriptors become numbers only when evaluated on a
:class:`~fecomplex2d.bernstein.PolyField` over a concrete triangle, so the
same set serves the reference triangle, random triangles and every cell of a
mesh.

Ordering inside a set: the three vertex blocks, then the three edge blocks
(edges ``(0,1), (0,2), (1,2)``), then the interior block.  Inside a block the
functionals follow the order in which the family lists them.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Sequence

from . import bernstein as bz
from .bernstein import BernsteinPoly, PolyField, TriangleGeom
from .errors import ParameterError, QuotientError, ShapeError
from .exact_linalg import RatMatrix, complement_basis, integer_rows, rank, solve
from .lattice import EDGES, SmoothnessPair, as_pair, bubble_set, check_smoothness, enumerate_lattice

FAMILIES = (
    "scalar_smooth",
    "vector_div",
    "vector_div_tn",
    "sym_div",
    "matrix_divdiv_plus",
    "sym_divdiv_plus",
    "sym_divdiv_relaxed",
)

FAMILY_ALIASES = {
    "scalar": "scalar_smooth",
    "div": "vector_div",
    "div_tn": "vector_div_tn",
    "divS": "sym_div",
    "divdiv_plus": "sym_divdiv_plus",
    "divdiv": "sym_divdiv_relaxed",
}

FAMILY_SHAPE = {
    "scalar_smooth": "scalar",
    "vector_div": "vector",
    "vector_div_tn": "vector",
    "sym_div": "sym",
    "matrix_divdiv_plus": "matrix",
    "sym_divdiv_plus": "sym",
    "sym_divdiv_relaxed": "sym",
}

# ---------------------------------------------------------------- specs


@dataclass(frozen=True)
class ElementSpec:
    """Family, degree and smoothness vectors of a finite element.

    ``r2`` is ignored by ``scalar_smooth`` and ``vector_div_tn``.
    """

    family: str
    k: int
    r1: SmoothnessPair
    r2: SmoothnessPair = SmoothnessPair(-1, -1)

    def __post_init__(self):
        object.__setattr__(self, "family", FAMILY_ALIASES.get(self.family, self.family))
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown element family {self.family!r}")
        object.__setattr__(self, "r1", as_pair(self.r1))
        object.__setattr__(self, "r2", as_pair(self.r2))

    @property
    def shape(self) -> str:
        return FAMILY_SHAPE[self.family]

    @property
    def space_dim(self) -> int:
        return bz.field_dim(self.shape, self.k)

    def echo(self) -> dict:
        out = {"family": self.family, "k": self.k, "r1": list(self.r1.as_tuple())}
        if self.family not in ("scalar_smooth", "vector_div_tn"):
            out["r2"] = list(self.r2.as_tuple())
        return out

    def __str__(self) -> str:
        if self.family in ("scalar_smooth", "vector_div_tn"):
            return f"{self.family}(k={self.k}, r={self.r1})"
        return f"{self.family}(k={self.k}, r1={self.r1}, r2={self.r2})"


def _need(cond: bool, text: str) -> None:
    if not cond:
        raise ParameterError(text)


def validate(spec: ElementSpec) -> None:
    """Raise :class:`ParameterError` naming the first violated inequality."""
    f, k, r1, r2 = spec.family, spec.k, spec.r1, spec.r2
    if f == "scalar_smooth":
        check_smoothness(k, r1)
        return
    if f == "vector_div_tn":
        _need(r1.re == -1, f"vector_div_tn needs r1^e = -1, got {r1.re}")
        _need(r1.rv >= -1, f"r1^v={r1.rv} violates r1^v >= -1")
        _need(k >= max(2 * r1.rv + 2, 1), f"k={k} violates k >= max(2 r1^v + 2, 1)")
        return
    _need(r1.rv >= -1 and r1.re >= -1, f"r1={r1} violates r1 >= -1")
    if f in ("vector_div", "sym_div"):
        lo = r1.shift(-1).floor(-1)
        _need(r2.dominates(lo), f"r2={r2} violates r2 >= max(r1 - 1, -1) = {lo}")
        gap = 1 if f == "vector_div" else 2
        _need(r1.rv >= 2 * r1.re + gap, f"r1={r1} violates r1^v >= 2 r1^e + {gap}")
        _need(r2.rv >= 2 * r2.re, f"r2={r2} violates r2^v >= 2 r2^e")
        if f == "vector_div":
            kmin = max(2 * r1.rv + 2, 2 * r2.rv + 2, 1)
            _need(k >= kmin, f"k={k} violates k >= max(2 r1^v + 2, 2 r2^v + 2, 1) = {kmin}")
            _need(_bubble_dim(k - 1, r2) >= 1, f"dim B_{k - 1}{r2} = 0 violates dim B_(k-1)(r2) >= 1")
        else:
            kmin = max(2 * r1.rv + 3, 2 * r2.rv + 2)
            _need(k >= kmin, f"k={k} violates k >= max(2 r1^v + 3, 2 r2^v + 2) = {kmin}")
            _need(2 * _bubble_dim(k - 1, r2) >= 3,
                  f"dim B_{k - 1}{r2}^2 < 3 violates dim B_(k-1)(r2; R^2) >= 3")
        return
    # divdiv families
    if f == "sym_divdiv_relaxed":
        _need(r1.re == -1 and r1.rv >= 0, f"sym_divdiv_relaxed needs r1 = (r1^v, -1) with r1^v >= 0, got {r1}")
    elif f == "sym_divdiv_plus":
        _need(r1.rv >= 0 and r1.re >= -1, f"r1={r1} violates r1^v >= 0")
    else:
        _need(r1.rv >= 0 and r1.re >= 0, f"r1={r1} violates r1 >= 0")
        _need(r1.rv >= 2 * r1.re + 1, f"r1={r1} violates r1^v >= 2 r1^e + 1")
    lo = r1.shift(-2).floor(-1)
    _need(r2.dominates(lo), f"r2={r2} violates r2 >= max(r1 - 2, -1) = {lo}")
    _need(r2.rv >= 2 * r2.re, f"r2={r2} violates r2^v >= 2 r2^e")
    kmin = max(2 * r1.rv + 3, 2 * r2.rv + 3)
    _need(k >= kmin, f"k={k} violates k >= max(2 r1^v + 3, 2 r2^v + 3) = {kmin}")
    _need(_bubble_dim(k - 2, r2) >= 3, f"dim B_{k - 2}{r2} = {_bubble_dim(k - 2, r2)} violates dim B_(k-2)(r2) >= 3")
    if f == "sym_divdiv_plus" and r1.re >= 0:
        _need(r1.rv >= 2 * r1.re + 2,
              f"r1={r1} violates r1^v >= 2 r1^e + 2 (needed for Air B_(k+2)(r1+2))")


def _bubble_dim(k: int, r: SmoothnessPair) -> int:
    if k < 0:
        return 0
    try:
        return len(bubble_set(k, r))
    except ParameterError:
        return 0


# ---------------------------------------------------------------- functionals


@dataclass(frozen=True)
class Quantity:
    """A scalar derived from a field: apply ``op`` then select with ``sel``.

    ``op`` is one of ``id``, ``div``, ``divdiv``.  ``sel`` is one of
    ``("comp", c)``, ``("dot", d)``, ``("vec", d, c)`` (row ``c`` of a matrix
    applied to ``d``), ``("quad", u, w)`` for ``u^T tau w`` and ``("tr2",)``.
    Directions are ``"n"`` or ``"t"`` of the edge in context.
    """

    op: str
    sel: tuple

    def tag(self) -> str:
        s = self.sel
        if s[0] == "comp":
            base = f"c{s[1]}"
        elif s[0] == "dot":
            base = f"dot_{s[1]}"
        elif s[0] == "vec":
            base = f"{s[1]}{s[2]}"
        elif s[0] == "quad":
            base = f"{s[1]}{s[2]}"
        else:
            base = "tr2"
        return base if self.op == "id" else f"{self.op}.{base}"


@dataclass(frozen=True)
class WeightFamily:
    """Interior weight fields: a bubble based family, optionally modulo generators."""

    kind: str  # bubble | vbubble | curl_bubble | air_bubble | curl_vbubble
    degree: int
    r: SmoothnessPair
    quotient: str | None = None  # R | P1 | RM | xperp

    def tag(self) -> str:
        base = f"{self.kind}_{self.degree}{self.r}"
        return base if self.quotient is None else f"{base}/{self.quotient}"


@dataclass(frozen=True)
class DoFunctional:
    """One degree of freedom.

    ``kind`` is ``point`` (Cartesian derivative at a vertex), ``edge`` (moment
    of a normal derivative against a 1D Bernstein weight) or ``interior``
    (moment of ``op(field)`` against a weight field).  ``entity`` is the local
    vertex or edge index; interior functionals use 0.
    """

    kind: str
    entity: int
    label: str
    shared: bool
    quantity: Quantity | None = None
    beta: tuple[int, int] = (0, 0)
    normal_order: int = 0
    weight_degree: int = 0
    weight_index: int = 0
    op: str = "id"
    weight: WeightFamily | None = None

    def describe(self) -> str:
        if self.kind == "point":
            return f"v{self.entity}:{self.label}:D{self.beta}{self.quantity.tag()}"
        if self.kind == "edge":
            return (f"e{self.entity}:{self.label}:dn^{self.normal_order}{self.quantity.tag()}"
                    f"*P{self.weight_degree}[{self.weight_index}]")
        return f"T:{self.label}:{self.op}*{self.weight.tag()}[{self.weight_index}]"


@dataclass(frozen=True)
class DoFSet:
    spec: ElementSpec
    functionals: tuple[DoFunctional, ...]
    warnings: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.functionals)

    def vertex_block(self, v: int) -> list[int]:
        return [i for i, d in enumerate(self.functionals) if d.kind == "point" and d.entity == v]

    def edge_block(self, e: int, shared: bool = True) -> list[int]:
        return [i for i, d in enumerate(self.functionals)
                if d.kind == "edge" and d.entity == e and d.shared == shared]

    def local_block(self) -> list[int]:
        return [i for i, d in enumerate(self.functionals) if not d.shared]

    def counts(self) -> tuple[int, int, int]:
        """(per vertex, per edge, per triangle) with non shared edge DoFs counted per triangle."""
        return (len(self.vertex_block(0)), len(self.edge_block(0)), len(self.local_block()))

    def label_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for d in self.functionals:
            out[d.label] = out.get(d.label, 0) + 1
        return out


# ---------------------------------------------------------------- family builders

def _betas(i: int) -> list[tuple[int, int]]:
    return [(i - j, j) for j in range(i + 1)]


class _Builder:
    def __init__(self):
        self.vertex: list[tuple] = []  # (label, quantity, beta)
        self.edge: list[tuple] = []  # (label, quantity, normal order, degree, shared)
        self.interior: list[tuple] = []  # (label, op, WeightFamily)

    def jet(self, label: str, op: str, ncomp: int, orders) -> None:
        for i in orders:
            for beta in _betas(i):
                for c in range(ncomp):
                    self.vertex.append((label, Quantity(op, ("comp", c)), beta))

    def moments(self, label: str, quantities: Sequence[Quantity], order: int, degree: int,
                shared: bool = True) -> None:
        if degree < 0:
            return
        for q in quantities:
            self.edge.append((label, q, order, degree, shared))

    def interior_moments(self, label: str, op: str, family: WeightFamily) -> None:
        self.interior.append((label, op, family))


_ID = "id"


def _q(op, *sel) -> Quantity:
    return Quantity(op, tuple(sel))


def _scalar_smooth(b: _Builder, k: int, r: SmoothnessPair) -> None:
    b.jet("vertex-jet", _ID, 1, range(r.rv + 1))
    for i in range(r.re + 1):
        b.moments("edge-normal-derivative", [_q(_ID, "comp", 0)], i, k - 2 * (r.rv + 1) + i)
    b.interior_moments("interior", _ID, WeightFamily("bubble", k, r))


def _vector_div(b: _Builder, k: int, r1: SmoothnessPair, r2: SmoothnessPair) -> None:
    b.jet("vertex-jet", _ID, 2, range(r1.rv + 1))
    b.jet("vertex-div-jet", "div", 1, range(max(r1.rv, 0), r2.rv + 1))
    b.moments("edge-normal", [_q(_ID, "dot", "n")], 0, k - 2 * (r1.rv + 1))
    for i in range(r1.re + 1):
        b.moments("edge-tangential", [_q(_ID, "dot", "t")], i, k - 2 * (r1.rv + 1) + i)
    for i in range(r2.re + 1):
        b.moments("edge-div", [_q("div", "comp", 0)], i, k - 1 - 2 * (r2.rv + 1) + i)
    b.interior_moments("interior-div", "div", WeightFamily("bubble", k - 1, r2, "R"))
    b.interior_moments("interior-curl", _ID, WeightFamily("curl_bubble", k + 1, r1.shift(1)))


def _vector_div_tn(b: _Builder, k: int, r1: SmoothnessPair) -> None:
    b.jet("vertex-jet", _ID, 2, range(r1.rv + 1))
    b.moments("edge-normal", [_q(_ID, "dot", "n")], 0, k - 2 * (r1.rv + 1))
    b.moments("edge-tangential", [_q(_ID, "dot", "t")], 0, k - 2 * (max(r1.rv, 0) + 1), shared=False)
    b.interior_moments("interior", _ID, WeightFamily("vbubble", k, SmoothnessPair(max(r1.rv, 0), 0)))


def _sym_div(b: _Builder, k: int, r1: SmoothnessPair, r2: SmoothnessPair) -> None:
    b.jet("vertex-jet", _ID, 3, range(r1.rv + 1))
    b.jet("vertex-div-jet", "div", 2, range(max(r1.rv, 0), r2.rv + 1))
    b.moments("edge-tau-n", [_q(_ID, "vec", "n", 0), _q(_ID, "vec", "n", 1)], 0, k - 2 * (r1.rv + 1))
    for i in range(r1.re + 1):
        b.moments("edge-ttt", [_q(_ID, "quad", "t", "t")], i, k - 2 * (r1.rv + 1) + i)
    for i in range(r2.re + 1):
        b.moments("edge-div", [_q("div", "comp", 0), _q("div", "comp", 1)], i,
                  k - 1 - 2 * (r2.rv + 1) + i)
    b.interior_moments("interior-div", "div", WeightFamily("vbubble", k - 1, r2, "RM"))
    b.interior_moments("interior-air", _ID, WeightFamily("air_bubble", k + 2, r1.shift(2)))


def _divdiv_common(b: _Builder, k: int, r1: SmoothnessPair, r2: SmoothnessPair, ncomp: int,
                   relaxed: bool = False) -> None:
    b.jet("vertex-jet", _ID, ncomp, range(r1.rv + 1))
    b.jet("vertex-divdiv-jet", "divdiv", 1, range(max(r1.rv - 1, 0), r2.rv + 1))
    m = k - 2 * (r1.rv + 1)
    if relaxed:
        b.moments("edge-ntn", [_q(_ID, "quad", "n", "n")], 0, m)
        b.moments("edge-ttn", [_q(_ID, "quad", "t", "n")], 0, m, shared=False)
        b.moments("edge-tr2", [_q(_ID, "tr2")], 0, k - 1 - 2 * r1.rv)
    else:
        b.moments("edge-tau-n", [_q(_ID, "vec", "n", 0), _q(_ID, "vec", "n", 1)], 0, m)
        for i in range(r1.re + 1):
            if ncomp == 4:
                qs = [_q(_ID, "vec", "t", 0), _q(_ID, "vec", "t", 1)]
            else:
                qs = [_q(_ID, "quad", "t", "t")]
            b.moments("edge-tau-t", qs, i, m + i)
        b.moments("edge-n-div", [_q("div", "dot", "n")], 0, k - 1 - 2 * r1.rv)
        for i in range(r1.re):
            b.moments("edge-t-div", [_q("div", "dot", "t")], i, k - 1 - 2 * r1.rv + i)
    for i in range(r2.re + 1):
        b.moments("edge-divdiv", [_q("divdiv", "comp", 0)], i, k - 2 * (r2.rv + 2) + i)


def _matrix_divdiv_plus(b: _Builder, k: int, r1: SmoothnessPair, r2: SmoothnessPair) -> None:
    _divdiv_common(b, k, r1, r2, 4)
    b.interior_moments("interior-div", "div", WeightFamily("curl_bubble", k, r1))
    b.interior_moments("interior-divdiv", "divdiv", WeightFamily("bubble", k - 2, r2, "P1"))
    b.interior_moments("interior-curl", _ID, WeightFamily("curl_vbubble", k + 1, r1.shift(1)))


def _sym_divdiv(b: _Builder, k: int, r1: SmoothnessPair, r2: SmoothnessPair, relaxed: bool) -> None:
    _divdiv_common(b, k, r1, r2, 3, relaxed)
    rb = SmoothnessPair(r1.rv, max(r1.re, 0))
    b.interior_moments("interior-div", "div", WeightFamily("curl_bubble", k, rb, "xperp"))
    b.interior_moments("interior-divdiv", "divdiv", WeightFamily("bubble", k - 2, r2, "P1"))
    b.interior_moments("interior-air", _ID, WeightFamily("air_bubble", k + 2, r1.shift(2)))


def _builder_for(spec: ElementSpec) -> _Builder:
    b = _Builder()
    f, k, r1, r2 = spec.family, spec.k, spec.r1, spec.r2
    if f == "scalar_smooth":
        _scalar_smooth(b, k, r1)
    elif f == "vector_div":
        _vector_div(b, k, r1, r2)
    elif f == "vector_div_tn":
        _vector_div_tn(b, k, r1)
    elif f == "sym_div":
        _sym_div(b, k, r1, r2)
    elif f == "matrix_divdiv_plus":
        _matrix_divdiv_plus(b, k, r1, r2)
    elif f == "sym_divdiv_plus":
        _sym_divdiv(b, k, r1, r2, relaxed=False)
    else:
        _sym_divdiv(b, k, r1, r2, relaxed=True)
    return b


def build_dofs(spec: ElementSpec, check: bool = True) -> DoFSet:
    """Ordered functionals of ``spec``; parameters are validated first."""
    if check:
        validate(spec)
    return _build_dofs_cached(spec)


@lru_cache(maxsize=None)
def _build_dofs_cached(spec: ElementSpec) -> DoFSet:
    b = _builder_for(spec)
    notes = []
    out: list[DoFunctional] = []
    for v in range(3):
        for label, q, beta in b.vertex:
            out.append(DoFunctional("point", v, label, True, q, beta=beta))
    for e in range(3):
        for label, q, order, degree, shared in b.edge:
            for j in range(degree + 1):
                out.append(DoFunctional("edge", e, label, shared, q, normal_order=order,
                                        weight_degree=degree, weight_index=j))
    for label, op, fam in b.interior:
        n = weight_count(fam)
        if n == 0 and fam.quotient == "P1":
            notes.append(f"quotient {fam.tag()} is zero dimensional")
        for j in range(n):
            out.append(DoFunctional("interior", 0, label, False, op=op, weight=fam, weight_index=j))
    for note in notes:
        warnings.warn(note, stacklevel=3)
    return DoFSet(spec, tuple(out), tuple(notes))


def dof_counts(spec: ElementSpec) -> tuple[int, int, int]:
    """Shared DoFs per vertex, shared DoFs per edge, local DoFs per triangle."""
    return build_dofs(spec).counts()


# fixed non degenerate rational triangles used by the unisolvence campaigns
TEST_TRIANGLES = (
    TriangleGeom(((0, 0), (3, 1), (Fraction(1, 2), 2))),
    TriangleGeom(((-1, Fraction(1, 3)), (2, -1), (Fraction(5, 4), Fraction(7, 2)))),
    TriangleGeom(((2, 2), (Fraction(-3, 2), 1), (Fraction(1, 5), -2))),
)

# ---------------------------------------------------------------- weights

_GENERATORS = {
    "R": ("scalar", [{(0, 0): 1}]),
    "P1": ("scalar", [{(0, 0): 1}, {(1, 0): 1}, {(0, 1): 1}]),
    "RM": ("vector", [({(0, 0): 1}, {}), ({}, {(0, 0): 1}), ({(0, 1): -1}, {(1, 0): 1})]),
    "xperp": ("vector", [({(0, 1): 1}, {(1, 0): -1})]),
}

_RT_TERMS = [({(0, 0): 1}, {}), ({}, {(0, 0): 1}), ({(1, 0): 1}, {(0, 1): 1})]


def generator_fields(name: str, geom: TriangleGeom) -> list[PolyField]:
    """Hardcoded kernel and quotient generators as fields on ``geom``."""
    if name == "RT":
        shape, terms = "vector", _RT_TERMS
    else:
        shape, terms = _GENERATORS[name]
    return [global_field(shape, t, geom) for t in terms]


def global_field(shape: str, terms, geom: TriangleGeom, k: int | None = None) -> PolyField:
    """Field whose components are global polynomials ``{(i, j): c}`` in ``x, y``."""
    if shape == "scalar":
        terms = (terms,)
    polys = [bz.polynomial_in_xy(t, geom) for t in terms]
    deg = max(p.degree for p in polys) if k is None else k
    return PolyField(shape, tuple(p.elevate(deg) for p in polys))


def _bubble_nodes(m: int, r: SmoothnessPair):
    if m < 0:
        return ()
    try:
        return bubble_set(m, r)
    except ParameterError:
        return ()


def _base_weights(fam: WeightFamily, geom: TriangleGeom) -> list[PolyField]:
    nodes = _bubble_nodes(fam.degree, fam.r)
    mono = [BernsteinPoly.monomial(a) for a in nodes]
    if fam.kind == "bubble":
        return [bz.scalar(p) for p in mono]
    if fam.kind == "vbubble":
        out = []
        for c in (0, 1):
            for p in mono:
                z = BernsteinPoly.zero(p.degree)
                out.append(bz.vector(p, z) if c == 0 else bz.vector(z, p))
        return out
    if fam.kind == "curl_bubble":
        return [bz.curl(bz.scalar(p), geom) for p in mono]
    if fam.kind == "air_bubble":
        return [bz.air(bz.scalar(p), geom) for p in mono]
    if fam.kind == "curl_vbubble":
        out = []
        for c in (0, 1):
            for p in mono:
                z = BernsteinPoly.zero(p.degree)
                v = bz.vector(p, z) if c == 0 else bz.vector(z, p)
                out.append(bz.curl(v, geom))
        return out
    raise ShapeError(f"unknown weight family {fam.kind!r}")


def _integral(u: PolyField, v: PolyField, geom: TriangleGeom) -> Fraction:
    return bz.integrate(bz.inner(u, v), geom)


_weight_cache: dict = {}


def weight_fields(fam: WeightFamily, geom: TriangleGeom) -> tuple[PolyField, ...]:
    """Weight basis of ``fam`` on ``geom``; quotients keep a complement of the projected generators."""
    key = (fam, geom.vertices)
    hit = _weight_cache.get(key)
    if hit is not None:
        return hit
    base = _base_weights(fam, geom)
    if fam.quotient is None or not base:
        out = tuple(base)
    else:
        gens = generator_fields(fam.quotient, geom)
        if gens[0].shape != base[0].shape:
            raise QuotientError(f"generators {fam.quotient} do not match the weight shape")
        n = len(base)
        gram = RatMatrix.from_rows([[_integral(a, b, geom) for b in base] for a in base])
        rhs = RatMatrix.from_rows([[_integral(a, g, geom) for g in gens] for a in base])
        try:
            proj = solve(gram, rhs)
        except ArithmeticError as exc:
            raise QuotientError(f"weights of {fam.tag()} are dependent") from exc
        if rank(proj) < len(gens):
            raise QuotientError(
                f"generators {fam.quotient} project to a rank {rank(proj)} subspace of {fam.tag()}")
        keep = complement_basis(proj, n)
        out = tuple(base[i] for i in keep)
    if len(_weight_cache) > 20000:
        _weight_cache.clear()
    _weight_cache[key] = out
    return out


@lru_cache(maxsize=None)
def weight_count(fam: WeightFamily) -> int:
    """Number of weights; the reference triangle fixes it for every affine image."""
    return len(weight_fields(fam, bz.REFERENCE_TRIANGLE))


# ---------------------------------------------------------------- evaluation

class _FieldCache:
    """Memoises derived quantities of one field on one triangle."""

    def __init__(self, u: PolyField, geom: TriangleGeom):
        self.u = u
        self.geom = geom
        self.ops: dict[str, PolyField] = {"id": u}
        self.scalars: dict = {}
        self.jets: dict = {}
        self.traces: dict = {}

    def op(self, name: str) -> PolyField:
        f = self.ops.get(name)
        if f is None:
            if name == "div":
                f = bz.div(self.u, self.geom)
            elif name == "divdiv":
                f = bz.div(self.op("div"), self.geom)
            else:
                raise ShapeError(f"unknown operator {name!r}")
            self.ops[name] = f
        return f

    def scalar(self, q: Quantity, e: int | None) -> BernsteinPoly:
        key = (q, e)
        hit = self.scalars.get(key)
        if hit is not None:
            return hit
        g = self.op(q.op)
        geom = self.geom
        sel = q.sel
        if sel[0] == "comp":
            p = g.comps[sel[1]]
        else:
            a, b = EDGES[e]
            dirs = {"t": geom.edge_tangent(a, b), "n": geom.edge_normal(a, b)}
            if sel[0] == "dot":
                d = dirs[sel[1]]
                p = g.comps[0].scale(d[0]) + g.comps[1].scale(d[1])
            elif sel[0] == "vec":
                d = dirs[sel[1]]
                c = sel[2]
                p = g.entry(c, 0).scale(d[0]) + g.entry(c, 1).scale(d[1])
            elif sel[0] == "quad":
                p = _quad(g, dirs[sel[1]], dirs[sel[2]])
            elif sel[0] == "tr2":
                t, n = dirs["t"], dirs["n"]
                tn = _quad(g, t, n)
                dv = self.op("div")
                # |t|^2 balances the scaling of the unnormalised t and n in both terms
                tt = t[0] * t[0] + t[1] * t[1]
                p = bz.directional_derivative(tn, geom, t) + (dv.comps[0].scale(tt * n[0])
                                                             + dv.comps[1].scale(tt * n[1]))
            else:
                raise ShapeError(f"unknown selector {sel!r}")
        self.scalars[key] = p
        return p

    def jet(self, q: Quantity, beta: tuple[int, int]) -> BernsteinPoly:
        key = (q, beta)
        hit = self.jets.get(key)
        if hit is not None:
            return hit
        if beta == (0, 0):
            p = self.scalar(q, None)
        elif beta[0] > 0:
            p = bz.partial(self.jet(q, (beta[0] - 1, beta[1])), self.geom, 0)
        else:
            p = bz.partial(self.jet(q, (0, beta[1] - 1)), self.geom, 1)
        self.jets[key] = p
        return p

    def trace(self, q: Quantity, e: int, order: int) -> tuple[Fraction, ...]:
        key = (q, e, order)
        hit = self.traces.get(key)
        if hit is not None:
            return hit
        p = self.scalar(q, e)
        a, b = EDGES[e]
        n = self.geom.edge_normal(a, b)
        for _ in range(order):
            p = bz.directional_derivative(p, self.geom, n)
        t = bz.edge_trace(p, a, b)
        self.traces[key] = t
        return t


def _quad(g: PolyField, u, w) -> BernsteinPoly:
    total = None
    for i in (0, 1):
        for j in (0, 1):
            c = u[i] * w[j]
            if c:
                t = g.entry(i, j).scale(c)
                total = t if total is None else total + t
    return total if total is not None else BernsteinPoly.zero(g.degree)


_moment_cache: dict = {}


def _moment_rows(fam: WeightFamily, geom: TriangleGeom, shape: str, degree: int):
    """Per weight: list over components of the vector ``int lambda^alpha w_c``."""
    key = (fam, geom.vertices, shape, degree)
    hit = _moment_cache.get(key)
    if hit is not None:
        return hit
    ws = weight_fields(fam, geom)
    nodes = enumerate_lattice(degree)
    scale = abs(geom.area2)
    rows = []
    for w in ws:
        comps = _contraction(shape, w)
        row = []
        for mult, wc in comps:
            vals = []
            wn = enumerate_lattice(wc.degree)
            tot = degree + wc.degree + 2
            den = factorial(tot)
            nz = [(b, c) for b, c in zip(wn, wc.coeffs) if c]
            for a in nodes:
                s = Fraction(0)
                for b, c in nz:
                    s += c * (factorial(a[0] + b[0]) * factorial(a[1] + b[1]) * factorial(a[2] + b[2]))
                vals.append(mult * scale * s / den)
            row.append(vals)
        rows.append(row)
    if len(_moment_cache) > 20000:
        _moment_cache.clear()
    _moment_cache[key] = rows
    return rows


def _contraction(shape: str, w: PolyField):
    """Components of ``w`` paired with the stored components of a field of ``shape``."""
    if shape in ("scalar", "vector"):
        if w.shape != shape:
            raise ShapeError(f"cannot pair {shape} with {w.shape} weights")
        return [(1, c) for c in w.comps]
    if shape == "sym":
        if w.shape == "sym":
            return [(1, w.comps[0]), (2, w.comps[1]), (1, w.comps[2])]
        return [(1, w.entry(0, 0)), (1, w.entry(0, 1) + w.entry(1, 0)), (1, w.entry(1, 1))]
    if shape == "matrix":
        return [(1, w.entry(0, 0)), (1, w.entry(0, 1)), (1, w.entry(1, 0)), (1, w.entry(1, 1))]
    raise ShapeError(f"unknown shape {shape!r}")


def evaluate_dofs(dofs: Sequence[DoFunctional], u: PolyField, geom: TriangleGeom) -> list[Fraction]:
    """Values of every functional on ``u`` over ``geom``."""
    fc = _FieldCache(u, geom)
    out = []
    for d in dofs:
        if d.kind == "point":
            p = fc.jet(d.quantity, d.beta)
            out.append(p.value_at_vertex(d.entity))
        elif d.kind == "edge":
            tr = fc.trace(d.quantity, d.entity, d.normal_order)
            out.append(bz.edge_moment(tr, d.weight_degree, d.weight_index))
        else:
            g = fc.op(d.op)
            rows = _moment_rows(d.weight, geom, g.shape, g.degree)
            row = rows[d.weight_index]
            s = Fraction(0)
            for comp, vals in zip(g.comps, row):
                for x, y in zip(comp.coeffs, vals):
                    if x and y:
                        s += x * y
            out.append(s)
    return out


def dof_matrix(dofs: DoFSet, geom: TriangleGeom) -> RatMatrix:
    """Rows: functionals; columns: the component major Bernstein basis of the shape space."""
    spec = dofs.spec
    cols = [evaluate_dofs(dofs.functionals, f, geom) for f in bz.field_basis(spec.shape, spec.k)]
    return RatMatrix.from_columns(cols, rows=len(dofs))


@dataclass(frozen=True)
class UnisolvenceVerdict:
    rows: int
    cols: int
    rank: int
    square: bool
    nonsingular: bool
    warnings: tuple[str, ...] = field(default=())

    def as_dict(self) -> dict:
        return {"rows": self.rows, "cols": self.cols, "rank": self.rank,
                "square": self.square, "nonsingular": self.nonsingular,
                "warnings": list(self.warnings)}


def check_unisolvence(dofs: DoFSet, geom: TriangleGeom) -> UnisolvenceVerdict:
    """Assemble the DoF matrix on ``geom`` and decide squareness and nonsingularity exactly."""
    m = dof_matrix(dofs, geom)
    r = rank(m)
    square = m.rows == m.cols
    return UnisolvenceVerdict(m.rows, m.cols, r, square, square and r == m.rows, dofs.warnings)


def determinant(m: RatMatrix) -> Fraction:
    """Exact determinant from the last Bareiss pivot."""
    if m.rows != m.cols:
        raise ShapeError("determinant needs a square matrix")
    if m.rows == 0:
        return Fraction(1)
    scales = []
    for row in m.data:
        d = 1
        for x in row:
            d = d * x.denominator // _gcd(d, x.denominator)
        scales.append(d)
    rows = integer_rows(m)
    # track row swaps for the sign
    n = m.rows
    sign = 1
    prev = 1
    a = rows
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c]), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            sign = -sign
        for i in range(c + 1, n):
            for j in range(c + 1, n):
                a[i][j] = (a[c][c] * a[i][j] - a[i][c] * a[c][j]) // prev
            a[i][c] = 0
        prev = a[c][c]
    total = 1
    for s in scales:
        total *= s
    return Fraction(sign * a[n - 1][n - 1], total)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


__all__ = [
    "FAMILIES", "ElementSpec", "DoFunctional", "DoFSet", "Quantity", "WeightFamily",
    "build_dofs", "check_unisolvence", "dof_counts", "dof_matrix", "evaluate_dofs",
    "generator_fields", "global_field", "validate", "weight_fields", "determinant",
    "UnisolvenceVerdict", "weight_count", "TEST_TRIANGLES", "FAMILY_ALIASES",
]
