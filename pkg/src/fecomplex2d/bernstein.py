"""Bernstein polynomials on a triangle and the field operators built on them.

A polynomial of degree ``k`` is stored by its coefficients against the
unnormalised monomials ``lambda**alpha`` listed in lattice order.  Fields are
tuples of such polynomials: scalar (1), vector (2), full matrix (4, row major)
and symmetric matrix (3, stored as ``t11, t12, t22``).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Sequence

from .errors import GeometryError, ShapeError, TopologyError
from .exact_linalg import as_fraction
from .lattice import EDGES, MultiIndex, enumerate_lattice, lattice_index

ZERO = Fraction(0)
ONE = Fraction(1)

Point = tuple[Fraction, Fraction]


def as_point(p) -> Point:
    if len(p) != 2:
        raise GeometryError(f"a point needs two coordinates, got {p!r}")
    return (as_fraction(p[0]), as_fraction(p[1]))


def perp(v: Sequence[Fraction]) -> tuple[Fraction, Fraction]:
    """Clockwise quarter turn ``(a, b) -> (b, -a)``."""
    return (v[1], -v[0])


@dataclass(frozen=True)
class TriangleGeom:
    """A nondegenerate triangle with exact rational vertices."""

    vertices: tuple[Point, Point, Point]

    def __post_init__(self):
        if len(self.vertices) != 3:
            raise GeometryError("a triangle has three vertices")
        vs = tuple(as_point(p) for p in self.vertices)
        object.__setattr__(self, "vertices", vs)
        if self.area2 == 0:
            raise GeometryError(f"degenerate triangle {vs}")

    @property
    def area2(self) -> Fraction:
        """Twice the signed area."""
        (x0, y0), (x1, y1), (x2, y2) = self.vertices
        return (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)

    @property
    def grad_lambda(self) -> tuple[Point, Point, Point]:
        return _grads(self.vertices)

    def edge_tangent(self, a: int, b: int) -> Point:
        """Unnormalised tangent ``x_b - x_a``."""
        pa, pb = self.vertices[a], self.vertices[b]
        return (pb[0] - pa[0], pb[1] - pa[1])

    def edge_normal(self, a: int, b: int) -> Point:
        return perp(self.edge_tangent(a, b))

    def barycentric(self, x: Point) -> tuple[Fraction, Fraction, Fraction]:
        x = as_point(x)
        g = self.grad_lambda
        v = self.vertices
        out = []
        for i in range(3):
            j = (i + 1) % 3
            # lambda_i vanishes at vertex j
            out.append(g[i][0] * (x[0] - v[j][0]) + g[i][1] * (x[1] - v[j][1]))
        return tuple(out)

    def affine_lambda(self, i: int) -> tuple[Fraction, Fraction, Fraction]:
        """``lambda_i = c + gx * x + gy * y`` as ``(c, gx, gy)``."""
        g = self.grad_lambda[i]
        v = self.vertices[(i + 1) % 3]
        return (-(g[0] * v[0] + g[1] * v[1]), g[0], g[1])


@lru_cache(maxsize=4096)
def _grads(vs) -> tuple[Point, Point, Point]:
    (x0, y0), (x1, y1), (x2, y2) = vs
    d = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
    return ((Fraction(y1 - y2) / d, Fraction(x2 - x1) / d),
            (Fraction(y2 - y0) / d, Fraction(x0 - x2) / d),
            (Fraction(y0 - y1) / d, Fraction(x1 - x0) / d))


REFERENCE_TRIANGLE = TriangleGeom(((0, 0), (1, 0), (0, 1)))


@lru_cache(maxsize=None)
def _dim(k: int) -> int:
    return (k + 1) * (k + 2) // 2


@dataclass(frozen=True)
class BernsteinPoly:
    """``sum_alpha c_alpha lambda**alpha`` of fixed degree on an unspecified triangle."""

    degree: int
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if self.degree < 0:
            raise ShapeError("negative polynomial degree")
        if len(self.coeffs) != _dim(self.degree):
            raise ShapeError("coefficient count does not match the degree")

    @classmethod
    def zero(cls, k: int) -> "BernsteinPoly":
        return cls(k, (ZERO,) * _dim(k))

    @classmethod
    def monomial(cls, alpha: MultiIndex, scale=1) -> "BernsteinPoly":
        k = sum(alpha)
        c = [ZERO] * _dim(k)
        c[lattice_index(k)[tuple(alpha)]] = as_fraction(scale)
        return cls(k, tuple(c))

    @classmethod
    def constant(cls, value, k: int = 0) -> "BernsteinPoly":
        """A constant written in degree ``k``: all coefficients of ``(sum lambda)**k``."""
        value = as_fraction(value)
        return cls(k, tuple(value * _multinomial(a) for a in enumerate_lattice(k)))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __add__(self, other: "BernsteinPoly") -> "BernsteinPoly":
        a, b = _common(self, other)
        return BernsteinPoly(a.degree, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))

    def __sub__(self, other: "BernsteinPoly") -> "BernsteinPoly":
        a, b = _common(self, other)
        return BernsteinPoly(a.degree, tuple(x - y for x, y in zip(a.coeffs, b.coeffs)))

    def __neg__(self) -> "BernsteinPoly":
        return BernsteinPoly(self.degree, tuple(-x for x in self.coeffs))

    def scale(self, s) -> "BernsteinPoly":
        s = as_fraction(s)
        return BernsteinPoly(self.degree, tuple(s * x for x in self.coeffs))

    def __mul__(self, other: "BernsteinPoly") -> "BernsteinPoly":
        k = self.degree + other.degree
        out = [ZERO] * _dim(k)
        idx = lattice_index(k)
        la, lb = enumerate_lattice(self.degree), enumerate_lattice(other.degree)
        for a, x in zip(la, self.coeffs):
            if not x:
                continue
            for b, y in zip(lb, other.coeffs):
                if y:
                    out[idx[(a[0] + b[0], a[1] + b[1], a[2] + b[2])]] += x * y
        return BernsteinPoly(k, tuple(out))

    def elevate(self, k: int) -> "BernsteinPoly":
        """Rewrite in degree ``k >= degree`` by multiplying with ``(sum lambda)**(k-degree)``."""
        if k < self.degree:
            raise ShapeError("cannot lower the degree by elevation")
        if k == self.degree:
            return self
        return self * BernsteinPoly.constant(1, k - self.degree)

    def evaluate_barycentric(self, lam: Sequence[Fraction]) -> Fraction:
        total = ZERO
        for a, c in zip(enumerate_lattice(self.degree), self.coeffs):
            if c:
                total += c * lam[0] ** a[0] * lam[1] ** a[1] * lam[2] ** a[2]
        return total

    def evaluate(self, geom: TriangleGeom, x) -> Fraction:
        return self.evaluate_barycentric(geom.barycentric(x))

    def value_at_vertex(self, i: int) -> Fraction:
        alpha = [0, 0, 0]
        alpha[i] = self.degree
        return self.coeffs[lattice_index(self.degree)[tuple(alpha)]]


def _common(a: BernsteinPoly, b: BernsteinPoly) -> tuple[BernsteinPoly, BernsteinPoly]:
    k = max(a.degree, b.degree)
    return a.elevate(k), b.elevate(k)


@lru_cache(maxsize=None)
def _multinomial(alpha: MultiIndex) -> int:
    out = factorial(sum(alpha))
    for a in alpha:
        out //= factorial(a)
    return out


@lru_cache(maxsize=None)
def _derivative_table(k: int) -> tuple[tuple[tuple[int, int, int], ...], ...]:
    """For each target node beta of degree k-1: (source index, i, beta_i + 1) triples."""
    src = lattice_index(k)
    rows = []
    for b in enumerate_lattice(k - 1):
        entries = []
        for i in range(3):
            a = list(b)
            a[i] += 1
            entries.append((src[tuple(a)], i, b[i] + 1))
        rows.append(tuple(entries))
    return tuple(rows)


def directional_derivative(p: BernsteinPoly, geom: TriangleGeom, d: Sequence[Fraction]) -> BernsteinPoly:
    """``d . grad p``; a constant maps to the zero constant."""
    if p.degree == 0:
        return BernsteinPoly.zero(0)
    g = geom.grad_lambda
    w = tuple(g[i][0] * d[0] + g[i][1] * d[1] for i in range(3))
    c = p.coeffs
    out = []
    for entries in _derivative_table(p.degree):
        s = ZERO
        for j, i, m in entries:
            if c[j] and w[i]:
                s += m * w[i] * c[j]
        out.append(s)
    return BernsteinPoly(p.degree - 1, tuple(out))


_E = ((ONE, ZERO), (ZERO, ONE))


def partial(p: BernsteinPoly, geom: TriangleGeom, j: int) -> BernsteinPoly:
    """Partial derivative with respect to ``x_{j+1}`` (``j`` in ``{0, 1}``)."""
    return directional_derivative(p, geom, _E[j])


def cartesian_derivative(p: BernsteinPoly, geom: TriangleGeom, beta: Sequence[int]) -> BernsteinPoly:
    """``D^beta p`` with ``beta = (b1, b2)``; requires ``|beta| <= degree``."""
    if beta[0] + beta[1] > p.degree:
        raise ShapeError(f"derivative order {sum(beta)} exceeds degree {p.degree}")
    for j in (0, 1):
        for _ in range(beta[j]):
            p = partial(p, geom, j)
    return p


def integrate(p: BernsteinPoly, geom: TriangleGeom) -> Fraction:
    """Exact integral over the triangle via ``|T| 2 alpha! / (|alpha|+2)!``."""
    return abs(geom.area2) * sum(
        (c * _moment_factor(a) for a, c in zip(enumerate_lattice(p.degree), p.coeffs) if c), ZERO)


@lru_cache(maxsize=None)
def _moment_factor(alpha: MultiIndex) -> Fraction:
    return Fraction(factorial(alpha[0]) * factorial(alpha[1]) * factorial(alpha[2]),
                    factorial(sum(alpha) + 2))


@lru_cache(maxsize=None)
def _trace_indices(k: int, a: int, b: int) -> tuple[int, ...]:
    """Lattice indices of the nodes on edge (a, b), ordered by the exponent of lambda_b."""
    idx = lattice_index(k)
    out = []
    for q in range(k + 1):
        alpha = [0, 0, 0]
        alpha[a] = k - q
        alpha[b] = q
        out.append(idx[tuple(alpha)])
    return tuple(out)


def edge_trace(p: BernsteinPoly, a: int, b: int) -> tuple[Fraction, ...]:
    """Restriction to edge (a, b): coefficients of ``lambda_a**(k-q) lambda_b**q``, q ascending."""
    if (a, b) not in EDGES and (b, a) not in EDGES:
        raise TopologyError(f"({a}, {b}) is not an edge of the triangle")
    return tuple(p.coeffs[i] for i in _trace_indices(p.degree, a, b))


@lru_cache(maxsize=None)
def _edge_factor(p: int, q: int) -> Fraction:
    return Fraction(factorial(p) * factorial(q), factorial(p + q + 1))


def edge_moment(trace: Sequence[Fraction], weight_degree: int, j: int) -> Fraction:
    """``int_e u * lambda_a**(m-j) lambda_b**j`` in the parametric measure (edge length 1)."""
    k = len(trace) - 1
    m = weight_degree
    return sum((c * _edge_factor(k - q + m - j, q + j) for q, c in enumerate(trace) if c), ZERO)


# ---------------------------------------------------------------- fields

SHAPES = {"scalar": 1, "vector": 2, "matrix": 4, "sym": 3}


@dataclass(frozen=True)
class PolyField:
    """A scalar, vector or matrix valued polynomial field."""

    shape: str
    comps: tuple[BernsteinPoly, ...]

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ShapeError(f"unknown field shape {self.shape!r}")
        if len(self.comps) != SHAPES[self.shape]:
            raise ShapeError(f"{self.shape} field needs {SHAPES[self.shape]} components")

    @property
    def degree(self) -> int:
        return max(c.degree for c in self.comps)

    def entry(self, i: int, j: int) -> BernsteinPoly:
        """Matrix entry ``(i, j)`` for matrix and symmetric fields."""
        if self.shape == "matrix":
            return self.comps[2 * i + j]
        if self.shape == "sym":
            return self.comps[i + j]
        raise ShapeError("entry() needs a matrix valued field")

    def __add__(self, other: "PolyField") -> "PolyField":
        if self.shape != other.shape:
            raise ShapeError("cannot add fields of different shapes")
        return PolyField(self.shape, tuple(a + b for a, b in zip(self.comps, other.comps)))

    def scale(self, s) -> "PolyField":
        return PolyField(self.shape, tuple(c.scale(s) for c in self.comps))

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.comps)

    def evaluate(self, geom: TriangleGeom, x) -> tuple[Fraction, ...]:
        lam = geom.barycentric(x)
        return tuple(c.evaluate_barycentric(lam) for c in self.comps)


def scalar(p: BernsteinPoly) -> PolyField:
    return PolyField("scalar", (p,))


def vector(p: BernsteinPoly, q: BernsteinPoly) -> PolyField:
    return PolyField("vector", (p, q))


def field_dim(shape: str, k: int) -> int:
    return SHAPES[shape] * _dim(k)


def field_basis(shape: str, k: int) -> list[PolyField]:
    """Component-major unit basis of the shape's coefficient space."""
    out = []
    z = BernsteinPoly.zero(k)
    n = SHAPES[shape]
    for c in range(n):
        for a in enumerate_lattice(k):
            comps = [z] * n
            comps[c] = BernsteinPoly.monomial(a)
            out.append(PolyField(shape, tuple(comps)))
    return out


def field_from_coeffs(shape: str, k: int, vec: Sequence[Fraction]) -> PolyField:
    d = _dim(k)
    n = SHAPES[shape]
    if len(vec) != n * d:
        raise ShapeError("coefficient vector has the wrong length")
    return PolyField(shape, tuple(BernsteinPoly(k, tuple(vec[c * d:(c + 1) * d])) for c in range(n)))


def field_to_coeffs(f: PolyField, k: int) -> list[Fraction]:
    out = []
    for c in f.comps:
        out.extend(c.elevate(k).coeffs)
    return out


def inner(u: PolyField, v: PolyField) -> BernsteinPoly:
    """Pointwise contraction ``u . v`` or ``u : v``."""
    if u.shape == "scalar" and v.shape == "scalar":
        return u.comps[0] * v.comps[0]
    if u.shape == "vector" and v.shape == "vector":
        return u.comps[0] * v.comps[0] + u.comps[1] * v.comps[1]
    if u.shape in ("matrix", "sym") and v.shape in ("matrix", "sym"):
        total = None
        for i in (0, 1):
            for j in (0, 1):
                t = u.entry(i, j) * v.entry(i, j)
                total = t if total is None else total + t
        return total
    raise ShapeError(f"cannot contract {u.shape} with {v.shape}")


# ---------------------------------------------------------------- operators

def grad(u: PolyField, geom: TriangleGeom) -> PolyField:
    (p,) = _expect(u, "scalar").comps
    return vector(partial(p, geom, 0), partial(p, geom, 1))


def curl(u: PolyField, geom: TriangleGeom) -> PolyField:
    """``curl v = (d2 v, -d1 v)`` for a scalar and row wise for a vector."""
    if u.shape == "scalar":
        (p,) = u.comps
        return vector(partial(p, geom, 1), -partial(p, geom, 0))
    if u.shape == "vector":
        a, b = u.comps
        return PolyField("matrix", (partial(a, geom, 1), -partial(a, geom, 0),
                                    partial(b, geom, 1), -partial(b, geom, 0)))
    raise ShapeError(f"curl is not defined for {u.shape} fields")


def rot(u: PolyField, geom: TriangleGeom) -> PolyField:
    """``rot v = d1 v2 - d2 v1`` for a vector and row wise for a matrix."""
    if u.shape == "vector":
        a, b = u.comps
        return scalar(partial(b, geom, 0) - partial(a, geom, 1))
    if u.shape in ("matrix", "sym"):
        rows = []
        for i in (0, 1):
            rows.append(partial(u.entry(i, 1), geom, 0) - partial(u.entry(i, 0), geom, 1))
        return vector(*rows)
    raise ShapeError(f"rot is not defined for {u.shape} fields")


def div(u: PolyField, geom: TriangleGeom) -> PolyField:
    """Divergence of a vector, row wise divergence of a matrix."""
    if u.shape == "vector":
        a, b = u.comps
        return scalar(partial(a, geom, 0) + partial(b, geom, 1))
    if u.shape in ("matrix", "sym"):
        rows = []
        for i in (0, 1):
            rows.append(partial(u.entry(i, 0), geom, 0) + partial(u.entry(i, 1), geom, 1))
        return vector(*rows)
    raise ShapeError(f"div is not defined for {u.shape} fields")


def grad_vector(u: PolyField, geom: TriangleGeom) -> PolyField:
    """Row wise gradient ``(grad v)_ij = d_j v_i``."""
    a, b = _expect(u, "vector").comps
    return PolyField("matrix", (partial(a, geom, 0), partial(a, geom, 1),
                                partial(b, geom, 0), partial(b, geom, 1)))


def sym(u: PolyField) -> PolyField:
    if u.shape == "sym":
        return u
    _expect(u, "matrix")
    t11, t12, t21, t22 = u.comps
    return PolyField("sym", (t11, (t12 + t21).scale(Fraction(1, 2)), t22))


def to_matrix(u: PolyField) -> PolyField:
    if u.shape == "matrix":
        return u
    _expect(u, "sym")
    t11, t12, t22 = u.comps
    return PolyField("matrix", (t11, t12, t12, t22))


def sskw(u: PolyField) -> PolyField:
    """Scalar skew part ``(t21 - t12) / 2``."""
    if u.shape == "sym":
        return scalar(BernsteinPoly.zero(u.degree))
    _expect(u, "matrix")
    return scalar((u.comps[2] - u.comps[1]).scale(Fraction(1, 2)))


def mskw(u: PolyField) -> PolyField:
    """``[[0, -v], [v, 0]]``."""
    (p,) = _expect(u, "scalar").comps
    z = BernsteinPoly.zero(p.degree)
    return PolyField("matrix", (z, -p, p, z))


def hess(u: PolyField, geom: TriangleGeom) -> PolyField:
    (p,) = _expect(u, "scalar").comps
    p1, p2 = partial(p, geom, 0), partial(p, geom, 1)
    return PolyField("sym", (partial(p1, geom, 0), partial(p1, geom, 1), partial(p2, geom, 1)))


def air(u: PolyField, geom: TriangleGeom) -> PolyField:
    """``curl curl v = [[d22 v, -d12 v], [-d12 v, d11 v]]``."""
    h11, h12, h22 = hess(u, geom).comps
    return PolyField("sym", (h22, -h12, h11))


def sym_curl(u: PolyField, geom: TriangleGeom) -> PolyField:
    return sym(curl(_expect(u, "vector"), geom))


def sym_grad(u: PolyField, geom: TriangleGeom) -> PolyField:
    return sym(grad_vector(u, geom))


def div_div(u: PolyField, geom: TriangleGeom) -> PolyField:
    return div(div(u, geom), geom)


def rot_rot(u: PolyField, geom: TriangleGeom) -> PolyField:
    return rot(rot(u, geom), geom)


def _expect(u: PolyField, shape: str) -> PolyField:
    if u.shape != shape:
        raise ShapeError(f"expected a {shape} field, got {u.shape}")
    return u


# ---------------------------------------------------------------- rotation

def rotate_field(u: PolyField) -> PolyField:
    """Pointwise quarter turn ``R v`` for vectors and ``R t R^T`` for matrices.

    ``R`` is the clockwise rotation ``(a, b) -> (b, -a)``; scalars are left alone.
    """
    if u.shape == "scalar":
        return u
    if u.shape == "vector":
        a, b = u.comps
        return vector(b, -a)
    if u.shape == "sym":
        t11, t12, t22 = u.comps
        return PolyField("sym", (t22, -t12, t11))
    t11, t12, t21, t22 = u.comps
    return PolyField("matrix", (t22, -t21, -t12, t11))


OPERATORS = {
    "grad": grad,
    "curl": curl,
    "rot": rot,
    "div": div,
    "grad_vector": grad_vector,
    "hess": hess,
    "air": air,
    "sym_curl": sym_curl,
    "sym_grad": sym_grad,
    "divdiv": div_div,
    "rotrot": rot_rot,
}


def apply_operator(name: str, u: PolyField, geom: TriangleGeom) -> PolyField:
    try:
        op = OPERATORS[name]
    except KeyError:
        raise ShapeError(f"unknown differential operator {name!r}") from None
    return op(u, geom)


# ---------------------------------------------------------------- global polynomials

def polynomial_in_xy(terms: dict[tuple[int, int], Fraction], geom: TriangleGeom, k: int | None = None) -> BernsteinPoly:
    """Bernstein form on ``geom`` of ``sum c x**i y**j`` (``terms`` maps (i, j) to c)."""
    deg = max((i + j for i, j in terms), default=0)
    k = deg if k is None else k
    vs = geom.vertices
    # x = sum_i x_i lambda_i, y likewise; both of degree one
    x = BernsteinPoly(1, _linear_coeffs([vs[i][0] for i in range(3)]))
    y = BernsteinPoly(1, _linear_coeffs([vs[i][1] for i in range(3)]))
    total = BernsteinPoly.zero(k)
    for (i, j), c in terms.items():
        c = as_fraction(c)
        if not c:
            continue
        t = BernsteinPoly.constant(c, 0)
        for _ in range(i):
            t = t * x
        for _ in range(j):
            t = t * y
        total = total + t
    return total.elevate(k) if total.degree < k else total


def _linear_coeffs(vals):
    out = [ZERO] * 3
    idx = lattice_index(1)
    for i in range(3):
        a = [0, 0, 0]
        a[i] = 1
        out[idx[tuple(a)]] = as_fraction(vals[i])
    return tuple(out)
