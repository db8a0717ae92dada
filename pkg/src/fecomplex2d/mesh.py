"""Conforming triangulations with exact rational vertices.

Triangles are stored with their vertex indices sorted ascending, so local
vertex ``i`` of a cell is its ``i``-th smallest global vertex and every local
edge ``(a, b)`` runs from the lower to the higher global index.  That single
rule gives each mesh edge one tangent and one normal shared by both
neighbouring cells.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .bernstein import Point, TriangleGeom
from .errors import GeometryError, ParseError, TopologyError
from .lattice import EDGES

Edge = tuple[int, int]


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"`` or an integer literal (strings or ints; floats are rejected)."""
    if isinstance(text, bool) or isinstance(text, float):
        raise ParseError(f"rational coordinates must be strings or integers, got {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ParseError(f"rational coordinates must be strings or integers, got {text!r}")
    s = text.strip()
    parts = s.split("/")
    try:
        if len(parts) == 1:
            return Fraction(int(parts[0]))
        if len(parts) == 2:
            den = int(parts[1])
            if den == 0:
                raise ParseError(f"zero denominator in {text!r}")
            return Fraction(int(parts[0]), den)
    except ValueError:
        pass
    raise ParseError(f"not a rational literal: {text!r}")


def format_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Mesh:
    """Vertices, cells and the derived edge incidence of a conforming mesh."""

    vertices: tuple[Point, ...]
    triangles: tuple[tuple[int, int, int], ...]
    edges: tuple[Edge, ...] = field(init=False)
    cell_edges: tuple[tuple[int, int, int], ...] = field(init=False)
    edge_cells: tuple[tuple[int, ...], ...] = field(init=False)
    source_triangles: tuple[tuple[int, int, int], ...] = field(init=False)

    def __post_init__(self):
        verts = tuple((Fraction(p[0]), Fraction(p[1])) for p in self.vertices)
        object.__setattr__(self, "vertices", verts)
        src = tuple(tuple(int(i) for i in t) for t in self.triangles)
        object.__setattr__(self, "source_triangles", src)
        tris = tuple(tuple(sorted(t)) for t in src)
        object.__setattr__(self, "triangles", tris)
        _validate(verts, tris)
        edge_set = sorted({(t[a], t[b]) for t in tris for a, b in EDGES})
        index = {e: i for i, e in enumerate(edge_set)}
        cell_edges = tuple(tuple(index[(t[a], t[b])] for a, b in EDGES) for t in tris)
        cells: list[list[int]] = [[] for _ in edge_set]
        for c, es in enumerate(cell_edges):
            for e in es:
                cells[e].append(c)
        for e, cs in enumerate(cells):
            if len(cs) > 2:
                raise TopologyError(f"edge {edge_set[e]} is shared by {len(cs)} triangles")
        object.__setattr__(self, "edges", tuple(edge_set))
        object.__setattr__(self, "cell_edges", cell_edges)
        object.__setattr__(self, "edge_cells", tuple(tuple(c) for c in cells))
        _check_sides(self)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def geometry(self, c: int) -> TriangleGeom:
        return TriangleGeom(tuple(self.vertices[i] for i in self.triangles[c]))

    def boundary_edges(self) -> list[int]:
        return [e for e, cs in enumerate(self.edge_cells) if len(cs) == 1]

    def boundary_vertices(self) -> list[int]:
        return sorted({v for e in self.boundary_edges() for v in self.edges[e]})

    def boundary_loops(self) -> int:
        """Connected components of the boundary edge graph."""
        parent = {}

        def find(x):
            while parent.setdefault(x, x) != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in self.boundary_edges():
            a, b = self.edges[e]
            parent[find(a)] = find(b)
        return len({find(v) for v in parent})

    def euler_characteristic(self) -> int:
        return euler_characteristic(self)

    def is_simply_connected(self) -> bool:
        return euler_characteristic(self) == 1 and self.boundary_loops() == 1

    def to_document(self) -> dict:
        return {
            "vertices": [[format_rational(x), format_rational(y)] for x, y in self.vertices],
            "triangles": [list(t) for t in self.source_triangles],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_document(), separators=(",", ":"))

    def info(self) -> dict:
        return {
            "vertices": self.n_vertices,
            "edges": self.n_edges,
            "triangles": self.n_triangles,
            "boundary_edges": len(self.boundary_edges()),
            "boundary_loops": self.boundary_loops(),
            "euler_characteristic": euler_characteristic(self),
            "simply_connected": self.is_simply_connected(),
        }


def euler_characteristic(m: Mesh) -> int:
    return m.n_vertices - m.n_edges + m.n_triangles


def _area2(p, q, r) -> Fraction:
    return (q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1])


def _validate(verts, tris) -> None:
    if len(set(verts)) != len(verts):
        raise TopologyError("duplicate vertex coordinates")
    n = len(verts)
    seen = set()
    for t in tris:
        if len(t) != 3 or len(set(t)) != 3:
            raise TopologyError(f"triangle {t} must have three distinct vertices")
        if any(i < 0 or i >= n for i in t):
            raise TopologyError(f"triangle {t} refers to a missing vertex")
        if t in seen:
            raise TopologyError(f"triangle {t} is listed twice")
        seen.add(t)
        if _area2(*(verts[i] for i in t)) == 0:
            raise GeometryError(f"degenerate triangle {t}")
    # hanging nodes: a vertex in the relative interior of some cell edge
    for t in tris:
        for a, b in EDGES:
            p, q = verts[t[a]], verts[t[b]]
            for i, x in enumerate(verts):
                if i in (t[a], t[b]):
                    continue
                if _area2(p, q, x) == 0 and _strictly_between(p, q, x):
                    raise TopologyError(f"vertex {i} hangs on edge {(t[a], t[b])}")


def _strictly_between(p, q, x) -> bool:
    d = (q[0] - p[0]) * (x[0] - p[0]) + (q[1] - p[1]) * (x[1] - p[1])
    return 0 < d < (q[0] - p[0]) ** 2 + (q[1] - p[1]) ** 2


def _check_sides(m: Mesh) -> None:
    """Cells sharing an edge must lie on opposite sides of it."""
    for e, cs in enumerate(m.edge_cells):
        if len(cs) != 2:
            continue
        a, b = m.edges[e]
        p, q = m.vertices[a], m.vertices[b]
        s = []
        for c in cs:
            (other,) = [i for i in m.triangles[c] if i not in (a, b)]
            s.append(_area2(p, q, m.vertices[other]) > 0)
        if s[0] == s[1]:
            raise TopologyError(f"triangles {cs} overlap across edge {(a, b)}")


def load(document: str | dict) -> Mesh:
    """Build a mesh from the JSON document (text or already decoded)."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"mesh document is not valid JSON: {exc}") from None
    if not isinstance(document, dict):
        raise ParseError("mesh document must be an object")
    extra = set(document) - {"vertices", "triangles"}
    if extra:
        raise ParseError(f"unknown mesh fields {sorted(extra)}")
    try:
        vs = document["vertices"]
        ts = document["triangles"]
    except KeyError as exc:
        raise ParseError(f"mesh document lacks field {exc}") from None
    if not isinstance(vs, list) or not isinstance(ts, list):
        raise ParseError("vertices and triangles must be arrays")
    verts = []
    for v in vs:
        if not isinstance(v, list) or len(v) != 2:
            raise ParseError(f"vertex {v!r} must be a pair")
        verts.append((parse_rational(v[0]), parse_rational(v[1])))
    tris = []
    for t in ts:
        if not isinstance(t, list) or len(t) != 3 or not all(isinstance(i, int) and not isinstance(i, bool) for i in t):
            raise ParseError(f"triangle {t!r} must be three integer indices")
        tris.append(tuple(t))
    return Mesh(tuple(verts), tuple(tris))


def load_file(path: str) -> Mesh:
    with open(path, encoding="utf-8") as fh:
        return load(fh.read())


def unit_square_mesh(n: int, pattern: str = "diagonal") -> Mesh:
    """``n x n`` subdivision of the unit square, split by one diagonal or into four."""
    if n < 1:
        raise ParseError("the square needs at least one subdivision")
    h = Fraction(1, n)
    verts: list[Point] = [(i * h, j * h) for j in range(n + 1) for i in range(n + 1)]

    def vid(i, j):
        return j * (n + 1) + i

    tris = []
    if pattern == "diagonal":
        for j in range(n):
            for i in range(n):
                a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
                tris += [(a, b, c), (a, c, d)]
    elif pattern == "crisscross":
        for j in range(n):
            for i in range(n):
                a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
                m = len(verts)
                verts.append(((i + Fraction(1, 2)) * h, (j + Fraction(1, 2)) * h))
                tris += [(a, b, m), (b, c, m), (c, d, m), (d, a, m)]
    else:
        raise ParseError(f"unknown square pattern {pattern!r}")
    return Mesh(tuple(verts), tuple(tris))


def reference_triangle_mesh() -> Mesh:
    return Mesh(((0, 0), (1, 0), (0, 1)), ((0, 1, 2),))


def annulus_mesh() -> Mesh:
    """Square ring: eight outer and eight inner boundary vertices, sixteen cells."""
    outer = [(0, 0), (2, 0), (4, 0), (4, 2), (4, 4), (2, 4), (0, 4), (0, 2)]
    inner = [(1, 1), (2, 1), (3, 1), (3, 2), (3, 3), (2, 3), (1, 3), (1, 2)]
    verts = outer + inner
    tris = []
    for i in range(8):
        j = (i + 1) % 8
        tris += [(i, j, 8 + j), (i, 8 + j, 8 + i)]
    return Mesh(tuple(verts), tuple(tris))


def builtin(name: str) -> Mesh:
    """Resolve ``square-diagonal-N``, ``square-crisscross-N``, ``reference-triangle`` or ``annulus``."""
    if name == "reference-triangle":
        return reference_triangle_mesh()
    if name == "annulus":
        return annulus_mesh()
    for pattern in ("diagonal", "crisscross"):
        prefix = f"square-{pattern}-"
        if name.startswith(prefix):
            try:
                n = int(name[len(prefix):])
            except ValueError:
                break
            return unit_square_mesh(n, pattern)
    raise ParseError(f"unknown builtin mesh {name!r}")


def resolve(spec: str) -> Mesh:
    """``builtin:<name>`` or a path to a mesh document."""
    if spec.startswith("builtin:"):
        return builtin(spec[len("builtin:"):])
    try:
        return load_file(spec)
    except OSError as exc:
        raise ParseError(f"cannot read mesh file {spec!r}: {exc.strerror}") from None


def triangle_from_points(points: Sequence) -> TriangleGeom:
    return TriangleGeom(tuple((parse_rational(x) if isinstance(x, str) else Fraction(x),
                               parse_rational(y) if isinstance(y, str) else Fraction(y)) for x, y in points))
