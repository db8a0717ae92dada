"""The simplicial lattice of a triangle and its geometric decomposition.

A node of the degree ``k`` lattice is a triple ``alpha`` of nonnegative
integers summing to ``k``; it labels the Bernstein monomial
``lambda_0**a0 * lambda_1**a1 * lambda_2**a2``.  Sub-simplices of the
reference triangle are sorted tuples of vertex indices, e.g. ``(0,)`` or
``(1, 2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Iterable

from .errors import ParameterError

MultiIndex = tuple[int, ...]
Face = tuple[int, ...]

VERTICES: tuple[Face, ...] = ((0,), (1,), (2,))
EDGES: tuple[Face, ...] = ((0, 1), (0, 2), (1, 2))


def binom(n: int, k: int) -> int:
    """Binomial coefficient that is zero outside ``0 <= k <= n``."""
    if k < 0 or n < k:
        return 0
    return comb(n, k)


@dataclass(frozen=True, order=True)
class SmoothnessPair:
    """Vertex and edge smoothness orders ``(r^v, r^e)``; ``-1`` means none."""

    rv: int
    re: int

    def shift(self, s: int) -> "SmoothnessPair":
        return SmoothnessPair(self.rv + s, self.re + s)

    def __add__(self, s: int) -> "SmoothnessPair":
        return self.shift(s)

    def __sub__(self, s: int) -> "SmoothnessPair":
        return self.shift(-s)

    def floor(self, lo: int = -1) -> "SmoothnessPair":
        """Componentwise ``max(self, lo)``."""
        return SmoothnessPair(max(self.rv, lo), max(self.re, lo))

    def dominates(self, other: "SmoothnessPair") -> bool:
        return self.rv >= other.rv and self.re >= other.re

    def as_tuple(self) -> tuple[int, int]:
        return (self.rv, self.re)

    def __str__(self) -> str:
        return f"({self.rv},{self.re})"

    @classmethod
    def parse(cls, text: str) -> "SmoothnessPair":
        parts = text.replace("(", "").replace(")", "").split(",")
        if len(parts) != 2:
            raise ParameterError(f"smoothness pair must look like 'v,e', got {text!r}")
        try:
            return cls(int(parts[0]), int(parts[1]))
        except ValueError:
            raise ParameterError(f"smoothness pair must contain integers, got {text!r}") from None


def as_pair(r) -> SmoothnessPair:
    if isinstance(r, SmoothnessPair):
        return r
    rv, re = r
    return SmoothnessPair(int(rv), int(re))


@lru_cache(maxsize=None)
def enumerate_lattice(k: int, dim: int = 2) -> tuple[MultiIndex, ...]:
    """All multi-indices of length ``dim+1`` and sum ``k`` in lexicographic order."""
    if k < 0:
        return ()
    if dim == 0:
        return ((k,),)
    out = []
    for a0 in range(k + 1):
        for rest in enumerate_lattice(k - a0, dim - 1):
            out.append((a0,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def lattice_index(k: int, dim: int = 2) -> dict[MultiIndex, int]:
    return {a: i for i, a in enumerate(enumerate_lattice(k, dim))}


def opposite(f: Face, n: int = 3) -> Face:
    """The complementary face ``f*``."""
    return tuple(i for i in range(n) if i not in f)


def distance(alpha: MultiIndex, f: Face) -> int:
    """Lattice distance of ``alpha`` to the face ``f``: the sum over ``f*``."""
    return sum(alpha[i] for i in range(len(alpha)) if i not in f)


def tube(k: int, f: Face, r: int) -> tuple[MultiIndex, ...]:
    """Nodes within distance ``r`` of ``f`` (empty when ``r < 0``)."""
    return tuple(a for a in enumerate_lattice(k) if distance(a, f) <= r)


def line(k: int, f: Face, s: int) -> tuple[MultiIndex, ...]:
    """Nodes at exact distance ``s`` from ``f``."""
    return tuple(a for a in enumerate_lattice(k) if distance(a, f) == s)


def check_smoothness(k: int, r: SmoothnessPair) -> None:
    """Raise :class:`ParameterError` unless ``(k, r)`` is admissible for the decomposition."""
    if r.re < -1:
        raise ParameterError(f"edge smoothness r^e={r.re} violates r^e >= -1")
    if r.rv < max(2 * r.re, -1):
        raise ParameterError(
            f"vertex smoothness r^v={r.rv} violates r^v >= max(2 r^e, -1) = {max(2 * r.re, -1)}")
    if k < max(2 * r.rv + 1, 0):
        raise ParameterError(
            f"degree k={k} violates k >= max(2 r^v + 1, 0) = {max(2 * r.rv + 1, 0)}")


@dataclass(frozen=True)
class LatticeDecomposition:
    """Partition of the degree ``k`` lattice into vertex, edge and interior parts."""

    k: int
    r: SmoothnessPair
    s0: dict[Face, tuple[MultiIndex, ...]]
    s1: dict[Face, tuple[MultiIndex, ...]]
    s2: tuple[MultiIndex, ...]

    @property
    def s0_all(self) -> tuple[MultiIndex, ...]:
        return tuple(a for f in VERTICES for a in self.s0[f])

    @property
    def s1_all(self) -> tuple[MultiIndex, ...]:
        return tuple(a for f in EDGES for a in self.s1[f])

    def counts(self) -> tuple[int, int, int]:
        return (len(self.s0_all), len(self.s1_all), len(self.s2))


@lru_cache(maxsize=None)
def _decompose(k: int, rv: int, re: int) -> LatticeDecomposition:
    nodes = enumerate_lattice(k)
    s0 = {v: tuple(a for a in nodes if distance(a, v) <= rv) for v in VERTICES}
    in_s0 = {a for part in s0.values() for a in part}
    s1 = {e: tuple(a for a in nodes if distance(a, e) <= re and a not in in_s0) for e in EDGES}
    in_s1 = {a for part in s1.values() for a in part}
    s2 = tuple(a for a in nodes if a not in in_s0 and a not in in_s1)
    return LatticeDecomposition(k, SmoothnessPair(rv, re), s0, s1, s2)


def geometric_decomposition(k: int, r) -> LatticeDecomposition:
    """Split the lattice into vertex tubes, edge tubes minus those, and the rest.

    With ``r^e = -1`` there are no edge tubes and the interior part is the
    complement of the vertex tubes.
    """
    r = as_pair(r)
    check_smoothness(k, r)
    return _decompose(k, r.rv, r.re)


def bubble_set(k: int, r) -> tuple[MultiIndex, ...]:
    """Nodes whose Bernstein monomials span the bubble space ``B_k(r)``."""
    return geometric_decomposition(k, r).s2


def bubble_dim(k: int, r) -> int:
    return len(bubble_set(k, r))


def bubble_dim_formula(k: int, r) -> int:
    """Closed form ``C(k-3r^e-1, 2) - 3 C(r^v-2r^e, 2)`` valid for ``r^e >= 0``."""
    r = as_pair(r)
    check_smoothness(k, r)
    if r.re < 0:
        return binom(k + 2, 2) - 3 * binom(r.rv + 2, 2)
    return binom(k - 3 * r.re - 1, 2) - 3 * binom(r.rv - 2 * r.re, 2)


def decomposition_cardinalities(k: int, r) -> tuple[int, int, int]:
    """Closed form sizes of ``(S0, S1, S2)``."""
    r = as_pair(r)
    check_smoothness(k, r)
    n0 = 3 * binom(r.rv + 2, 2)
    n1 = 3 * sum(k - 1 - 2 * r.rv + i for i in range(r.re + 1))
    return n0, n1, binom(k + 2, 2) - n0 - n1


def interior_constraint_set(k: int, r) -> tuple[MultiIndex, ...]:
    """The interior set rebuilt from the shifted constraint description.

    Subtract ``r^e + 1`` from every coordinate and keep the nodes of the
    smaller lattice whose coordinates stay below ``k - r^v - r^e - 2``.
    """
    r = as_pair(r)
    check_smoothness(k, r)
    s = r.re + 1
    m = k - 3 * s
    bound = k - r.rv - r.re - 2
    out = []
    for a in enumerate_lattice(m):
        if all(x <= bound for x in a):
            out.append(tuple(x + s for x in a))
    return tuple(sorted(out))


def census(k_max: int, rv_max: int, re_max: int) -> list[dict]:
    """Check the closed form cardinalities on every admissible parameter set."""
    rows = []
    for re in range(-1, re_max + 1):
        for rv in range(max(2 * re, -1), rv_max + 1):
            for k in range(max(2 * rv + 1, 0), k_max + 1):
                dec = _decompose(k, rv, re)
                got = dec.counts()
                want = decomposition_cardinalities(k, (rv, re))
                ok = got == want and sum(got) == binom(k + 2, 2)
                if re >= 0:
                    ok = ok and len(dec.s2) == bubble_dim_formula(k, (rv, re))
                rows.append({"k": k, "rv": rv, "re": re, "counts": list(got), "ok": ok})
    return rows


def iter_faces() -> Iterable[Face]:
    yield from VERTICES
    yield from EDGES
    yield (0, 1, 2)
