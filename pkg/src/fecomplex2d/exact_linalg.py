"""Exact rational linear algebra.

Every rank, kernel and inverse in the package goes through this module.  Rank
uses fraction free Bareiss elimination on integer rows; solves and inverses use
Gauss-Jordan elimination over :class:`fractions.Fraction`.  Pivoting always
takes the first nonzero entry so results never depend on magnitudes.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

from .errors import DependentColumnsError, ShapeError, SingularMatrix

Rational = Fraction


def as_fraction(x) -> Fraction:
    """Convert ints, Fractions and ``"p/q"`` strings to :class:`Fraction`."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, (int, str)):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class RatMatrix:
    """Dense rows-by-cols matrix with :class:`Fraction` entries.

    Instances are treated as immutable by the rest of the package.
    """

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: list[list[Fraction]] | None = None):
        if rows < 0 or cols < 0:
            raise ShapeError("negative matrix dimension")
        self.rows = rows
        self.cols = cols
        if data is None:
            data = [[Fraction(0)] * cols for _ in range(rows)]
        elif len(data) != rows or any(len(r) != cols for r in data):
            raise ShapeError("row data does not match the declared shape")
        self.data = data

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: int | None = None) -> "RatMatrix":
        rows = [[as_fraction(x) for x in r] for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        return cls(len(rows), cols, rows)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int | None = None) -> "RatMatrix":
        if rows is None:
            rows = len(columns[0]) if columns else 0
        m = cls(rows, len(columns))
        for j, col in enumerate(columns):
            if len(col) != rows:
                raise ShapeError("column length mismatch")
            for i, x in enumerate(col):
                if x:
                    m.data[i][j] = as_fraction(x)
        return m

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        m = cls(n, n)
        for i in range(n):
            m.data[i][i] = Fraction(1)
        return m

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return self.data[i][j]

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatMatrix):
            return NotImplemented
        return (self.rows, self.cols) == (other.rows, other.cols) and self.data == other.data

    def __repr__(self) -> str:
        return f"RatMatrix({self.rows}x{self.cols})"

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def row(self, i: int) -> list[Fraction]:
        return list(self.data[i])

    def column(self, j: int) -> list[Fraction]:
        return [r[j] for r in self.data]

    def columns(self) -> list[list[Fraction]]:
        return [self.column(j) for j in range(self.cols)]

    def transpose(self) -> "RatMatrix":
        return RatMatrix(self.cols, self.rows, [self.column(j) for j in range(self.cols)])

    def select_columns(self, idx: Iterable[int]) -> "RatMatrix":
        idx = list(idx)
        return RatMatrix(self.rows, len(idx), [[r[j] for j in idx] for r in self.data])

    def select_rows(self, idx: Iterable[int]) -> "RatMatrix":
        idx = list(idx)
        return RatMatrix(len(idx), self.cols, [list(self.data[i]) for i in idx])

    def hstack(self, other: "RatMatrix") -> "RatMatrix":
        if self.rows != other.rows:
            raise ShapeError("hstack needs equal row counts")
        return RatMatrix(self.rows, self.cols + other.cols,
                         [a + b for a, b in zip(self.data, other.data)])

    def vstack(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.cols:
            raise ShapeError("vstack needs equal column counts")
        return RatMatrix(self.rows + other.rows, self.cols,
                         [list(r) for r in self.data] + [list(r) for r in other.data])

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        return multiply(self, other)

    def apply(self, vec: Sequence[Fraction]) -> list[Fraction]:
        if len(vec) != self.cols:
            raise ShapeError("vector length does not match column count")
        nz = [(j, x) for j, x in enumerate(vec) if x]
        return [sum((r[j] * x for j, x in nz), Fraction(0)) for r in self.data]

    def max_abs_difference(self, other: "RatMatrix") -> Fraction:
        if self.shape != other.shape:
            raise ShapeError("shape mismatch")
        best = Fraction(0)
        for a, b in zip(self.data, other.data):
            for x, y in zip(a, b):
                d = abs(x - y)
                if d > best:
                    best = d
        return best


def multiply(a: RatMatrix, b: RatMatrix) -> RatMatrix:
    """Exact product ``a @ b``; skips zero entries of ``a``."""
    if a.cols != b.rows:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    out = []
    bdata = b.data
    zero = Fraction(0)
    for r in a.data:
        acc = [zero] * b.cols
        for k, x in enumerate(r):
            if x:
                brow = bdata[k]
                for j, y in enumerate(brow):
                    if y:
                        acc[j] += x * y
        out.append(acc)
    return RatMatrix(a.rows, b.cols, out)


def is_zero(m: RatMatrix) -> bool:
    return all(not x for r in m.data for x in r)


def integer_rows(m: RatMatrix) -> list[list[int]]:
    """Scale every row by the lcm of its denominators; row rank is unchanged."""
    out = []
    for r in m.data:
        d = 1
        for x in r:
            if x.denominator != 1:
                d = lcm(d, x.denominator)
        out.append([int(x * d) for x in r])
    return out


def bareiss_echelon(rows: list[list[int]], check: bool = False) -> tuple[int, list[int], list[list[int]]]:
    """Fraction free elimination of an integer matrix, in place.

    Returns ``(rank, pivot_columns, rows)``.  Every division by the previous
    pivot is exact; with ``check`` set this is asserted.
    """
    nrows = len(rows)
    ncols = len(rows[0]) if nrows else 0
    prev = 1
    r = 0
    pivots = []
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if rows[i][c]), None)
        if p is None:
            continue
        if p != r:
            rows[r], rows[p] = rows[p], rows[r]
        prow = rows[r]
        piv = prow[c]
        for i in range(r + 1, nrows):
            row = rows[i]
            a = row[c]
            if a:
                for j in range(c + 1, ncols):
                    v = piv * row[j] - a * prow[j]
                    if check and v % prev:
                        raise ArithmeticError("inexact Bareiss division")
                    row[j] = v // prev
            elif piv != prev:
                for j in range(c + 1, ncols):
                    if row[j]:
                        v = piv * row[j]
                        if check and v % prev:
                            raise ArithmeticError("inexact Bareiss division")
                        row[j] = v // prev
            row[c] = 0
        prev = piv
        pivots.append(c)
        r += 1
    return r, pivots, rows


def rank(m: RatMatrix) -> int:
    """Exact rank via Bareiss elimination on the shorter orientation."""
    if m.rows == 0 or m.cols == 0:
        return 0
    if m.rows > m.cols:
        m = m.transpose()
    r, _, _ = bareiss_echelon(integer_rows(m))
    return r


def nullity(m: RatMatrix) -> int:
    """Dimension of the right kernel, ``cols - rank``."""
    return m.cols - rank(m)


def rref(m: RatMatrix) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over the rationals with its pivot columns."""
    a = [list(r) for r in m.data]
    pivots = []
    r = 0
    for c in range(m.cols):
        p = next((i for i in range(r, m.rows) if a[i][c]), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        prow = a[r]
        for i in range(m.rows):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y if y else x for x, y in zip(a[i], prow)]
        pivots.append(c)
        r += 1
        if r == m.rows:
            break
    return a[:r], pivots


def nullspace(m: RatMatrix) -> RatMatrix:
    """Basis of the right kernel as the columns of a ``cols x nullity`` matrix."""
    red, pivots = rref(m)
    free = [j for j in range(m.cols) if j not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * m.cols
        v[f] = Fraction(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(v)
    return RatMatrix.from_columns(basis, rows=m.cols)


def left_nullspace(m: RatMatrix) -> RatMatrix:
    return nullspace(m.transpose())


def solve(a: RatMatrix, b: RatMatrix) -> RatMatrix:
    """Solve ``a x = b`` for square nonsingular ``a`` and several right sides."""
    if a.rows != a.cols:
        raise ShapeError("solve needs a square matrix")
    if b.rows != a.rows:
        raise ShapeError("right hand side has the wrong row count")
    n = a.rows
    aug = [list(ra) + list(rb) for ra, rb in zip(a.data, b.data)]
    width = n + b.cols
    for c in range(n):
        p = next((i for i in range(c, n) if aug[i][c]), None)
        if p is None:
            raise SingularMatrix(f"matrix is singular (rank deficiency found at column {c})")
        aug[c], aug[p] = aug[p], aug[c]
        inv = 1 / aug[c][c]
        prow = [x * inv if x else x for x in aug[c]]
        aug[c] = prow
        nz = [j for j in range(c, width) if prow[j]]
        for i in range(n):
            if i != c:
                row = aug[i]
                f = row[c]
                if f:
                    for j in nz:
                        row[j] -= f * prow[j]
    return RatMatrix(n, b.cols, [r[n:] for r in aug])


def invert(m: RatMatrix) -> RatMatrix:
    """Exact inverse; raises :class:`SingularMatrix` when rank deficient."""
    return solve(m, RatMatrix.identity(m.rows))


class _Echelon:
    """Incrementally maintained echelon basis used by :func:`complement_basis`."""

    def __init__(self, dim: int):
        self.dim = dim
        self.rows: list[tuple[int, list[Fraction]]] = []

    def reduce(self, v: list[Fraction]) -> list[Fraction]:
        v = list(v)
        for p, row in self.rows:
            if v[p]:
                f = v[p]
                v = [x - f * y if y else x for x, y in zip(v, row)]
        return v

    def add(self, v: Sequence[Fraction]) -> bool:
        v = self.reduce(v)
        p = next((i for i, x in enumerate(v) if x), None)
        if p is None:
            return False
        inv = 1 / v[p]
        v = [x * inv for x in v]
        self.rows.append((p, v))
        return True


def complement_basis(subspace: RatMatrix, ambient_dim: int | None = None) -> list[int]:
    """Indices of standard basis vectors completing ``subspace`` to the ambient space.

    ``subspace`` holds a basis in its columns.  The scan is greedy in index
    order, so the lowest admissible indices are returned.
    """
    n = subspace.rows if ambient_dim is None else ambient_dim
    if subspace.rows != n:
        raise ShapeError("subspace vectors do not live in the ambient space")
    ech = _Echelon(n)
    for col in subspace.columns():
        if not ech.add(col):
            raise DependentColumnsError("subspace columns are linearly dependent")
    chosen = []
    for i in range(n):
        e = [Fraction(0)] * n
        e[i] = Fraction(1)
        if ech.add(e):
            chosen.append(i)
        if len(ech.rows) == n:
            break
    return chosen
