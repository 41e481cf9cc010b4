"""Exact linear algebra over a FieldSpec.

Matrices are immutable, entries stored row-major.  Echelon conventions are
fixed (scan for the first nonzero pivot top-down, normalize pivots to 1,
reduce above and below) so ranks, kernel bases and witnesses are
reproducible bit for bit.

Besides the generic routines this module provides the two ingredients of the
twisted congruence action on Frobenius-form matrices: the entrywise p^e-power
twist g^[q] and A -> (g^[q])^T A g itself, plus a generating set of GL_n used
by the orbit enumeration.
"""

from __future__ import annotations

from . import gf
from .errors import DimensionMismatch, FieldMismatch, Singular
from .gf import FieldElement, FieldSpec


class Matrix:
    """Immutable exact matrix over a finite field."""

    __slots__ = ("field", "rows", "cols", "entries")

    def __init__(self, field: FieldSpec, rows: int, cols: int, entries):
        entries = tuple(entries)
        if len(entries) != rows * cols:
            raise DimensionMismatch(
                f"{rows}x{cols} matrix needs {rows * cols} entries, got {len(entries)}")
        for x in entries:
            if x.field != field:
                raise FieldMismatch("entry field does not match matrix field")
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "entries", entries)

    def __setattr__(self, *a):
        raise AttributeError("Matrix is immutable")

    # -- construction -------------------------------------------------------

    @staticmethod
    def from_rows(field: FieldSpec, rows) -> "Matrix":
        rows = [list(r) for r in rows]
        n = len(rows)
        m = len(rows[0]) if rows else 0
        flat = []
        for r in rows:
            if len(r) != m:
                raise DimensionMismatch("ragged rows")
            for x in r:
                flat.append(x if isinstance(x, FieldElement) else field.from_int(x))
        return Matrix(field, n, m, flat)

    @staticmethod
    def zeros(field: FieldSpec, rows: int, cols: int) -> "Matrix":
        z = field.zero()
        return Matrix(field, rows, cols, [z] * (rows * cols))

    @staticmethod
    def identity(field: FieldSpec, n: int) -> "Matrix":
        z, o = field.zero(), field.one()
        return Matrix(field, n, n, [o if i == j else z for i in range(n) for j in range(n)])

    # -- access --------------------------------------------------------------

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int):
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int):
        return tuple(self.entries[i * self.cols + j] for i in range(self.rows))

    def row_lists(self):
        return [list(self.row(i)) for i in range(self.rows)]

    def is_zero(self) -> bool:
        return not any(self.entries)

    # -- arithmetic ----------------------------------------------------------

    def _require_same_field(self, other: "Matrix"):
        if self.field != other.field:
            raise FieldMismatch("matrices over different fields")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._require_same_field(other)
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionMismatch("shape mismatch in addition")
        return Matrix(self.field, self.rows, self.cols,
                      [a + b for a, b in zip(self.entries, other.entries)])

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._require_same_field(other)
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionMismatch("shape mismatch in subtraction")
        return Matrix(self.field, self.rows, self.cols,
                      [a - b for a, b in zip(self.entries, other.entries)])

    def __mul__(self, other: "Matrix") -> "Matrix":
        self._require_same_field(other)
        if self.cols != other.rows:
            raise DimensionMismatch(
                f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        n, k, m = self.rows, self.cols, other.cols
        F = self.field
        z = F.zero()
        out = []
        for i in range(n):
            ri = self.entries[i * k:(i + 1) * k]
            for j in range(m):
                acc = z
                for s in range(k):
                    a = ri[s]
                    if a.code:
                        b = other.entries[s * m + j]
                        if b.code:
                            acc = acc + a * b
                out.append(acc)
        return Matrix(F, n, m, out)

    def scale(self, c: FieldElement) -> "Matrix":
        return Matrix(self.field, self.rows, self.cols, [c * x for x in self.entries])

    def transpose(self) -> "Matrix":
        return Matrix(self.field, self.cols, self.rows,
                      [self.entries[i * self.cols + j]
                       for j in range(self.cols) for i in range(self.rows)])

    def map_entries(self, fn) -> "Matrix":
        out = [fn(x) for x in self.entries]
        field = out[0].field if out else self.field
        return Matrix(field, self.rows, self.cols, out)

    def embed(self, embedding: gf.Embedding) -> "Matrix":
        return Matrix(embedding.codomain, self.rows, self.cols,
                      [embedding(x) for x in self.entries])

    # -- elimination ----------------------------------------------------------

    def rref(self) -> tuple["Matrix", list[int]]:
        """Reduced row echelon form and the list of pivot columns."""
        F = self.field
        rows = self.row_lists()
        n, m = self.rows, self.cols
        pivots = []
        r = 0
        for c in range(m):
            piv = next((i for i in range(r, n) if rows[i][c].code), None)
            if piv is None:
                continue
            rows[r], rows[piv] = rows[piv], rows[r]
            inv = rows[r][c].inv()
            rows[r] = [inv * x for x in rows[r]]
            for i in range(n):
                if i != r and rows[i][c].code:
                    f = rows[i][c]
                    rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
            pivots.append(c)
            r += 1
        return Matrix.from_rows(F, rows) if rows else self, pivots

    def rank(self) -> int:
        return len(self.rref()[1])

    def right_kernel_basis(self) -> list[tuple[FieldElement, ...]]:
        """Deterministic reduced basis of {v : Av = 0}."""
        R, pivots = self.rref()
        F = self.field
        m = self.cols
        free = [c for c in range(m) if c not in pivots]
        basis = []
        for fc in free:
            v = [F.zero()] * m
            v[fc] = F.one()
            for r, pc in enumerate(pivots):
                v[pc] = -R[r, fc]
            basis.append(tuple(v))
        return basis

    def left_kernel_basis(self) -> list[tuple[FieldElement, ...]]:
        return self.transpose().right_kernel_basis()

    def inverse(self) -> "Matrix":
        if self.rows != self.cols:
            raise DimensionMismatch("only square matrices invert")
        n = self.rows
        F = self.field
        aug = Matrix(F, n, 2 * n,
                     [x for i in range(n)
                      for x in list(self.row(i)) + list(Matrix.identity(F, n).row(i))])
        R, pivots = aug.rref()
        if pivots[:n] != list(range(n)):
            raise Singular("matrix is singular")
        return Matrix(F, n, n, [R[i, n + j] for i in range(n) for j in range(n)])

    def is_invertible(self) -> bool:
        return self.rows == self.cols and self.rank() == self.rows

    # -- dunder ---------------------------------------------------------------

    def __eq__(self, other):
        return (isinstance(other, Matrix) and self.field == other.field
                and self.rows == other.rows and self.cols == other.cols
                and self.entries == other.entries)

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(x.code for x in self.entries)))

    def __repr__(self):
        body = "; ".join(
            " ".join(repr(x) for x in self.row(i)) for i in range(self.rows))
        return f"Matrix({self.field}, [{body}])"

    # -- JSON wire format ------------------------------------------------------

    def to_json(self) -> list[list[str]]:
        return [[gf.format_element(x) for x in self.row(i)] for i in range(self.rows)]

    @staticmethod
    def from_json(field: FieldSpec, data) -> "Matrix":
        return Matrix.from_rows(
            field, [[gf.parse_element(s, field) for s in row] for row in data])


# ---------------------------------------------------------------------------
# the Frobenius twist and the twisted congruence action
# ---------------------------------------------------------------------------

def frobenius_twist(M: Matrix, e: int) -> Matrix:
    """g^[p^e]: raise every entry to the p^e-th power."""
    return M.map_entries(lambda x: gf.frobenius(x, e))


def twisted_congruence(A: Matrix, g: Matrix, e: int) -> Matrix:
    """(g^[p^e])^T A g, the matrix action induced by x -> g x."""
    if A.rows != A.cols:
        raise DimensionMismatch("A must be square")
    if g.rows != g.cols or g.rows != A.rows:
        raise DimensionMismatch("g must be square of matching size")
    A._require_same_field(g)
    return frobenius_twist(g, e).transpose() * A * g


# ---------------------------------------------------------------------------
# subspaces
# ---------------------------------------------------------------------------

def _span_matrix(field: FieldSpec, vectors, n: int) -> Matrix:
    if not vectors:
        return Matrix.zeros(field, 0, n)
    return Matrix.from_rows(field, [list(v) for v in vectors])


def reduced_basis(field: FieldSpec, vectors, n: int) -> list[tuple[FieldElement, ...]]:
    """Canonical (RREF) basis of the span of the given vectors."""
    R, pivots = _span_matrix(field, vectors, n).rref()
    return [tuple(R.row(i)) for i in range(len(pivots))]


def subspace_intersection(U, V, field: FieldSpec, n: int) -> list[tuple[FieldElement, ...]]:
    """Deterministic reduced basis of span(U) intersect span(V)."""
    for v in list(U) + list(V):
        if len(v) != n:
            raise DimensionMismatch("ambient dimensions differ")
    if not U or not V:
        return []
    # columns: U vectors then V vectors; kernel elements (a | b) satisfy
    # sum a_i U_i = sum b_j V_j, and that common value lies in the intersection
    cols = [list(u) for u in U] + [[-x for x in v] for v in V]
    M = Matrix.from_rows(field, cols).transpose()
    vecs = []
    for ker in M.right_kernel_basis():
        a = ker[:len(U)]
        vec = [field.zero()] * n
        for c, u in zip(a, U):
            if c.code:
                vec = [x + c * y for x, y in zip(vec, u)]
        if any(x.code for x in vec):
            vecs.append(tuple(vec))
    return reduced_basis(field, vecs, n)


# ---------------------------------------------------------------------------
# GL_n generators
# ---------------------------------------------------------------------------

def gl_generators(n: int, F: FieldSpec) -> list[Matrix]:
    """Transvections I + c E_ij plus diag(u, 1, ..., 1) for u a generator
    of the multiplicative group.

    Transvections generate SL_n; the diagonal extends to GL_n.  Over F_2 the
    unit group is trivial and the diagonal degenerates to the identity.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    gens = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            for c in F.nonzero_elements():
                g = Matrix.identity(F, n).row_lists()
                g[i][j] = c
                gens.append(Matrix.from_rows(F, g))
    u = F.primitive_element()
    g = Matrix.identity(F, n).row_lists()
    g[0][0] = u
    gens.append(Matrix.from_rows(F, g))
    return gens


def mulclose(gens, maxsize: int | None = None) -> set:
    """Close a set of matrices under multiplication (small groups only)."""
    els = set(gens)
    frontier = list(els)
    while frontier:
        new = []
        for a in gens:
            for b in frontier:
                c = a * b
                if c not in els:
                    els.add(c)
                    new.append(c)
                    if maxsize is not None and len(els) > maxsize:
                        raise RuntimeError("mulclose exceeded maxsize")
        frontier = new
    return els
