"""Frobenius forms: h = sum x_i^q L_i with q = p^e, e >= 1.

A form is carried by its unique n x n coefficient matrix A, with
h = [x_1^q .. x_n^q] A [x_1 .. x_n]^T.  This module provides recognition
from polynomials, expansion back to polynomials, the coordinate-change
action, and the invariants: rank, embedding dimension, singular-locus point
counts, sparseness and the Hermitian test.

Polynomial text grammar (shared with the CLI): variables x1..x9, ^ for
powers, * optional between factors, + between terms, coefficients as field
element strings, whitespace ignored.  Example: "x1^2*x5 + x2^2*x4 + x3^3".
"""

from __future__ import annotations

from dataclasses import dataclass

from . import gf, linalg
from .errors import (
    CoefficientParseError,
    FieldMismatch,
    NotFrobenius,
    NotHomogeneous,
    OrderTooLarge,
    PolynomialSyntaxError,
    Singular,
    UnknownVariable,
    WrongDegree,
)
from .gf import FieldElement, FieldSpec
from .linalg import Matrix


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

class Polynomial:
    """Multivariate polynomial with exact coefficients.

    Terms are (exponent tuple, nonzero coefficient) pairs, sorted by
    descending exponent tuple; no duplicates, no zero coefficients.
    """

    __slots__ = ("field", "nvars", "terms")

    def __init__(self, field: FieldSpec, nvars: int, terms):
        merged: dict = {}
        for exps, c in terms:
            exps = tuple(exps)
            if len(exps) != nvars:
                raise ValueError("exponent vector length mismatch")
            if not c.code:
                continue
            if exps in merged:
                s = merged[exps] + c
                if s.code:
                    merged[exps] = s
                else:
                    del merged[exps]
            else:
                merged[exps] = c
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "terms",
                           tuple(sorted(merged.items(), reverse=True)))

    def __setattr__(self, *a):
        raise AttributeError("Polynomial is immutable")

    @staticmethod
    def zero(field: FieldSpec, nvars: int) -> "Polynomial":
        return Polynomial(field, nvars, [])

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=-1)

    def is_homogeneous(self) -> bool:
        degs = {sum(e) for e, _ in self.terms}
        return len(degs) <= 1

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if self.field != other.field or self.nvars != other.nvars:
            raise FieldMismatch("polynomial rings differ")
        return Polynomial(self.field, self.nvars, self.terms + other.terms)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        if self.field != other.field or self.nvars != other.nvars:
            raise FieldMismatch("polynomial rings differ")
        terms = []
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                terms.append((tuple(a + b for a, b in zip(e1, e2)), c1 * c2))
        return Polynomial(self.field, self.nvars, terms)

    def scale(self, c: FieldElement) -> "Polynomial":
        return Polynomial(self.field, self.nvars,
                          [(e, c * x) for e, x in self.terms])

    def __pow__(self, m: int) -> "Polynomial":
        out = Polynomial(self.field, self.nvars,
                         [((0,) * self.nvars, self.field.one())])
        for _ in range(m):
            out = out * self
        return out

    def evaluate(self, point) -> FieldElement:
        acc = self.field.zero()
        for exps, c in self.terms:
            v = c
            for x, e in zip(point, exps):
                if e:
                    v = v * x ** e
            acc = acc + v
        return acc

    def substitute(self, g: Matrix) -> "Polynomial":
        """Substitute x -> g x (generic expansion; use for cross-checks)."""
        lin = [Polynomial(self.field, self.nvars,
                          [((0,) * j + (1,) + (0,) * (self.nvars - j - 1),
                            g[i, j]) for j in range(self.nvars)])
               for i in range(self.nvars)]
        out = Polynomial.zero(self.field, self.nvars)
        for exps, c in self.terms:
            term = Polynomial(self.field, self.nvars,
                              [((0,) * self.nvars, c)])
            for i, e in enumerate(exps):
                if e:
                    term = term * lin[i] ** e
            out = out + term
        return out

    def embed(self, embedding: gf.Embedding) -> "Polynomial":
        return Polynomial(embedding.codomain, self.nvars,
                          [(e, embedding(c)) for e, c in self.terms])

    def __eq__(self, other):
        return (isinstance(other, Polynomial) and self.field == other.field
                and self.nvars == other.nvars and self.terms == other.terms)

    def __hash__(self):
        return hash((self.nvars, tuple((e, c.code) for e, c in self.terms)))

    def __repr__(self):
        return format_polynomial(self)


def format_polynomial(poly: Polynomial) -> str:
    if not poly.terms:
        return "0"
    parts = []
    for exps, c in poly.terms:
        factors = []
        cs = gf.format_element(c)
        if not any(exps):
            factors.append(cs if "+" not in cs else f"({cs})")
        elif cs != "1":
            factors.append(cs if "+" not in cs and "t" not in cs else f"({cs})")
        for i, e in enumerate(exps):
            if e == 1:
                factors.append(f"x{i + 1}")
            elif e > 1:
                factors.append(f"x{i + 1}^{e}")
        parts.append("*".join(factors))
    return " + ".join(parts)


# ---------------------------------------------------------------------------
# polynomial parser
# ---------------------------------------------------------------------------

def parse_polynomial(text: str, field: FieldSpec, nvars: int | None = None) -> Polynomial:
    """Parse the shared text grammar into a canonical Polynomial.

    When nvars is None the variable count is the highest index mentioned.
    """
    terms, maxvar = _parse_terms(text, field)
    if nvars is None:
        nvars = maxvar
    elif maxvar > nvars:
        raise UnknownVariable(f"variable x{maxvar} beyond nvars={nvars}", 0)
    fixed = [(exps[:nvars] + (0,) * (nvars - len(exps)), c) for exps, c in terms]
    return Polynomial(field, nvars, fixed)


def _parse_terms(text: str, field: FieldSpec):
    s = "".join(text.split())
    if not s:
        raise PolynomialSyntaxError("empty polynomial", 0)
    terms = []
    maxvar = 0
    pos = 0
    while pos < len(s):
        sign = 1
        if s[pos] in "+-":
            sign = -1 if s[pos] == "-" else 1
            pos += 1
            if pos == len(s):
                raise PolynomialSyntaxError("dangling operator", pos)
        coeff = field.from_int(sign)
        exps = [0] * 9
        saw_factor = False
        while pos < len(s) and s[pos] not in "+-":
            ch = s[pos]
            if ch == "*":
                pos += 1
                if pos == len(s) or s[pos] in "+-*":
                    raise PolynomialSyntaxError("dangling '*'", pos)
                continue
            if ch == "x":
                if pos + 1 >= len(s) or not s[pos + 1].isdigit():
                    raise PolynomialSyntaxError("variable needs an index", pos)
                idx = int(s[pos + 1])
                if idx == 0:
                    raise UnknownVariable("variables are x1..x9", pos)
                pos += 2
                e = 1
                if pos < len(s) and s[pos] == "^":
                    pos += 1
                    start = pos
                    while pos < len(s) and s[pos].isdigit():
                        pos += 1
                    if pos == start:
                        raise PolynomialSyntaxError("missing exponent", pos)
                    e = int(s[start:pos])
                exps[idx - 1] += e
                maxvar = max(maxvar, idx)
                saw_factor = True
                continue
            if ch == "(":
                depth = 1
                j = pos + 1
                while j < len(s) and depth:
                    if s[j] == "(":
                        depth += 1
                    elif s[j] == ")":
                        depth -= 1
                    j += 1
                if depth:
                    raise PolynomialSyntaxError("unbalanced parenthesis", pos)
                inner = s[pos + 1:j - 1]
                try:
                    c = gf.parse_element(inner, field)
                except CoefficientParseError as err:
                    raise CoefficientParseError(
                        f"bad coefficient {inner!r}: {err}", pos) from err
                coeff = coeff * c
                pos = j
                saw_factor = True
                continue
            if ch.isdigit() or ch == "t":
                start = pos
                while pos < len(s) and (s[pos].isdigit() or s[pos] in "t^"):
                    # an exponent after t is part of the coefficient;
                    # a digit run before x is a constant factor
                    if s[pos] == "^" and (pos + 1 == len(s) or not s[pos + 1].isdigit()):
                        raise PolynomialSyntaxError("missing exponent", pos)
                    pos += 1
                piece = s[start:pos]
                try:
                    c = gf.parse_element(piece, field)
                except CoefficientParseError as err:
                    raise CoefficientParseError(
                        f"bad coefficient {piece!r}: {err}", start) from err
                coeff = coeff * c
                saw_factor = True
                continue
            raise PolynomialSyntaxError(f"unexpected character {ch!r}", pos)
        if not saw_factor:
            raise PolynomialSyntaxError("empty term", pos)
        terms.append((tuple(exps), coeff))
    return terms, maxvar


# ---------------------------------------------------------------------------
# Frobenius forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrobeniusForm:
    """A Frobenius form (field, n, e, A) with q = p^e, e >= 1."""

    field: FieldSpec
    n: int
    e: int
    A: Matrix

    def __post_init__(self):
        if self.e < 1:
            raise ValueError("e must be >= 1 (e = 0 is a quadratic form)")
        if self.A.rows != self.n or self.A.cols != self.n:
            raise ValueError("matrix shape must be n x n")
        if self.A.field != self.field:
            raise FieldMismatch("matrix field differs from form field")

    @property
    def q(self) -> int:
        return self.field.p ** self.e

    @staticmethod
    def from_matrix(A: Matrix, e: int) -> "FrobeniusForm":
        return FrobeniusForm(A.field, A.rows, e, A)

    def embed(self, embedding: gf.Embedding) -> "FrobeniusForm":
        return FrobeniusForm(embedding.codomain, self.n, self.e,
                             self.A.embed(embedding))

    def __repr__(self):
        return f"FrobeniusForm(q={self.q}, {format_polynomial(to_polynomial(self))})"


def to_polynomial(f: FrobeniusForm) -> Polynomial:
    """Expand sum a_ij x_i^q x_j (diagonal terms merge into x_i^(q+1))."""
    q = f.q
    terms = []
    for i in range(f.n):
        for j in range(f.n):
            c = f.A[i, j]
            if not c.code:
                continue
            exps = [0] * f.n
            exps[i] += q
            exps[j] += 1
            terms.append((tuple(exps), c))
    return Polynomial(f.field, f.n, terms)


def from_polynomial(h: Polynomial, e: int) -> FrobeniusForm:
    """Recognize h as a Frobenius form; the matrix is unique since q > 1."""
    if e < 1:
        raise ValueError("e must be >= 1")
    q = h.field.p ** e
    n = h.nvars
    if not h.is_homogeneous():
        raise NotHomogeneous("Frobenius forms are homogeneous")
    if not h.is_zero() and h.degree() != q + 1:
        raise WrongDegree(f"degree {h.degree()} != p^e + 1 = {q + 1}")
    rows = [[h.field.zero()] * n for _ in range(n)]
    for exps, c in h.terms:
        support = [(i, ex) for i, ex in enumerate(exps) if ex]
        if len(support) == 1 and support[0][1] == q + 1:
            i = support[0][0]
            rows[i][i] = c
        elif (len(support) == 2
              and sorted(ex for _, ex in support) == [1, q]):
            (i1, e1), (i2, e2) = support
            i, j = (i1, i2) if e1 == q else (i2, i1)
            rows[i][j] = c
        else:
            raise NotFrobenius(
                f"monomial {exps} is not of the shape x_i^q * x_j")
    return FrobeniusForm(h.field, n, e, Matrix.from_rows(h.field, rows))


def act(f: FrobeniusForm, g: Matrix) -> FrobeniusForm:
    """The form with matrix (g^[q])^T A g; g must be invertible."""
    if not g.is_invertible():
        raise Singular("coordinate change must be invertible")
    return FrobeniusForm(f.field, f.n, f.e,
                         linalg.twisted_congruence(f.A, g, f.e))


def rank(f: FrobeniusForm) -> int:
    return f.A.rank()


def _phi_inv_space(f: FrobeniusForm, basis):
    """Preimage under the entrywise q-power map of a subspace basis."""
    return [tuple(gf.inv_frobenius(x, f.e) for x in v) for v in basis]


def removable_subspace(f: FrobeniusForm):
    """W = ker A  intersect  phi^{-1}(left-ker A).

    A coordinate is removable by a change of basis exactly when its basis
    vector kills both its column (g e_j in ker A) and its row ((g e_j)^[q]
    in the left kernel); W is the maximal such subspace.
    """
    right = f.A.right_kernel_basis()
    left = _phi_inv_space(f, f.A.left_kernel_basis())
    return linalg.subspace_intersection(right, left, f.field, f.n)


def embedding_dimension(f: FrobeniusForm) -> int:
    return f.n - len(removable_subspace(f))


def reduce_to_embdim(f: FrobeniusForm) -> tuple[Matrix, FrobeniusForm]:
    """g whose last n-m columns span W, and the embedded m-variable form."""
    W = removable_subspace(f)
    m = f.n - len(W)
    F = f.field
    cols = []
    taken = linalg.Matrix.zeros(F, 0, f.n)
    rows_taken = []
    for i in range(f.n):
        e_i = tuple(F.one() if j == i else F.zero() for j in range(f.n))
        cand = rows_taken + [list(e_i)] + [list(w) for w in W]
        if Matrix.from_rows(F, cand).rank() == len(cand):
            rows_taken.append(list(e_i))
            cols.append(e_i)
        if len(cols) == m:
            break
    g = Matrix.from_rows(F, [list(c) for c in cols] + [list(w) for w in W]).transpose()
    B = linalg.twisted_congruence(f.A, g, f.e)
    for i in range(f.n):
        for j in range(f.n):
            if (i >= m or j >= m) and B[i, j].code:
                raise AssertionError("reduction failed to zero dead rows/cols")
    core = Matrix(F, m, m, [B[i, j] for i in range(m) for j in range(m)])
    return g, FrobeniusForm(F, m, f.e, core)


def singular_cone_count(f: FrobeniusForm, m: int = 1, *,
                        order_bound: int = gf.DEFAULT_ORDER_BOUND) -> int:
    """Count points of GF(p^(k*m))^n where every partial derivative vanishes.

    The gradient at v is (v^[q])^T A, so the count always equals
    (p^(k*m))^(n - rank A); this routine counts by enumeration so it can be
    checked against that law.
    """
    K, emb = gf.extend(f.field, m, order_bound=order_bound)
    if K.order ** f.n > (1 << 26):
        raise OrderTooLarge("point enumeration beyond desk scale")
    A = f.A.embed(emb) if m > 1 else f.A
    import itertools as _it
    count = 0
    els = list(K.elements())
    n = f.n
    for point in _it.product(els, repeat=n):
        vq = [gf.frobenius(x, f.e) for x in point]
        singular = True
        for j in range(n):
            acc = K.zero()
            for i in range(n):
                a = A[i, j]
                if a.code and vq[i].code:
                    acc = acc + vq[i] * a
            if acc.code:
                singular = False
                break
        if singular:
            count += 1
    return count


def is_hermitian(f: FrobeniusForm) -> bool:
    """True iff A^T = A^[q]."""
    return f.A.transpose() == linalg.frobenius_twist(f.A, f.e)


def sparse_pattern_of(f: FrobeniusForm):
    """The SparsePattern of A if A is sparse in the sense of the structure
    theorem (rows beyond the r-th zero; exactly r entries, all equal to 1,
    at positions (i, j_i) with strictly decreasing j_i); None otherwise."""
    from .classify import SparsePattern  # local import to avoid a cycle
    one = f.field.one()
    js = []
    n = f.n
    seen_zero_row = False
    for i in range(n):
        row = f.A.row(i)
        nonzero = [j for j, x in enumerate(row) if x.code]
        if not nonzero:
            seen_zero_row = True
            continue
        if seen_zero_row:
            return None  # a nonzero row after a zero row violates condition 1
        if len(nonzero) != 1 or row[nonzero[0]] != one:
            return None
        js.append(nonzero[0] + 1)
    if any(a <= b for a, b in zip(js, js[1:])):
        return None
    return SparsePattern(n=n, r=len(js), js=tuple(js))
