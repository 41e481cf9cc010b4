"""Constructive normalization of quadratic forms with explicit witnesses.

Characteristic 2: a nondegenerate form in m variables normalizes to
x1*x2 + x3*x4 + ... with a trailing square when m is odd.  The algorithm
peels one hyperbolic pair at a time: pick a cross term, make its
coefficient 1, clear the two incident variable rows by shear substitutions,
then split the isolated binary block a*x^2 + x*y + b*y^2 with an
Artin-Schreier root of a*b (extending the field by degree 2 when the trace
obstruction is nonzero).  Odd characteristic: symmetric congruence
diagonalization followed by scaling each variable by an inverse square
root, extending by degree 2 per non-residue.

Every result carries an invertible witness g with
act_quadratic(embed(Q), g) exactly equal to the canonical form.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import gf
from .errors import (
    FieldMismatch,
    NoRoot,
    NonResidue,
    NotHomogeneous,
    OrderTooLarge,
    Singular,
    WrongDegree,
)
from .frobform import Polynomial
from .gf import FieldElement, FieldSpec
from .linalg import Matrix

MAX_TOTAL_DEGREE = 8


class QuadraticForm:
    """Degree-2 form with upper-triangular coefficient storage."""

    __slots__ = ("field", "n", "coeffs")

    def __init__(self, field: FieldSpec, n: int, coeffs):
        """coeffs: mapping (i, j) -> FieldElement with 0 <= i <= j < n."""
        table = {}
        for (i, j), c in dict(coeffs).items():
            if not 0 <= i <= j < n:
                raise ValueError("coefficients must be upper-triangular")
            if c.field != field:
                raise FieldMismatch("coefficient field mismatch")
            if c.code:
                table[(i, j)] = c
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "coeffs",
                           tuple(sorted(table.items())))

    def __setattr__(self, *a):
        raise AttributeError("QuadraticForm is immutable")

    def coeff(self, i: int, j: int) -> FieldElement:
        if i > j:
            i, j = j, i
        for (a, b), c in self.coeffs:
            if (a, b) == (i, j):
                return c
        return self.field.zero()

    def is_zero(self) -> bool:
        return not self.coeffs

    @staticmethod
    def from_polynomial(h: Polynomial) -> "QuadraticForm":
        if not h.is_homogeneous():
            raise NotHomogeneous("quadratic forms are homogeneous")
        if not h.is_zero() and h.degree() != 2:
            raise WrongDegree(f"degree {h.degree()} != 2")
        table = {}
        for exps, c in h.terms:
            support = [(i, e) for i, e in enumerate(exps) if e]
            if len(support) == 1:
                i = support[0][0]
                table[(i, i)] = c
            else:
                (i, _), (j, _) = support
                table[(i, j)] = c
        return QuadraticForm(h.field, h.nvars, table)

    def to_polynomial(self) -> Polynomial:
        terms = []
        for (i, j), c in self.coeffs:
            exps = [0] * self.n
            exps[i] += 1
            exps[j] += 1
            terms.append((tuple(exps), c))
        return Polynomial(self.field, self.n, terms)

    def embed(self, embedding: gf.Embedding) -> "QuadraticForm":
        return QuadraticForm(embedding.codomain, self.n,
                             {ij: embedding(c) for ij, c in self.coeffs})

    def __eq__(self, other):
        return (isinstance(other, QuadraticForm) and self.field == other.field
                and self.n == other.n and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.n, tuple((ij, c.code) for ij, c in self.coeffs)))

    def __repr__(self):
        return f"QuadraticForm({self.to_polynomial()!r})"


def act_quadratic(Q: QuadraticForm, g: Matrix) -> QuadraticForm:
    """Exact substitution x -> g x, re-collected upper-triangular."""
    if not g.is_invertible():
        raise Singular("coordinate change must be invertible")
    n = Q.n
    F = Q.field
    z = F.zero()
    out = {}
    for (i, j), c in Q.coeffs:
        gi = g.row(i)
        gj = g.row(j)
        for s in range(n):
            a = gi[s]
            if not a.code:
                continue
            for t in range(n):
                b = gj[t]
                if not b.code:
                    continue
                key = (s, t) if s <= t else (t, s)
                out[key] = out.get(key, z) + c * a * b
    return QuadraticForm(F, n, out)


@dataclass(frozen=True)
class QuadCanonical:
    """Canonical shape: s hyperbolic pairs, an optional square (char 2),
    or a sum of m squares with unit coefficients (odd characteristic)."""

    kind: str           # "zero" | "hyperbolic" | "hyperbolic_plus_square" | "diagonal_ones"
    pairs: int
    has_square: bool
    m: int              # embedding dimension
    n: int              # ambient variables

    def display(self) -> str:
        if self.kind == "zero":
            return "0"
        if self.kind == "diagonal_ones":
            return " + ".join(f"x{i + 1}^2" for i in range(self.m))
        parts = [f"x{2 * i + 1}*x{2 * i + 2}" for i in range(self.pairs)]
        if self.has_square:
            parts.append(f"x{self.m}^2")
        return " + ".join(parts)


def canonical_quadratic(n: int, m: int, field: FieldSpec) -> QuadraticForm:
    """The canonical form of embedding dimension m padded to n variables."""
    if m > n:
        raise ValueError("embedding dimension exceeds ambient dimension")
    one = field.one()
    table = {}
    if field.p == 2:
        for i in range(0, m - 1, 2):
            table[(i, i + 1)] = one
        if m % 2 == 1:
            table[(m - 1, m - 1)] = one
    else:
        for i in range(m):
            table[(i, i)] = one
    return QuadraticForm(field, n, table)


def quad_canonical_kind(n: int, m: int, p: int) -> QuadCanonical:
    if m == 0:
        return QuadCanonical("zero", 0, False, 0, n)
    if p != 2:
        return QuadCanonical("diagonal_ones", 0, False, m, n)
    if m % 2 == 0:
        return QuadCanonical("hyperbolic", m // 2, False, m, n)
    return QuadCanonical("hyperbolic_plus_square", m // 2, True, m, n)


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadNormalization:
    g: Matrix
    canonical: QuadCanonical
    extension_degree: int
    field: FieldSpec

    def to_json(self):
        return {
            "kind": self.canonical.kind,
            "pairs": self.canonical.pairs,
            "embedding_dimension": self.canonical.m,
            "display": self.canonical.display(),
            "extension_degree": self.extension_degree,
            "field": f"{self.field.p}^{self.field.k}",
            "witness": self.g.to_json(),
        }


def _elem(field: FieldSpec, n: int, updates) -> Matrix:
    rows = Matrix.identity(field, n).row_lists()
    for (i, j), c in updates.items():
        rows[i][j] = c
    return Matrix.from_rows(field, rows)


def _swap(field: FieldSpec, n: int, a: int, b: int) -> Matrix:
    rows = Matrix.identity(field, n).row_lists()
    if a != b:
        rows[a][a] = field.zero()
        rows[b][b] = field.zero()
        rows[a][b] = field.one()
        rows[b][a] = field.one()
    return Matrix.from_rows(field, rows)


class _Normalizer:
    """Mutable pipeline state: current form, accumulated witness, field."""

    def __init__(self, Q: QuadraticForm, max_total_degree: int):
        self.Q = Q
        self.g = Matrix.identity(Q.field, Q.n)
        self.field = Q.field
        self.ext = 1
        self.max_total_degree = max_total_degree

    def apply(self, T: Matrix):
        self.Q = act_quadratic(self.Q, T)
        self.g = self.g * T

    def extend(self):
        if self.field.k * 2 > self.max_total_degree:
            raise OrderTooLarge(
                f"normalization needs an extension beyond total degree "
                f"{self.max_total_degree}")
        K, emb = gf.extend(self.field, 2)
        self.Q = self.Q.embed(emb)
        self.g = self.g.embed(emb)
        self.field = K
        self.ext *= 2


def normalize(Q: QuadraticForm, *,
              max_total_degree: int = MAX_TOTAL_DEGREE) -> QuadNormalization:
    """Witness g and canonical shape with act_quadratic(embed(Q), g) exactly
    canonical.  Extends the field by degree 2 on demand (square roots in odd
    characteristic, Artin-Schreier roots in characteristic 2)."""
    st = _Normalizer(Q, max_total_degree)
    if Q.field.p == 2:
        m = _normalize_char2(st)
    else:
        m = _normalize_odd(st)
    canon = quad_canonical_kind(Q.n, m, Q.field.p)
    expected = canonical_quadratic(Q.n, m, st.field)
    if st.Q != expected:
        raise AssertionError("normalization lost exactness")
    return QuadNormalization(st.g, canon, st.ext, st.field)


def _cross_terms(Q: QuadraticForm, lo: int):
    return [(i, j) for (i, j), _ in Q.coeffs if i != j and i >= lo]


def _normalize_char2(st: _Normalizer) -> int:
    n = st.Q.n
    done = 0
    while done < n:
        window = [(i, j) for (i, j), _ in st.Q.coeffs if i >= done]
        if not window:
            return done
        cross = _cross_terms(st.Q, done)
        if not cross:
            # diagonal residue: a perfect square of one linear form
            return done + _square_residue(st, done)
        i, j = min(cross)
        F = st.field
        if i != done:
            st.apply(_swap(F, n, i, done))
        cross = _cross_terms(st.Q, done)
        j = min(b for a, b in cross if a == done)
        if j != done + 1:
            st.apply(_swap(F, n, j, done + 1))
        c = st.Q.coeff(done, done + 1)
        if c.code != 1:
            st.apply(_elem(F, n, {(done + 1, done + 1): c.inv()}))
        # clear x_done * x_k for k >= done+2
        shear = {}
        for k in range(done + 2, n):
            a1k = st.Q.coeff(done, k)
            if a1k.code:
                shear[(done + 1, k)] = a1k
        if shear:
            st.apply(_elem(F, n, shear))
        # clear x_{done+1} * x_k for k >= done+2
        rest = [k for k in range(done + 2, n) if st.Q.coeff(done + 1, k).code]
        if rest:
            k0 = rest[0]
            a = st.Q.coeff(done + 1, k0)
            if a.code != 1:
                st.apply(_elem(F, n, {(k0, k0): a.inv()}))
            if k0 != done + 2:
                st.apply(_swap(F, n, k0, done + 2))
            shear = {}
            for k in range(done + 3, n):
                a2k = st.Q.coeff(done + 1, k)
                if a2k.code:
                    shear[(done + 2, k)] = a2k
            if shear:
                st.apply(_elem(F, n, shear))
            st.apply(_elem(F, n, {(done, done + 2): st.field.one()}))
        _split_binary(st, done)
        done += 2
    return done


def _square_residue(st: _Normalizer, lo: int) -> int:
    """Diagonal-only residue sum c_ii x_i^2 = (sum sqrt(c_ii) x_i)^2.

    Moves the square onto x_lo; returns 1, or 0 for a zero residue."""
    n = st.Q.n
    F = st.field
    coeffs = [gf.sqrt(st.Q.coeff(i, i)) for i in range(n)]
    if not any(c.code for c in coeffs[lo:]):
        return 0
    # columns: first a vector with L(v) = 1, then a basis of ker L
    pivot = next(i for i in range(lo, n) if coeffs[i].code)
    cols = []
    v = [F.zero()] * n
    v[pivot] = coeffs[pivot].inv()
    cols.append(v)
    for i in range(lo, n):
        if i == pivot:
            continue
        w = [F.zero()] * n
        w[i] = F.one()
        if coeffs[i].code:
            w[pivot] = coeffs[i] * coeffs[pivot].inv()
        cols.append(w)
    rows = Matrix.identity(F, n).row_lists()
    for c_idx, col in enumerate(cols):
        for r_idx in range(n):
            rows[r_idx][lo + c_idx] = col[r_idx]
    st.apply(Matrix.from_rows(F, rows))
    return 1


def _split_binary(st: _Normalizer, d: int):
    """Turn a*x_d^2 + x_d*x_{d+1} + b*x_{d+1}^2 into the pair x_d*x_{d+1}."""
    n = st.Q.n
    while True:
        F = st.field
        a = st.Q.coeff(d, d)
        b = st.Q.coeff(d + 1, d + 1)
        if not a.code and not b.code:
            return
        if not a.code:
            st.apply(_elem(F, n, {(d, d + 1): b}))
            return
        if not b.code:
            st.apply(_elem(F, n, {(d + 1, d): a}))
            return
        try:
            s = gf.artin_schreier_root(a * b)
        except NoRoot:
            st.extend()
            continue
        alpha = gf.sqrt(a)
        lam = s * alpha.inv()
        mu = (s + F.one()) * alpha.inv()
        M = [[alpha, lam], [alpha, mu]]
        block = Matrix.from_rows(F, M).inverse()
        rows = Matrix.identity(F, n).row_lists()
        for r in range(2):
            for c in range(2):
                rows[d + r][d + c] = block[r, c]
        st.apply(Matrix.from_rows(F, rows))
        return


def _normalize_odd(st: _Normalizer) -> int:
    n = st.Q.n
    F = st.field
    half = F.from_int(2).inv()
    # symmetric congruence diagonalization
    for i in range(n):
        if not st.Q.coeff(i, i).code:
            j = next((j for j in range(i + 1, n) if st.Q.coeff(j, j).code), None)
            if j is not None:
                st.apply(_swap(st.field, n, i, j))
            else:
                cross = [(a, b) for (a, b), _ in st.Q.coeffs if a != b and a >= i]
                if not cross:
                    break
                a, b = min(cross)
                # substituting x_a -> x_a + x_b deposits the cross
                # coefficient on the diagonal entry (b, b)
                st.apply(_elem(st.field, n, {(a, b): st.field.one()}))
                if b != i:
                    st.apply(_swap(st.field, n, i, b))
        piv = st.Q.coeff(i, i)
        if not piv.code:
            continue
        updates = {}
        for j in range(i + 1, n):
            cij = st.Q.coeff(i, j)
            if cij.code:
                updates[(i, j)] = -(cij * half) * piv.inv()
        if updates:
            st.apply(_elem(st.field, n, updates))
    # scale the nonzero diagonal entries to 1, extending per non-residue
    i = 0
    while i < n:
        lam = st.Q.coeff(i, i)
        if lam.code:
            try:
                root = gf.sqrt(lam)
            except NonResidue:
                st.extend()
                continue
            if root.code != 1:
                st.apply(_elem(st.field, n, {(i, i): root.inv()}))
        i += 1
    # compact the used variables to the front
    used = [i for i in range(n) if st.Q.coeff(i, i).code]
    m = len(used)
    for target, src in enumerate(used):
        if src != target:
            st.apply(_swap(st.field, n, src, target))
    return m


def quad_embedding_dimension(Q: QuadraticForm) -> int:
    """Least number of variables after an invertible change of coordinates.

    Odd characteristic: the rank of the symmetric Gram matrix.
    Characteristic 2: read off the canonical form."""
    if Q.field.p != 2:
        F = Q.field
        half = F.from_int(2).inv()
        rows = [[F.zero()] * Q.n for _ in range(Q.n)]
        for (i, j), c in Q.coeffs:
            if i == j:
                rows[i][i] = c
            else:
                rows[i][j] = c * half
                rows[j][i] = c * half
        return Matrix.from_rows(F, rows).rank()
    return normalize(Q).canonical.m
