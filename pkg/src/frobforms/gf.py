"""Exact arithmetic in finite fields GF(p^k).

Elements are stored in the polynomial basis: an element is a vector of k
coefficients in F_p, packed into a single integer code with base-p digits
(digit i = coefficient of t^i).  The modulus is the least monic irreducible
polynomial of degree k with nonzero constant term, coefficients compared from
the constant term up, so field construction is deterministic across runs.

The canonical element order used everywhere ("least root", "least element")
compares coefficient vectors lexicographically with the low-degree
coefficient most significant.  `FieldSpec.elements()` iterates in exactly
this order.

All values are immutable and all operations are pure functions.
"""

from __future__ import annotations

import functools
import itertools

from .errors import (
    CoefficientParseError,
    DivisionByZero,
    FieldMismatch,
    NonResidue,
    NoRoot,
    NotPrime,
    OrderTooLarge,
)

# Desk-scale guard: fields larger than this are refused.
DEFAULT_ORDER_BOUND = 1 << 20

# Below this order the odd-characteristic square root scans exhaustively;
# above it Tonelli-Shanks is used.
SQRT_EXHAUSTIVE_BOUND = 1 << 16

# Multiplication tables are materialized for fields up to this order.
_TABLE_BOUND = 256


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


# ---------------------------------------------------------------------------
# dense F_p[t] helpers on coefficient lists (low degree first)
# ---------------------------------------------------------------------------

def _poly_trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a, m, p):
    """Remainder of a modulo the monic polynomial m, over F_p."""
    a = list(a)
    dm = len(m) - 1
    while len(a) > dm:
        c = a[-1]
        if c:
            shift = len(a) - 1 - dm
            for i, mi in enumerate(m):
                a[shift + i] = (a[shift + i] - c * mi) % p
        a.pop()
    return _poly_trim(a)


def _poly_is_irreducible(m, p: int) -> bool:
    """Trial division by all monic polynomials of degree <= deg(m)/2."""
    k = len(m) - 1
    if k == 1:
        return True
    for d in range(1, k // 2 + 1):
        for tail in itertools.product(range(p), repeat=d):
            divisor = list(tail) + [1]
            if not _poly_mod(m, divisor, p):
                return False
    return True


class FieldSpec:
    """A concrete finite field GF(p^k) with exact arithmetic.

    Do not call directly; use `field_create` (which caches, so specs built
    from the same parameters are identical objects).
    """

    __slots__ = (
        "p", "k", "modulus", "order", "_mul_tab", "_inv_tab",
        "_frob_exps", "_as_solver", "_primitive",
    )

    def __init__(self, p: int, k: int, modulus: tuple[int, ...]):
        self.p = p
        self.k = k
        self.modulus = modulus
        self.order = p ** k
        self._mul_tab = None
        self._inv_tab = None
        self._frob_exps = {}
        self._as_solver = None
        self._primitive = None

    # -- element construction ---------------------------------------------

    def from_code(self, code: int) -> FieldElement:
        if not 0 <= code < self.order:
            raise ValueError(f"element code {code} out of range for {self}")
        return FieldElement(self, code)

    def from_coeffs(self, coeffs) -> FieldElement:
        code = 0
        for i, c in enumerate(coeffs):
            code += (c % self.p) * self.p ** i
        return FieldElement(self, code)

    def from_int(self, c: int) -> FieldElement:
        """The constant c mod p, as a field element."""
        return FieldElement(self, c % self.p)

    def zero(self) -> FieldElement:
        return FieldElement(self, 0)

    def one(self) -> FieldElement:
        return FieldElement(self, 1)

    def gen(self) -> FieldElement:
        """The class of t (equals -constant term when k = 1)."""
        if self.k == 1:
            return FieldElement(self, (-self.modulus[0]) % self.p)
        return FieldElement(self, self.p)

    def elements(self):
        """All elements in canonical element order (c_0 most significant)."""
        powers = [self.p ** i for i in range(self.k)]
        for digits in itertools.product(range(self.p), repeat=self.k):
            yield FieldElement(self, sum(d * w for d, w in zip(digits, powers)))

    def nonzero_elements(self):
        return (a for a in self.elements() if a.code)

    # -- raw code arithmetic ------------------------------------------------

    def _coeffs(self, code: int):
        p = self.p
        out = []
        for _ in range(self.k):
            out.append(code % p)
            code //= p
        return out

    def _add_codes(self, a: int, b: int) -> int:
        p = self.p
        if p == 2:
            return a ^ b
        out = 0
        w = 1
        for _ in range(self.k):
            out += ((a % p + b % p) % p) * w
            a //= p
            b //= p
            w *= p
        return out

    def _neg_code(self, a: int) -> int:
        p = self.p
        if p == 2:
            return a
        out = 0
        w = 1
        for _ in range(self.k):
            out += ((-a) % p) * w
            a //= p
            w *= p
        return out

    def _mul_codes_raw(self, a: int, b: int) -> int:
        p = self.p
        if self.k == 1:
            return (a * b) % p
        ca = self._coeffs(a)
        cb = self._coeffs(b)
        prod = [0] * (2 * self.k - 1)
        for i, x in enumerate(ca):
            if x:
                for j, y in enumerate(cb):
                    prod[i + j] += x * y
        prod = [c % p for c in prod]
        rem = _poly_mod(prod, self.modulus, p)
        code = 0
        for i, c in enumerate(rem):
            code += c * p ** i
        return code

    def _mul_codes(self, a: int, b: int) -> int:
        tab = self._mul_tab
        if tab is not None:
            return tab[a * self.order + b]
        if self.order <= _TABLE_BOUND:
            n = self.order
            tab = [0] * (n * n)
            for x in range(n):
                for y in range(x, n):
                    v = self._mul_codes_raw(x, y)
                    tab[x * n + y] = v
                    tab[y * n + x] = v
            self._mul_tab = tab
            return tab[a * self.order + b]
        return self._mul_codes_raw(a, b)

    def _pow_code(self, a: int, m: int) -> int:
        if m == 0:
            return 1
        if a == 0:
            return 0
        m %= self.order - 1
        if m == 0:
            return 1
        result = 1
        base = a
        while m:
            if m & 1:
                result = self._mul_codes(result, base)
            base = self._mul_codes(base, base)
            m >>= 1
        return result

    def _inv_code(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero(f"cannot invert 0 in {self}")
        if self._inv_tab is None and self.order <= _TABLE_BOUND:
            self._inv_tab = [0] * self.order
            for x in range(1, self.order):
                self._inv_tab[x] = self._pow_code(x, self.order - 2)
        if self._inv_tab is not None:
            return self._inv_tab[a]
        return self._pow_code(a, self.order - 2)

    # -- ordering ------------------------------------------------------------

    def order_key(self, code: int) -> int:
        """Integer whose natural order equals the canonical element order."""
        key = 0
        p = self.p
        for _ in range(self.k):
            key = key * p + code % p
            code //= p
        return key

    def primitive_element(self) -> FieldElement:
        """Least generator of the multiplicative group (1 when order = 2)."""
        if self._primitive is None:
            n = self.order - 1
            if n == 1:
                self._primitive = FieldElement(self, 1)
            else:
                factors = set()
                m, d = n, 2
                while d * d <= m:
                    while m % d == 0:
                        factors.add(d)
                        m //= d
                    d += 1
                if m > 1:
                    factors.add(m)
                for a in self.elements():
                    if a.code == 0:
                        continue
                    if all(self._pow_code(a.code, n // f) != 1 for f in factors):
                        self._primitive = a
                        break
        return self._primitive

    # -- dunder --------------------------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, FieldSpec)
            and self.p == other.p
            and self.k == other.k
            and self.modulus == other.modulus
        )

    def __hash__(self):
        return hash((self.p, self.k, self.modulus))

    def __repr__(self):
        if self.k == 1:
            return f"GF({self.p})"
        return f"GF({self.p}^{self.k})"


class FieldElement:
    """An element of a `FieldSpec`, immutable and hashable."""

    __slots__ = ("field", "code")

    def __init__(self, field: FieldSpec, code: int):
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "code", code)

    def __setattr__(self, *args):
        raise AttributeError("FieldElement is immutable")

    def coeffs(self) -> tuple[int, ...]:
        return tuple(self.field._coeffs(self.code))

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldMismatch(f"{self.field} vs {other.field}")
            return other
        if isinstance(other, int):
            return self.field.from_int(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return FieldElement(self.field, self.field._add_codes(self.code, other.code))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, self.field._neg_code(self.code))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return FieldElement(self.field, self.field._mul_codes(self.code, other.code))

    __rmul__ = __mul__

    def inv(self) -> "FieldElement":
        return FieldElement(self.field, self.field._inv_code(self.code))

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inv()

    def __pow__(self, m: int):
        if m < 0:
            return self.inv() ** (-m)
        return FieldElement(self.field, self.field._pow_code(self.code, m))

    def __bool__(self):
        return self.code != 0

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field == other.field and self.code == other.code
        if isinstance(other, int):
            return self.code == other % self.field.p
        return NotImplemented

    def __hash__(self):
        return hash((self.code, self.field.p, self.field.k))

    def __lt__(self, other):
        other = self._coerce(other)
        return self.field.order_key(self.code) < self.field.order_key(other.code)

    def __repr__(self):
        return format_element(self)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def _field_cached(p: int, k: int, modulus: tuple[int, ...] | None) -> FieldSpec:
    if modulus is None:
        # least monic irreducible with nonzero constant term, coefficients
        # compared low-degree-first (gives t+1 for k=1, t^2+t+1 for GF(4))
        for tail in itertools.product(range(1, p), *([range(p)] * (k - 1))):
            cand = tuple(tail) + (1,)
            if _poly_is_irreducible(list(cand), p):
                modulus = cand
                break
    return FieldSpec(p, k, modulus)


def field_create(p: int, k: int, *, modulus=None,
                 order_bound: int = DEFAULT_ORDER_BOUND) -> FieldSpec:
    """Build GF(p^k) with the deterministic modulus (or an explicit one).

    Raises NotPrime / OrderTooLarge on bad parameters.  Results are cached:
    repeated calls with the same arguments return the same object.
    """
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if k < 1:
        raise ValueError("extension degree must be >= 1")
    if p ** k > order_bound:
        raise OrderTooLarge(f"{p}^{k} exceeds the desk-scale bound {order_bound}")
    if modulus is not None:
        modulus = tuple(c % p for c in modulus)
        if len(modulus) != k + 1 or modulus[-1] != 1:
            raise ValueError("modulus must be monic of degree k")
        if not _poly_is_irreducible(list(modulus), p):
            raise ValueError("modulus is reducible")
    return _field_cached(p, k, modulus)


# ---------------------------------------------------------------------------
# Frobenius machinery
# ---------------------------------------------------------------------------

def frobenius(a: FieldElement, e: int) -> FieldElement:
    """a^(p^e)."""
    if e < 0:
        raise ValueError("e must be >= 0")
    F = a.field
    if a.code == 0 or F.order == 2:
        return a
    exp = pow(F.p, e, F.order - 1)
    return FieldElement(F, F._pow_code(a.code, exp))


def inv_frobenius(a: FieldElement, e: int) -> FieldElement:
    """The unique b with b^(p^e) = a (finite fields are perfect)."""
    if e < 1:
        raise ValueError("e must be >= 1")
    F = a.field
    back = (F.k - e % F.k) % F.k
    return frobenius(a, back) if back else a


def trace(a: FieldElement) -> FieldElement:
    """Absolute trace sum a^(p^i), i = 0..k-1; lands in the prime subfield."""
    F = a.field
    acc = a
    b = a
    for _ in range(F.k - 1):
        b = frobenius(b, 1)
        acc = acc + b
    return acc


def sqrt(a: FieldElement) -> FieldElement:
    """Deterministic square root.

    Characteristic 2: the unique root (inverse Frobenius).  Odd
    characteristic: the least root in element order if a is a residue,
    else NonResidue (the caller may extend the field by degree 2).
    """
    F = a.field
    if F.p == 2:
        return inv_frobenius(a, 1)
    if a.code == 0:
        return a
    n = F.order - 1
    if F._pow_code(a.code, n // 2) != 1:
        raise NonResidue(f"{a!r} is not a square in {F}")
    if F.order <= SQRT_EXHAUSTIVE_BOUND:
        for r in F.elements():
            if F._mul_codes(r.code, r.code) == a.code:
                return r
        raise AssertionError("residue with no root")  # pragma: no cover
    r = _tonelli_shanks(F, a.code)
    s = F._neg_code(r)
    return FieldElement(F, min(r, s, key=F.order_key))


def _tonelli_shanks(F: FieldSpec, a: int) -> int:
    n = F.order - 1
    q, s = n, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    # least non-residue in element order
    for z in F.elements():
        if z.code and F._pow_code(z.code, n // 2) != 1:
            break
    c = F._pow_code(z.code, q)
    r = F._pow_code(a, (q + 1) // 2)
    t = F._pow_code(a, q)
    m = s
    while t != 1:
        t2, i = t, 0
        while t2 != 1:
            t2 = F._mul_codes(t2, t2)
            i += 1
        b = F._pow_code(c, 1 << (m - i - 1))
        r = F._mul_codes(r, b)
        c = F._mul_codes(b, b)
        t = F._mul_codes(t, c)
        m = i
    return r


def artin_schreier_root(a: FieldElement) -> FieldElement:
    """Least t with t^2 + t = a, or NoRoot when the absolute trace is 1.

    Characteristic 2 only.  x -> x^2 + x is F_2-linear on GF(2^k), so the
    equation is solved by Gaussian elimination on coefficient vectors.
    """
    F = a.field
    if F.p != 2:
        raise ValueError("Artin-Schreier roots require characteristic 2")
    k = F.k
    cols = F._as_solver
    if cols is None:
        # columns of the map x -> x^2 + x on the polynomial basis
        cols = [(frobenius(FieldElement(F, 1 << i), 1).code ^ (1 << i))
                for i in range(k)]
        F._as_solver = cols
    # rows of [M | b]: bit j of row i is M[i][j]; bit k carries b_i
    rows = []
    for i in range(k):
        row = 0
        for j in range(k):
            if (cols[j] >> i) & 1:
                row |= 1 << j
        row |= ((a.code >> i) & 1) << k
        rows.append(row)
    x = 0
    pivots = []
    r = 0
    for col in range(k):
        piv = next((i for i in range(r, k) if (rows[i] >> col) & 1), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(k):
            if i != r and (rows[i] >> col) & 1:
                rows[i] ^= rows[r]
        pivots.append((col, r))
        r += 1
    for i in range(r, k):
        if (rows[i] >> k) & 1:
            raise NoRoot(f"trace({a!r}) = 1: no Artin-Schreier root in {F}")
    for col, i in pivots:
        if (rows[i] >> k) & 1:
            x |= 1 << col
    return FieldElement(F, min(x, x ^ 1, key=F.order_key))


# ---------------------------------------------------------------------------
# extensions and embeddings
# ---------------------------------------------------------------------------

class Embedding:
    """Injective field homomorphism GF(p^k) -> GF(p^(k*m))."""

    __slots__ = ("domain", "codomain", "_gen_image", "_powers")

    def __init__(self, domain: FieldSpec, codomain: FieldSpec, gen_image: int):
        self.domain = domain
        self.codomain = codomain
        self._gen_image = gen_image
        pw = [1]
        for _ in range(domain.k - 1):
            pw.append(codomain._mul_codes(pw[-1], gen_image))
        self._powers = pw

    def __call__(self, a: FieldElement) -> FieldElement:
        if a.field != self.domain:
            raise FieldMismatch(f"{a.field} is not the embedding domain")
        code = 0
        for c, w in zip(a.field._coeffs(a.code), self._powers):
            if c:
                term = w
                acc = 0
                for _ in range(c):
                    acc = self.codomain._add_codes(acc, term)
                code = self.codomain._add_codes(code, acc)
        return FieldElement(self.codomain, code)

    def __repr__(self):
        return f"Embedding({self.domain} -> {self.codomain})"


@functools.lru_cache(maxsize=None)
def _extend_cached(F: FieldSpec, m: int, order_bound: int):
    big = field_create(F.p, F.k * m, order_bound=order_bound)
    if F.k == 1:
        return big, Embedding(F, big, big.from_int(-F.modulus[0]).code)
    # image of the generator = least root of the small modulus in the big field
    for x in big.elements():
        acc = big.zero()
        # Horner, constant term last
        for c in reversed(F.modulus):
            acc = acc * x + big.from_int(c)
        if not acc:
            return big, Embedding(F, big, x.code)
    raise AssertionError("subfield modulus must split in the extension")


def extend(F: FieldSpec, m: int, *,
           order_bound: int = DEFAULT_ORDER_BOUND) -> tuple[FieldSpec, Embedding]:
    """GF(p^(k*m)) together with the canonical embedding of F into it."""
    if m < 1:
        raise ValueError("extension degree must be >= 1")
    if m == 1:
        return F, Embedding(F, F, F.gen().code)
    return _extend_cached(F, m, order_bound)


# ---------------------------------------------------------------------------
# text I/O:  elements print as polynomials in t; fields as "p^k"
# ---------------------------------------------------------------------------

def format_element(a: FieldElement) -> str:
    coeffs = a.coeffs()
    terms = []
    for i in range(a.field.k - 1, -1, -1):
        c = coeffs[i]
        if not c:
            continue
        if i == 0:
            terms.append(str(c))
        else:
            var = "t" if i == 1 else f"t^{i}"
            terms.append(var if c == 1 else f"{c}{var}")
    return "+".join(terms) if terms else "0"


def parse_element(text: str, field: FieldSpec) -> FieldElement:
    """Parse a field element string: integer constants and t-polynomials."""
    s = text.replace(" ", "")
    if not s:
        raise CoefficientParseError("empty coefficient", 0)
    acc = field.zero()
    pos = 0
    sign = 1
    if s[0] in "+-":
        sign = -1 if s[0] == "-" else 1
        pos = 1
    while pos < len(s):
        c = 1
        have_c = False
        start = pos
        while pos < len(s) and s[pos].isdigit():
            pos += 1
        if pos > start:
            c = int(s[start:pos])
            have_c = True
        if pos < len(s) and s[pos] == "*":
            pos += 1
        deg = 0
        if pos < len(s) and s[pos] == "t":
            if field.k == 1:
                raise CoefficientParseError(
                    f"'t' is not an element of {field}", pos)
            pos += 1
            deg = 1
            if pos < len(s) and s[pos] == "^":
                pos += 1
                start = pos
                while pos < len(s) and s[pos].isdigit():
                    pos += 1
                if pos == start:
                    raise CoefficientParseError("missing exponent", pos)
                deg = int(s[start:pos])
        elif not have_c:
            raise CoefficientParseError(f"unexpected character {s[pos]!r}", pos)
        term = field.from_int(sign * c) * field.gen() ** deg
        acc = acc + term
        sign = 1
        if pos < len(s):
            if s[pos] == "+":
                pos += 1
            elif s[pos] == "-":
                sign = -1
                pos += 1
            else:
                raise CoefficientParseError(f"unexpected character {s[pos]!r}", pos)
            if pos == len(s):
                raise CoefficientParseError("dangling operator", pos)
    return acc


def parse_field(text: str, *, modulus: str | None = None,
                order_bound: int = DEFAULT_ORDER_BOUND) -> FieldSpec:
    """Parse "p^k" or "p" field notation, with an optional explicit modulus."""
    s = text.strip()
    if "^" in s:
        ps, ks = s.split("^", 1)
        p, k = int(ps), int(ks)
    else:
        p, k = int(s), 1
    mod = None
    if modulus is not None:
        mod = _parse_modulus(modulus, p, k)
    return field_create(p, k, modulus=mod, order_bound=order_bound)


def _parse_modulus(text: str, p: int, k: int) -> tuple[int, ...]:
    coeffs = [0] * (k + 1)
    s = text.replace(" ", "")
    for piece in s.split("+"):
        if not piece:
            raise CoefficientParseError("empty modulus term", 0)
        if piece == "t":
            coeffs[1] = (coeffs[1] + 1) % p
        elif piece.startswith("t^"):
            coeffs[int(piece[2:])] = (coeffs[int(piece[2:])] + 1) % p
        elif "t^" in piece:
            c, d = piece.split("t^")
            c = c.rstrip("*")
            coeffs[int(d)] = (coeffs[int(d)] + int(c)) % p
        elif piece.endswith("t"):
            c = piece[:-1].rstrip("*") or "1"
            coeffs[1] = (coeffs[1] + int(c)) % p
        else:
            coeffs[0] = (coeffs[0] + int(piece)) % p
    return tuple(coeffs)
