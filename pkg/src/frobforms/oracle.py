"""Brute-force ground truth for the classification claims.

Orbit BFS and full orbit partitions of the twisted congruence action over
tiny fields, a brute-force embedding dimension, and the named theorem
checks that back every classification claim at desk scale.

Two packed state encodings drive the enumeration:

* F_2, n <= 5: a matrix is an n^2-bit word, entry (i, j) at bit i*n + j
  (the wire encoding used in orbit reports).  Generators act by direct
  shift/xor kernels (`frobforms._kernels`, compiled when available).
* GF(2^k), n^2*k <= 20: each entry contributes k bits; the action of a
  fixed g is F_2-linear in the packed state, so a full transition table
  per generator is built by xor-doubling and BFS proceeds by table gather.

Everything returned is exact; randomized checks draw from seeded
generators only.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import classify as cls
from . import frobform, gf, linalg
from ._kernels import BACKEND, bfs_f2
from .errors import BudgetExceeded, OrderTooLarge
from .frobform import FrobeniusForm
from .gf import FieldSpec
from .linalg import Matrix

DEFAULT_STATE_CAP = 1 << 26


def state_cap() -> int:
    env = os.environ.get("FROBFORMS_CAP")
    return int(env) if env else DEFAULT_STATE_CAP


# ---------------------------------------------------------------------------
# packed encodings
# ---------------------------------------------------------------------------

def pack_f2(A: Matrix) -> int:
    """n^2-bit packed encoding over F_2: entry (i, j) at bit i*n + j."""
    n = A.rows
    x = 0
    for i in range(n):
        for j in range(n):
            if A[i, j].code:
                x |= 1 << (i * n + j)
    return x


def unpack_f2(field: FieldSpec, n: int, x: int) -> Matrix:
    return Matrix.from_rows(
        field, [[(x >> (i * n + j)) & 1 for j in range(n)] for i in range(n)])


def packed_hex(n: int, x: int) -> str:
    width = (n * n + 3) // 4
    return f"{x:0{width}x}"


def pack_gf(A: Matrix) -> int:
    """k bits per entry, entry (i, j) in bits [ (i*n+j)*k, +k )."""
    n, k = A.rows, A.field.k
    x = 0
    for i in range(n):
        for j in range(n):
            x |= A[i, j].code << ((i * n + j) * k)
    return x


def unpack_gf(field: FieldSpec, n: int, x: int) -> Matrix:
    k = field.k
    mask = (1 << k) - 1
    return Matrix(field, n, n,
                  [field.from_code((x >> ((i * n + j) * k)) & mask)
                   for i in range(n) for j in range(n)])


# ---------------------------------------------------------------------------
# generator transition tables for GF(2^k) packed states
# ---------------------------------------------------------------------------

_TABLE_CACHE: dict = {}


def _gf_tables(field: FieldSpec, n: int, e: int):
    """Per-generator full transition tables over the packed state space.

    The action A -> (g^[q])^T A g is F_2-linear in A for fixed g, so the
    table is generated from the images of the n^2*k basis states by
    xor-doubling."""
    key = (field, n, e % field.k)
    tabs = _TABLE_CACHE.get(key)
    if tabs is not None:
        return tabs
    nbits = n * n * field.k
    if 1 << nbits > state_cap():
        raise OrderTooLarge("packed table beyond the state cap")
    gens = linalg.gl_generators(n, field)
    size = 1 << nbits
    tabs = []
    for g in gens:
        basis_imgs = np.empty(nbits, dtype=np.int64)
        for b in range(nbits):
            img = linalg.twisted_congruence(unpack_gf(field, n, 1 << b), g, e)
            basis_imgs[b] = pack_gf(img)
        table = np.zeros(size, dtype=np.int64)
        span = 1
        for b in range(nbits):
            table[span:2 * span] = table[:span] ^ basis_imgs[b]
            span *= 2
        tabs.append(table)
    _TABLE_CACHE[key] = tabs
    return tabs


def _bfs_tables(tables, seed: int, size: int):
    """BFS by table gather; returns the orbit as a sorted array."""
    visited = np.zeros(size, dtype=np.uint8)
    frontier = np.array([seed], dtype=np.int64)
    visited[frontier] = 1
    chunks = [frontier]
    while frontier.size:
        imgs = np.unique(np.concatenate([t[frontier] for t in tables]))
        imgs = imgs[visited[imgs] == 0]
        visited[imgs] = 1
        if imgs.size:
            chunks.append(imgs)
        frontier = imgs
    return np.sort(np.concatenate(chunks))


# ---------------------------------------------------------------------------
# orbits
# ---------------------------------------------------------------------------

class Orbit:
    """A fully materialized orbit of the twisted congruence action."""

    def __init__(self, form: FrobeniusForm, states: np.ndarray, packed: str):
        self.form = form
        self.states = states
        self.packing = packed  # "f2" or "gf"

    @property
    def size(self) -> int:
        return int(self.states.size)

    @property
    def min_state(self) -> int:
        return int(self.states.min())

    def contains_matrix(self, A: Matrix) -> bool:
        code = pack_f2(A) if self.packing == "f2" else pack_gf(A)
        i = int(np.searchsorted(self.states, code))
        return i < self.states.size and int(self.states[i]) == code

    def __contains__(self, item) -> bool:
        if isinstance(item, FrobeniusForm):
            return self.contains_matrix(item.A)
        if isinstance(item, Matrix):
            return self.contains_matrix(item)
        return False

    def __len__(self):
        return self.size

    def matrices(self):
        f = self.form
        for s in self.states:
            yield (unpack_f2(f.field, f.n, int(s)) if self.packing == "f2"
                   else unpack_gf(f.field, f.n, int(s)))


def orbit(f: FrobeniusForm, *, cap: int | None = None) -> Orbit:
    """BFS closure of {A} under all generator applications.

    Generators act on the right only: each application composes per the
    action law, and the transvection/diagonal set generates the whole
    group, so the closure is the full orbit."""
    cap = cap or state_cap()
    F, n = f.field, f.n
    if F.p != 2:
        return _orbit_generic(f, cap)
    if F.k == 1 and n <= 5:
        size = 1 << (n * n)
        if size > cap:
            raise BudgetExceeded(f"state space 2^{n * n} exceeds the cap")
        visited = np.zeros(size, dtype=np.uint8)
        queue = np.empty(size, dtype=np.uint32)
        cnt = bfs_f2(n, [pack_f2(f.A)], visited, queue)
        return Orbit(f, np.sort(queue[:cnt].copy()), "f2")
    nbits = n * n * F.k
    if 1 << nbits > cap:
        raise BudgetExceeded(f"state space 2^{nbits} exceeds the cap")
    tables = _gf_tables(F, n, f.e)
    states = _bfs_tables(tables, pack_gf(f.A), 1 << nbits)
    return Orbit(f, states, "gf")


def _orbit_generic(f: FrobeniusForm, cap: int):
    """Hash-set BFS with Matrix states (tiny odd-characteristic spaces)."""
    if f.field.order ** (f.n * f.n) > cap:
        raise BudgetExceeded("state space exceeds the cap")
    gens = linalg.gl_generators(f.n, f.field)
    seen = {f.A}
    frontier = [f.A]
    while frontier:
        new = []
        for A in frontier:
            for g in gens:
                B = linalg.twisted_congruence(A, g, f.e)
                if B not in seen:
                    seen.add(B)
                    new.append(B)
        frontier = new
    codes = np.array(sorted(
        sum(x.code * f.field.order ** i for i, x in enumerate(A.entries))
        for A in seen), dtype=np.int64)
    orb = Orbit(f, codes, "generic")
    return orb


# ---------------------------------------------------------------------------
# orbit partition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitSummary:
    representative: int          # least packed encoding in the orbit
    size: int
    contains_sparse: bool
    sparse_patterns_hit: tuple[str, ...]

    def to_json(self, n: int):
        return {
            "representative": packed_hex(n, self.representative),
            "size": self.size,
            "contains_sparse": self.contains_sparse,
            "sparse_patterns_hit": list(self.sparse_patterns_hit),
        }


@dataclass(frozen=True)
class OrbitReport:
    n: int
    field: FieldSpec
    e: int
    orbit_count: int
    orbits: tuple[OrbitSummary, ...]

    def to_json(self):
        return {
            "n": self.n,
            "field": f"{self.field.p}^{self.field.k}",
            "e": self.e,
            "orbit_count": self.orbit_count,
            "orbits": [o.to_json(self.n) for o in self.orbits],
        }

    def summary_of(self, A: Matrix) -> OrbitSummary:
        code = pack_f2(A)
        for o in self.orbits:
            if code in o_members(self, o):
                return o
        raise KeyError("matrix not covered by the report")


_PARTITION_MEMBERS: dict = {}


def o_members(report: OrbitReport, summary: OrbitSummary) -> set[int]:
    return _PARTITION_MEMBERS[(id(report), summary.representative)]


def _all_sparse_states(n: int) -> dict[int, str]:
    """Packed codes of every matrix satisfying the sparse conditions,
    including degenerate patterns (any strictly decreasing column list)."""
    import itertools as it

    out = {}
    for r in range(1, n + 1):
        for js in it.combinations(range(n, 0, -1), r):
            x = 0
            for i, j in enumerate(js):
                x |= 1 << (i * n + (j - 1))
            out[x] = "(" + ",".join(map(str, js)) + ")"
    return out


def orbit_partition(n: int, F: FieldSpec, e: int, *,
                    cap: int | None = None) -> OrbitReport:
    """Complete partition of the packed state space into orbits."""
    cap = cap or state_cap()
    if F.p != 2 or F.k != 1 or n > 5:
        raise BudgetExceeded("full partitions are supported over F_2, n <= 5")
    size = 1 << (n * n)
    if size > cap:
        raise BudgetExceeded(f"state space 2^{n * n} exceeds the cap")
    sparse_codes = _all_sparse_states(n)
    visited = np.zeros(size, dtype=np.uint8)
    queue = np.empty(size, dtype=np.uint32)
    summaries = []
    members = {}
    for s in range(size):
        if visited[s]:
            continue
        cnt = bfs_f2(n, [s], visited, queue)
        states = set(map(int, queue[:cnt]))
        hits = tuple(sorted(sparse_codes[c] for c in states & sparse_codes.keys()))
        summaries.append(OrbitSummary(
            representative=s, size=cnt,
            contains_sparse=bool(hits), sparse_patterns_hit=hits))
        members[s] = states
    report = OrbitReport(n=n, field=F, e=e, orbit_count=len(summaries),
                         orbits=tuple(summaries))
    for rep, states in members.items():
        _PARTITION_MEMBERS[(id(report), rep)] = states
    return report


# ---------------------------------------------------------------------------
# brute-force embedding dimension
# ---------------------------------------------------------------------------

def _live_coords_f2(n: int, x: int) -> int:
    rowmask = (1 << n) - 1
    live = 0
    for i in range(n):
        row = (x >> (i * n)) & rowmask
        col = 0
        for r in range(n):
            if (x >> (r * n + i)) & 1:
                col = 1
                break
        if row or col:
            live += 1
    return live


def _live_coords_gf(n: int, k: int, x: int) -> int:
    cell = (1 << k) - 1
    live = 0
    for i in range(n):
        used = False
        for j in range(n):
            if (x >> ((i * n + j) * k)) & cell or (x >> ((j * n + i) * k)) & cell:
                used = True
                break
        if used:
            live += 1
    return live


def bruteforce_embdim(f: FrobeniusForm, *, cap: int | None = None) -> int:
    """Minimum over the whole orbit of the number of live coordinates
    (indices whose row or column is nonzero).  Exponential; this is the
    validation oracle for the kernel-intersection formula."""
    orb = orbit(f, cap=cap)
    n = f.n
    if orb.packing == "f2":
        return min(_live_coords_f2(n, int(s)) for s in orb.states)
    if orb.packing == "gf":
        k = f.field.k
        return min(_live_coords_gf(n, k, int(s)) for s in orb.states)
    best = n
    for A in orb.matrices():
        live = sum(
            1 for i in range(n)
            if any(A[i, j].code or A[j, i].code for j in range(n)))
        best = min(best, live)
    return best


def subspace_embdim_oracle(f: FrobeniusForm) -> int:
    """Independent oracle: largest d such that some coordinate change kills
    the last d rows and columns, found by enumerating all subspaces and
    acting through the polynomial-substitution route."""
    import itertools as it

    F, n = f.field, f.n
    h = frobform.to_polynomial(f)
    els = list(F.elements())
    best_dead = 0
    vectors = [v for v in it.product(els, repeat=n) if any(x.code for x in v)]
    for d in range(n, 0, -1):
        found = False
        for combo in it.combinations(vectors, d):
            M = Matrix.from_rows(F, [list(v) for v in combo])
            if M.rank() != d:
                continue
            basis = [list(v) for v in combo]
            cols = []
            for i in range(n):
                e_i = [F.one() if j == i else F.zero() for j in range(n)]
                if Matrix.from_rows(F, cols + basis + [e_i]).rank() == len(cols) + d + 1:
                    cols.append(e_i)
                if len(cols) == n - d:
                    break
            g = Matrix.from_rows(F, cols + basis).transpose()
            hg = h.substitute(g)
            dead = all(
                all(exps[j] == 0 for j in range(n - d, n))
                for exps, _ in hg.terms)
            if dead:
                found = True
                break
        if found:
            best_dead = d
            break
    return n - best_dead


# ---------------------------------------------------------------------------
# cross-route action check
# ---------------------------------------------------------------------------

def act_via_polynomial(f: FrobeniusForm, g: Matrix) -> FrobeniusForm:
    """The action computed by generic polynomial substitution (the
    independent route used to validate twisted_congruence)."""
    return frobform.from_polynomial(frobform.to_polynomial(f).substitute(g), f.e)
