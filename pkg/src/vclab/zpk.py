"""Polynomials over Z/p^k, the function families built from them, and 0/1 root search.

Residues are plain ints in ``[0, q)`` with ``q = p**k``. Points are tuples of
residues; the point set ``S`` is every vector with at least one unit
coordinate, listed in lexicographic order.
"""

from __future__ import annotations

import itertools
import math
import random
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

from .errors import BudgetExceeded, ConsistencyError

Exp = tuple[int, ...]


def choose_m(p: int, k: int, n: int) -> int:
    """Smallest dimension strictly above ``n(p-1)p^(k-1)(p^k-1)``."""
    return n * (p - 1) * p ** (k - 1) * (p ** k - 1) + 1


def degree_cap(p: int, k: int, n: int) -> int:
    return n * (p - 1) * p ** (k - 1)


def valuation(x: int, p: int, q: int) -> int:
    """p-adic valuation of a residue mod q; ``k`` (i.e. infinity) for 0."""
    x %= q
    if x == 0:
        return round(math.log(q, p))
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


# -- polynomials -----------------------------------------------------------------

@dataclass(frozen=True)
class PolyZpk:
    """Polynomial in ``nvars`` variables over Z/q, stored as sorted ``(exponent, coeff)`` pairs."""

    q: int
    nvars: int
    terms: tuple[tuple[Exp, int], ...] = ()

    @classmethod
    def from_dict(cls, q: int, nvars: int, d: dict) -> "PolyZpk":
        items = sorted((e, c % q) for e, c in d.items() if c % q)
        return cls(q, nvars, tuple(items))

    @classmethod
    def const(cls, q: int, nvars: int, c: int) -> "PolyZpk":
        return cls.from_dict(q, nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, q: int, nvars: int, i: int) -> "PolyZpk":
        e = [0] * nvars
        e[i] = 1
        return cls.from_dict(q, nvars, {tuple(e): 1})

    def as_dict(self) -> dict:
        return dict(self.terms)

    @property
    def degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=0)

    @property
    def free_term(self) -> int:
        return self.as_dict().get((0,) * self.nvars, 0)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "PolyZpk") -> "PolyZpk":
        d = self.as_dict()
        for e, c in other.terms:
            d[e] = d.get(e, 0) + c
        return PolyZpk.from_dict(self.q, self.nvars, d)

    def __neg__(self) -> "PolyZpk":
        return PolyZpk.from_dict(self.q, self.nvars, {e: -c for e, c in self.terms})

    def __sub__(self, other: "PolyZpk") -> "PolyZpk":
        return self + (-other)

    def scale(self, c: int) -> "PolyZpk":
        return PolyZpk.from_dict(self.q, self.nvars, {e: c * v for e, v in self.terms})

    def __mul__(self, other: "PolyZpk") -> "PolyZpk":
        d: dict = {}
        q = self.q
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                d[e] = (d.get(e, 0) + c1 * c2) % q
        return PolyZpk.from_dict(q, self.nvars, d)

    def __pow__(self, n: int) -> "PolyZpk":
        result = PolyZpk.const(self.q, self.nvars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def drop_free_term(self) -> "PolyZpk":
        zero = (0,) * self.nvars
        return PolyZpk(self.q, self.nvars, tuple(t for t in self.terms if t[0] != zero))

    def __call__(self, point: Sequence[int]) -> int:
        return eval_poly(self, point)

    def __str__(self):
        return format_poly(self)


def eval_poly(f: PolyZpk, point: Sequence[int]) -> int:
    if len(point) != f.nvars:
        raise ValueError(f"point has {len(point)} coordinates, polynomial has {f.nvars} variables")
    q = f.q
    total = 0
    for e, c in f.terms:
        v = c
        for x, a in zip(point, e):
            if a:
                v = v * pow(x, a, q) % q
        total += v
    return total % q


def compose_linear(g: PolyZpk, rows: Sequence[Sequence[int]], nvars: int) -> PolyZpk:
    """Substitute ``y_j = sum_l rows[j][l] * x_l`` into ``g(y_0, ..., y_{r-1})``."""
    q = g.q
    ys = [PolyZpk.from_dict(q, nvars, {tuple(int(l == i) for l in range(nvars)): c
                                          for i, c in enumerate(row) if c % q})
          for row in rows]
    one = PolyZpk.const(q, nvars, 1)
    total = PolyZpk(q, nvars)
    for e, c in g.terms:
        term = one.scale(c)
        for j, a in enumerate(e):
            if a:
                term = term * (ys[j] ** a)
        total = total + term
    return total


def monomials(nvars: int, max_degree: int) -> list[Exp]:
    """Exponent vectors of total degree 1..max_degree, graded then lexicographic."""
    out = []
    for d in range(1, max_degree + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), d):
            e = [0] * nvars
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return out


_TERM = re.compile(r"^(?:(\d+)\*?)?((?:x\d+(?:\^\d+)?\*?)*)$")


def parse_poly(text: str, nvars: Optional[int] = None) -> PolyZpk:
    """Parse ``x1^2*x3 + 3*x2 (mod 9)``; variables are 1-based."""
    m = re.match(r"^(.*)\(mod\s*(\d+)\)\s*$", text.strip())
    if not m:
        raise ValueError("polynomial text must end with '(mod q)'")
    body, q = m[1].replace(" ", ""), int(m[2])
    terms: list[tuple[int, dict[int, int]]] = []
    top = 0
    if body not in ("", "0"):
        for chunk in re.split(r"(?=[+-])", body):
            if not chunk:
                continue
            sign = -1 if chunk[0] == "-" else 1
            chunk = chunk.lstrip("+-")
            tm = _TERM.match(chunk)
            if not tm or not chunk:
                raise ValueError(f"cannot parse term {chunk!r}")
            coef = int(tm[1]) if tm[1] else 1
            exps: dict[int, int] = {}
            for v, a in re.findall(r"x(\d+)(?:\^(\d+))?", tm[2] or ""):
                i = int(v) - 1
                if i < 0:
                    raise ValueError("variables are numbered from x1")
                exps[i] = exps.get(i, 0) + (int(a) if a else 1)
                top = max(top, i + 1)
            terms.append((sign * coef, exps))
    n = max(top, nvars or 0)
    d: dict = {}
    for c, exps in terms:
        e = tuple(exps.get(i, 0) for i in range(n))
        d[e] = d.get(e, 0) + c
    return PolyZpk.from_dict(q, n, d)


def format_poly(f: PolyZpk) -> str:
    parts = []
    for e, c in sorted(f.terms, key=lambda t: (-sum(t[0]), [-a for a in t[0]])):
        mono = "*".join(f"x{i + 1}" + (f"^{a}" if a > 1 else "") for i, a in enumerate(e) if a)
        if not mono:
            parts.append(str(c))
        elif c == 1:
            parts.append(mono)
        else:
            parts.append(f"{c}*{mono}")
    return (" + ".join(parts) or "0") + f" (mod {f.q})"


# -- point sets and function tables ----------------------------------------

@dataclass
class PointSet:
    """``S = (Z/p^k)^m`` minus ``p (Z/p^k)^m``.

    ``points`` is the explicit lexicographic list when ``|S| <= cap``, else ``None``.
    """

    p: int
    k: int
    m: int
    cap: int = 1 << 16
    points: Optional[tuple[tuple[int, ...], ...]] = field(default=None, init=False)

    def __post_init__(self):
        if self.size <= self.cap:
            q = self.q
            self.points = tuple(pt for pt in itertools.product(range(q), repeat=self.m)
                                if any(x % self.p for x in pt))
            self._index = {pt: i for i, pt in enumerate(self.points)}

    @property
    def q(self) -> int:
        return self.p ** self.k

    @property
    def size(self) -> int:
        return self.q ** self.m - (self.q // self.p) ** self.m

    @property
    def explicit(self) -> bool:
        return self.points is not None

    def __contains__(self, pt) -> bool:
        return len(pt) == self.m and all(0 <= x < self.q for x in pt) and any(x % self.p for x in pt)

    def __len__(self):
        return self.size

    def __iter__(self):
        if self.points is None:
            raise BudgetExceeded(f"|S| = {self.size} exceeds the explicit cap {self.cap}", needed=self.size)
        return iter(self.points)

    def index(self, pt) -> int:
        return self._index[tuple(pt)]

    def random_point(self, rng: random.Random) -> tuple[int, ...]:
        while True:
            pt = tuple(rng.randrange(self.q) for _ in range(self.m))
            if pt in self:
                return pt


@dataclass(frozen=True)
class FunctionTable:
    """Values of a function ``S -> Z/q`` in the lexicographic order of ``S``."""

    values: tuple[int, ...]
    provenance: Optional[PolyZpk] = field(default=None, compare=False, hash=False)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def add(self, other: "FunctionTable", q: int) -> "FunctionTable":
        return FunctionTable(tuple((a + b) % q for a, b in zip(self.values, other.values)))

    def neg(self, q: int) -> "FunctionTable":
        return FunctionTable(tuple((-a) % q for a in self.values))


def table_of(f: PolyZpk, S: PointSet) -> FunctionTable:
    return FunctionTable(tuple(eval_poly(f, pt) for pt in S), f)


def enumerate_F(p: int, k: int, n: int, m: int, S: PointSet, cap: int = 4096) -> list[FunctionTable]:
    """Every function on ``S`` given by a polynomial without free term and of
    degree at most ``degree_cap(p, k, n)``, deduplicated and sorted by values.
    """
    q = p ** k
    mons = monomials(m, degree_cap(p, k, n))
    upper = q ** len(mons)
    if cap < 1:
        raise BudgetExceeded(f"enumeration of F needs up to {upper} tables, cap is {cap}", needed=upper)
    mon_tables = []
    for e in mons:
        f = PolyZpk.from_dict(q, m, {e: 1})
        mon_tables.append((e, table_of(f, S).values))
    zero = tuple(0 for _ in range(len(S)))
    span: dict[tuple[int, ...], dict] = {zero: {}}
    for e, vals in mon_tables:
        new = dict(span)
        for t, coeffs in span.items():
            for c in range(1, q):
                u = tuple((a + c * b) % q for a, b in zip(t, vals))
                if u not in new:
                    new[u] = {**coeffs, e: c}
                    if len(new) > cap:
                        raise BudgetExceeded(
                            f"enumeration of F needs up to {upper} tables, cap is {cap}", needed=upper)
        span = new
    return [FunctionTable(t, PolyZpk.from_dict(q, m, span[t])) for t in sorted(span)]


def is_group_under_addition(F: Sequence[FunctionTable], q: int) -> bool:
    keys = {f.values for f in F}
    if not F or tuple(0 for _ in F[0].values) not in keys:
        return False
    for a in F:
        if a.neg(q).values not in keys:
            return False
        for b in F:
            if a.add(b, q).values not in keys:
                return False
    return True


# -- interpolation ---------------------------------------------------------------

def _unit_pivot_reduction(points: Sequence[Sequence[int]], p: int, q: int, m: int):
    """Invertible ``U`` over Z/q with every ``U t`` supported on the first ``r`` coordinates.

    Column by column, the pivot is the row of least p-valuation (first unit
    coordinate for a point of S); it divides the rest of its column, so the
    rows below are cleared by subtraction. Returns ``(U, r)``.
    """
    M = [[pt[i] % q for pt in points] for i in range(m)]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    row = 0
    for col in range(len(points)):
        if row == m:
            break
        best, best_v = None, None
        for r in range(row, m):
            v = valuation(M[r][col], p, q)
            if M[r][col] % q and (best_v is None or v < best_v):
                best, best_v = r, v
        if best is None:
            continue
        M[row], M[best] = M[best], M[row]
        U[row], U[best] = U[best], U[row]
        piv = M[row][col]
        unit = piv // p ** best_v
        uinv = pow(unit, -1, q)
        M[row] = [x * uinv % q for x in M[row]]
        U[row] = [x * uinv % q for x in U[row]]
        pv = p ** best_v
        for r in range(row + 1, m):
            if M[r][col] % q:
                c = M[r][col] // pv
                M[r] = [(a - c * b) % q for a, b in zip(M[r], M[row])]
                U[r] = [(a - c * b) % q for a, b in zip(U[r], U[row])]
        row += 1
    return U, row


def _interpolate(p: int, k: int, n: int, m: int, T: Sequence[Sequence[int]]):
    q = p ** k
    T = [tuple(int(x) % q for x in t) for t in T]
    if len(T) > n:
        raise ValueError(f"|T| = {len(T)} exceeds n = {n}")
    for t in T:
        if len(t) != m or not any(x % p for x in t):
            raise ValueError(f"point {t} is not in S")
    if not T:
        return PolyZpk(q, m), PolyZpk(q, m)
    U, r = _unit_pivot_reduction(T, p, q, m)
    images = [tuple(sum(U[j][l] * t[l] for l in range(m)) % q for j in range(r)) for t in T]
    residues = sorted({tuple(x % p for x in u) for u in images})
    # mod-p indicator of the residue classes of T in the first r coordinates
    one = PolyZpk.const(q, r, 1)
    g_y = PolyZpk(q, r)
    for c in residues:
        term = one
        for j in range(r):
            yj = PolyZpk.var(q, r, j) - PolyZpk.const(q, r, c[j])
            term = term * (one - yj ** (p - 1))
        g_y = g_y + term
    g = compose_linear(g_y, U[:r], m)
    f = g ** (p ** (k - 1))
    if f.free_term % q:
        raise ConsistencyError(f"free term of g^(p^(k-1)) is {f.free_term}, expected 0 mod {q}")
    return g, f.drop_free_term()


def interpolate_f_T(p: int, k: int, n: int, m: int, T: Sequence[Sequence[int]]) -> PolyZpk:
    """A member of F taking the value 1 on every point of ``T`` (``|T| <= n``).

    Built as ``g^(p^(k-1))`` where ``g`` is a mod-p indicator of T written in
    a basis that puts T inside the first ``|T|`` coordinates.
    """
    g, f = _interpolate(p, k, n, m, T)
    return f


def interpolation_parts(p: int, k: int, n: int, m: int, T: Sequence[Sequence[int]]):
    """``(g, f)``: the intermediate indicator and the final interpolant."""
    return _interpolate(p, k, n, m, T)


# -- Schanuel root search ---------------------------------------------------------

def _boolean_form(f: PolyZpk) -> dict[int, int]:
    """The function ``f`` restricted to {0,1}^m as support-mask -> coefficient."""
    d: dict[int, int] = {}
    for e, c in f.terms:
        mask = sum(1 << i for i, a in enumerate(e) if a)
        d[mask] = (d.get(mask, 0) + c) % f.q
    return {s: c for s, c in d.items() if c}


def _fixed_weight(m: int, c: int) -> Iterator[tuple[int, ...]]:
    """0/1 vectors of length m with c ones, lexicographically."""
    if c == 0:
        yield (0,) * m
        return
    if c == m:
        yield (1,) * m
        return
    for rest in _fixed_weight(m - 1, c):
        yield (0,) + rest
    for rest in _fixed_weight(m - 1, c - 1):
        yield (1,) + rest


def boolean_points(m: int) -> Iterator[tuple[int, ...]]:
    """Nonzero 0/1 vectors by increasing popcount, then lexicographically."""
    for c in range(1, m + 1):
        yield from _fixed_weight(m, c)


def schanuel_root(f: PolyZpk) -> tuple[int, ...]:
    """Minimal nonzero 0/1 root of a polynomial without free term.

    Requires ``m > (q - 1) deg f``, which guarantees a root exists.
    """
    q, m = f.q, f.nvars
    if f.free_term:
        raise ValueError("polynomial has a free term")
    if not m > (q - 1) * f.degree:
        raise ValueError(f"dimension {m} does not exceed (q-1)*deg = {(q - 1) * f.degree}")
    form = _boolean_form(f)
    items = list(form.items())
    for pt in boolean_points(m):
        mask = sum(1 << i for i, x in enumerate(pt) if x)
        if sum(c for s, c in items if s & mask == s) % q == 0:
            return pt
    raise ConsistencyError(f"no nonzero 0/1 root of {format_poly(f)} despite m > (q-1) deg")


# -- certification -------------------------------------------------------------------

@dataclass
class FunctionLemmaReport:
    p: int
    k: int
    n: int
    m: int
    mode: str
    bound: int
    bound_violated: bool
    family_size: Optional[int] = None
    closure_ok: Optional[bool] = None
    vanishing_checked: int = 0
    vanishing_ok: bool = True
    covering_checked: int = 0
    covering_ok: bool = True
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (self.vanishing_ok and self.covering_ok and self.closure_ok is not False
                and not self.bound_violated)

    def to_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items()}
        d["passed"] = self.passed
        return d


def _random_member(p: int, k: int, n: int, m: int, rng: random.Random, max_terms: int = 12) -> PolyZpk:
    q = p ** k
    cap = degree_cap(p, k, n)
    d: dict = {}
    for _ in range(rng.randint(1, max_terms)):
        deg = rng.randint(1, cap)
        e = [0] * m
        for _ in range(deg):
            e[rng.randrange(m)] += 1
        d[tuple(e)] = rng.randrange(q)
    return PolyZpk.from_dict(q, m, d)


def verify_function_lemma(p: int, k: int, n: int, m: int, mode: str = "enumerate",
                          budget: int = 1000, seed: int = 0,
                          family_cap: int = 4096) -> FunctionLemmaReport:
    """Check both function-family properties for the polynomial family of degree
    at most ``degree_cap(p, k, n)`` on ``S`` in dimension ``m``.

    In ``enumerate`` mode every member and every ``T`` with ``|T| <= n`` is
    checked (``T`` falls back to ``budget`` random draws when there are too
    many subsets); in ``sample`` mode ``budget`` random members and sets are.
    """
    if mode not in ("enumerate", "sample"):
        raise ValueError(f"unknown mode {mode!r}")
    q = p ** k
    bound = n * (p - 1) * p ** (k - 1) * (q - 1)
    rep = FunctionLemmaReport(p, k, n, m, mode, bound, bound_violated=not m > bound)
    if rep.bound_violated:
        rep.failures.append(f"m = {m} does not exceed n(p-1)p^(k-1)(p^k-1) = {bound}")
    rng = random.Random(seed)
    cap = degree_cap(p, k, n)
    S = PointSet(p, k, m, cap=1 << 14)
    F_keys = None

    def check_vanishing(f: PolyZpk, values: Optional[tuple] = None):
        rep.vanishing_checked += 1
        if m > (q - 1) * f.degree:
            root = schanuel_root(f)
            if root not in S or eval_poly(f, root) != 0:
                rep.vanishing_ok = False
                rep.failures.append(f"root {root} of {format_poly(f)} is not a zero in S")
        else:
            vals = values if values is not None else [eval_poly(f, pt) for pt in S]
            if 0 not in vals:
                rep.vanishing_ok = False
                rep.failures.append(f"{format_poly(f)} has no zero on S")

    if mode == "enumerate":
        F = enumerate_F(p, k, n, m, S, cap=family_cap)
        rep.family_size = len(F)
        rep.closure_ok = is_group_under_addition(F, q) if len(F) <= 4096 else None
        F_keys = {f.values for f in F}
        for f in F:
            check_vanishing(f.provenance, f.values)
    else:
        for _ in range(budget):
            check_vanishing(_random_member(p, k, n, m, rng))

    # covering property
    def check_cover(T):
        rep.covering_checked += 1
        f = interpolate_f_T(p, k, n, m, T)
        ok = (f.free_term == 0 and f.degree <= cap and all(eval_poly(f, t) == 1 for t in T))
        if ok and F_keys is not None:
            ok = table_of(f, S).values in F_keys
        if not ok:
            rep.covering_ok = False
            rep.failures.append(f"interpolant for T = {list(T)} is invalid: {format_poly(f)}")

    subsets = None
    if mode == "enumerate" and S.explicit:
        count = sum(math.comb(len(S), r) for r in range(1, n + 1))
        if count <= max(budget, 10_000):
            subsets = itertools.chain.from_iterable(
                itertools.combinations(S.points, r) for r in range(1, n + 1))
    if subsets is None:
        subsets = ([S.random_point(rng) for _ in range(rng.randint(1, n))] for _ in range(budget))
    for T in subsets:
        check_cover(T)
    return rep


def certify_family(p: int, k: int, n: int, S: PointSet, F: Sequence[FunctionTable],
                   max_subsets: int = 200_000) -> list[str]:
    """Directly check a finite family on an explicit ``S``; returns the failures (empty = certified)."""
    q = p ** k
    problems = []
    if not is_group_under_addition(F, q):
        problems.append("family is not a group under pointwise addition")
    for f in F:
        if 0 not in f.values:
            problems.append(f"function {f.values} does not vanish on S")
            break
    idx_sets = [frozenset(i for i, v in enumerate(f.values) if v == 1) for f in F]
    count = sum(math.comb(len(S), r) for r in range(1, n + 1))
    if count > max_subsets:
        problems.append(f"{count} subsets of size <= {n} exceed the direct-check budget")
        return problems
    for r in range(1, n + 1):
        for T in itertools.combinations(range(len(S)), r):
            if not any(all(i in ones for i in T) for ones in idx_sets):
                problems.append(f"no member equals 1 on points {[S.points[i] for i in T]}")
                return problems
    return problems
