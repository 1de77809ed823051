"""The semidirect product ``G = F x| prod_{s in S} H_s`` and the objects built on it.

``G`` is never tabulated. Its elements are ``BigElement(f, comps)`` with ``f``
a function table on ``S`` and one ``H``-element per point of ``S``; the
product is

    (f1, d1)(f2, d2) = (f1 + f2, d1^{f2} d2),   (d1^{f2})_s = d1_s conjugated by b^{f2(s)}.

For exhaustive sweeps there is a vectorised twin (``GBatch``) that works on
arrays of function indices and component rows.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import group as grp
from . import zpk
from .errors import BudgetExceeded, ConstructionError
from .group import FiniteGroup, PurityWitness
from .words import Coef, MixedWord, Var, commutator, power, reduce

HTILDE_CAP = 1 << 12


class BigElement(NamedTuple):
    f: tuple[int, ...]
    comps: tuple[int, ...]


class HtildeElement(NamedTuple):
    a: int
    h: int


@dataclass
class CounterexampleSpec:
    """All parameters of one construction, plus how they were certified."""

    H: FiniteGroup
    witness: PurityWitness
    n: int
    n_exact: bool
    n_used: int
    dim_m: int
    S: zpk.PointSet
    F: list[zpk.FunctionTable]
    gens: tuple[int, ...]
    certification: dict = field(default_factory=dict)
    caveats: list[str] = field(default_factory=list)

    @property
    def p(self) -> int:
        return self.witness.p

    @property
    def k(self) -> int:
        return self.witness.k

    @property
    def q(self) -> int:
        return self.witness.q

    @property
    def points(self) -> tuple[tuple[int, ...], ...]:
        return self.S.points

    @cached_property
    def f_index(self) -> dict[tuple[int, ...], int]:
        return {f.values: i for i, f in enumerate(self.F)}

    @cached_property
    def fvals(self) -> np.ndarray:
        return np.asarray([f.values for f in self.F], dtype=np.int64).reshape(len(self.F), len(self.points))

    @cached_property
    def fadd(self) -> np.ndarray:
        q, idx = self.q, self.f_index
        n = len(self.F)
        out = np.zeros((n, n), dtype=np.int64)
        for i, a in enumerate(self.F):
            for j, b in enumerate(self.F):
                out[i, j] = idx[a.add(b, q).values]
        return out

    @cached_property
    def fneg(self) -> np.ndarray:
        return np.asarray([self.f_index[f.neg(self.q).values] for f in self.F], dtype=np.int64)

    @cached_property
    def bpow(self) -> tuple[int, ...]:
        """``b^a`` for ``a`` in ``0..q-1``."""
        return tuple(self.H.pow(self.witness.b, a) for a in range(self.q))

    @cached_property
    def conj_table(self) -> tuple[tuple[int, ...], ...]:
        """``conj_table[a][h] = h^(b^a)``."""
        H = self.H
        return tuple(tuple(H.conj(h, ba) for h in range(H.order)) for ba in self.bpow)

    @property
    def group_order(self) -> int:
        return len(self.F) * self.H.order ** len(self.points)

    @cached_property
    def G(self) -> "SemidirectProduct":
        return SemidirectProduct(self)

    def summary(self) -> dict:
        H = self.H
        return {
            "group": H.name,
            "order": H.order,
            "witness": {"b": H.name_of(self.witness.b), "p": self.p, "k": self.k},
            "n": self.n, "n_exact": self.n_exact, "n_used": self.n_used,
            "dim_m": self.dim_m, "S_size": len(self.points), "F_size": len(self.F),
            "gens": [H.name_of(g) for g in self.gens],
            "G_order": self.group_order,
        }


class SemidirectProduct:
    """``G`` as a carrier for word evaluation (``mul``/``inv``/``identity``)."""

    def __init__(self, spec: CounterexampleSpec):
        self.spec = spec
        self.identity = BigElement(spec.F[0].values, (0,) * len(spec.points))

    def mul(self, a: BigElement, b: BigElement) -> BigElement:
        return big_mul(self.spec, a, b)

    def inv(self, a: BigElement) -> BigElement:
        return big_inv(self.spec, a)


def _check_f(spec: CounterexampleSpec, f: tuple[int, ...]):
    if f not in spec.f_index:
        raise ValueError(f"function table {f} is not in the family F")


def big_mul(spec: CounterexampleSpec, a: BigElement, b: BigElement) -> BigElement:
    _check_f(spec, a.f)
    _check_f(spec, b.f)
    q, H, C = spec.q, spec.H, spec.conj_table
    f = tuple((x + y) % q for x, y in zip(a.f, b.f))
    comps = tuple(H.table[C[fs][d1]][d2] for fs, d1, d2 in zip(b.f, a.comps, b.comps))
    return BigElement(f, comps)


def big_inv(spec: CounterexampleSpec, a: BigElement) -> BigElement:
    _check_f(spec, a.f)
    q, H, C = spec.q, spec.H, spec.conj_table
    f = tuple((-x) % q for x in a.f)
    comps = tuple(C[fs][H.inv(d)] for fs, d in zip(f, a.comps))
    return BigElement(f, comps)


def big_pow(spec: CounterexampleSpec, a: BigElement, e: int) -> BigElement:
    if e < 0:
        a, e = big_inv(spec, a), -e
    acc = spec.G.identity
    for _ in range(e):
        acc = big_mul(spec, acc, a)
    return acc


def big_commutator(spec: CounterexampleSpec, a: BigElement, b: BigElement) -> BigElement:
    ia, ib = big_inv(spec, a), big_inv(spec, b)
    return big_mul(spec, big_mul(spec, ia, ib), big_mul(spec, a, b))


def diag(spec: CounterexampleSpec, h: int) -> BigElement:
    return BigElement(spec.F[0].values, (h,) * len(spec.points))


def is_diagonal(spec: CounterexampleSpec, x: BigElement) -> Optional[int]:
    if any(x.f) or len(set(x.comps)) != 1:
        return None
    return x.comps[0]


def pure_f(spec: CounterexampleSpec, f: zpk.FunctionTable | tuple) -> BigElement:
    values = f.values if isinstance(f, zpk.FunctionTable) else tuple(f)
    _check_f(spec, values)
    return BigElement(values, (0,) * len(spec.points))


def at_point(spec: CounterexampleSpec, s: int, h: int) -> BigElement:
    """``h_s``: ``h`` at point index ``s``, identity elsewhere."""
    comps = [0] * len(spec.points)
    comps[s] = h
    return BigElement(spec.F[0].values, tuple(comps))


# -- the auxiliary group H~ = <beta> x| H ------------------------------------------

def build_htilde(H: FiniteGroup, witness: PurityWitness, cap: int = HTILDE_CAP) -> FiniteGroup:
    """Cayley table of ``<beta>_q x| H`` with ``h^beta = h^b``; ``(a, h)`` sits at ``a*|H| + h``."""
    q, n = witness.q, H.order
    if q * n > cap:
        raise BudgetExceeded(f"|H~| = {q * n} exceeds cap {cap}", needed=q * n)
    bpow = [H.pow(witness.b, a) for a in range(q)]
    conj = [[H.conj(h, ba) for h in range(n)] for ba in bpow]
    table = []
    for a1 in range(q):
        for h1 in range(n):
            row = []
            for a2 in range(q):
                base = ((a1 + a2) % q) * n
                c = conj[a2][h1]
                for h2 in range(n):
                    row.append(base + H.table[c][h2])
            table.append(row)
    names = [(f"B^{a}" if a else "") + ("" if (a and h == 0) else H.name_of(h))
             for a in range(q) for h in range(n)]
    return FiniteGroup(table, names, name=f"{H.name}~", check=False)


def htilde_index(H: FiniteGroup, t: HtildeElement) -> int:
    return t.a * H.order + t.h


def htilde_element(H: FiniteGroup, idx: int) -> HtildeElement:
    return HtildeElement(*divmod(idx, H.order))


def phi(spec: CounterexampleSpec, s: int, x: BigElement) -> HtildeElement:
    """Coordinate map at point index ``s``: ``h_s -> h``, ``h_s' -> 1``, ``f -> beta^f(s)``."""
    return HtildeElement(x.f[s], x.comps[s])


def beta_to_b(H: FiniteGroup, witness: PurityWitness, t: HtildeElement) -> int:
    """Replace beta by b: ``beta^a h -> b^a h``."""
    return H.mul(H.pow(witness.b, t.a), t.h)


# -- the equation system ----------------------------------------------------------

@dataclass
class EquationSystem:
    """Words over ``H * F(vars)``, each to be equated with the identity."""

    var_names: list[str]
    equations: list[MixedWord]
    tags: list[int]
    labels: list[str]
    H: FiniteGroup

    @property
    def nvars(self) -> int:
        return len(self.var_names)

    def tag_counts(self) -> dict[int, int]:
        out = {t: 0 for t in range(1, 6)}
        for t in self.tags:
            out[t] += 1
        return out

    def __len__(self):
        return len(self.equations)


def x_var(spec: CounterexampleSpec, fi: int) -> int:
    return fi


def y_var(spec: CounterexampleSpec, i: int, s: int) -> int:
    return len(spec.F) + i * len(spec.points) + s


def build_equation_system(spec: CounterexampleSpec) -> EquationSystem:
    H, b, q = spec.H, spec.witness.b, spec.q
    nF, nS, g = len(spec.F), len(spec.points), len(spec.gens)
    nv = nF + g * nS
    names = [f"x_{fi}" for fi in range(nF)]
    names += [f"y_{H.name_of(h)},{s}" for h in spec.gens for s in range(nS)]
    eqs, tags, labels = [], [], []

    def add(w, tag, label):
        eqs.append(reduce(MixedWord(w.letters, nv), H))
        tags.append(tag)
        labels.append(label)

    # (1) x_f^(p^k) = 1
    for fi in range(nF):
        add(power(fi, q, nv), 1, f"x_{fi}^{q} = 1")
    # (2) y^{x_f} = y^{b^f(s)}
    for i in range(g):
        for s in range(nS):
            y = y_var(spec, i, s)
            for fi, f in enumerate(spec.F):
                ba = H.pow(b, f.values[s])
                lhs = [Var(fi, -1), Var(y), Var(fi)]
                rhs_inv = [Coef(H.inv(ba)), Var(y, -1), Coef(ba)]
                add(MixedWord(tuple(lhs + rhs_inv)), 2, f"{names[y]}^x_{fi} = {names[y]}^(b^{f.values[s]})")
    # (3) prod_q y_{i,q} = h_i
    for i, h in enumerate(spec.gens):
        letters = [Var(y_var(spec, i, s)) for s in range(nS)] + [Coef(H.inv(h))]
        add(MixedWord(tuple(letters)), 3, f"prod_s y_{H.name_of(h)},s = {H.name_of(h)}")
    # (4) [y_{i,s}, y_{j,s'}] = 1 for s != s'
    for i in range(g):
        for j in range(g):
            for s in range(nS):
                for s2 in range(nS):
                    if s == s2:
                        continue
                    u = MixedWord((Var(y_var(spec, i, s)),), nv)
                    v = MixedWord((Var(y_var(spec, j, s2)),), nv)
                    add(commutator(u, v), 4, f"[{names[u.letters[0].index]}, {names[v.letters[0].index]}] = 1")
    # (5) [x_f, b] = 1
    for fi in range(nF):
        add(MixedWord((Var(fi, -1), Coef(H.inv(b)), Var(fi), Coef(b))), 5, f"[x_{fi}, b] = 1")
    return EquationSystem(names, eqs, tags, labels, H)


def obvious_solution(spec: CounterexampleSpec) -> list[BigElement]:
    """``x_f = f``, ``y_{i,s} = (h_i)_s``."""
    sol = [pure_f(spec, f) for f in spec.F]
    for h in spec.gens:
        for s in range(len(spec.points)):
            sol.append(at_point(spec, s, h))
    return sol


# -- assembling a spec ---------------------------------------------------------------

def build_spec(H: FiniteGroup, witness: Optional[PurityWitness] = None, *,
               n: Optional[int] = None, m: Optional[int] = None,
               family: Optional[Sequence[Sequence[int]]] = None,
               family_cap: int = 4096, point_cap: int = 4096,
               lattice_cap: int = grp.LATTICE_ORDER_CAP) -> CounterexampleSpec:
    """Assemble and certify the parameters of the construction for ``H``.

    ``n`` overrides the decomposition search, ``m`` the dimension and
    ``family`` (a list of value tuples on ``S``) the default polynomial family.
    """
    caveats: list[str] = []
    if witness is None:
        witness = grp.purity_witness_search(H)
        if witness is None:
            raise ConstructionError(f"the centre of {H.name} is pure; no purity witness exists")
    elif not witness.is_valid(H):
        raise ConstructionError(f"{witness} is not a purity witness for {H.name}")
    p, k = witness.p, witness.k
    if n is None:
        E = grp.special_set(H, witness)
        res = grp.bounded_n_search(H, E, order_cap=lattice_cap)
        n_found, exact = res.n, res.exact
        if exact:
            n_used = max(n_found, 1)
        else:
            n_used = n_found + 1
            caveats.append(f"decomposition search inexact ({res.note}); n_used = lower bound + 1")
    else:
        n_found, exact, n_used = n, True, max(n, 1)
        caveats.append("n supplied by caller")
    dim_m = m if m is not None else zpk.choose_m(p, k, n_used)
    S = zpk.PointSet(p, k, dim_m, cap=point_cap)
    if not S.explicit:
        raise BudgetExceeded(f"|S| = {S.size} exceeds point cap {point_cap}", needed=S.size)
    certification: dict = {}
    if family is None:
        F = zpk.enumerate_F(p, k, n_used, dim_m, S, cap=family_cap)
        if dim_m > n_used * (p - 1) * p ** (k - 1) * (p ** k - 1):
            report = zpk.verify_function_lemma(p, k, n_used, dim_m, "enumerate", family_cap=family_cap)
            certification["function_lemma"] = report.to_dict()
            if not report.passed:
                raise ConstructionError("function-lemma verification failed: " + "; ".join(report.failures))
        else:
            caveats.append(f"m = {dim_m} is below the dimension bound; family certified directly")
    else:
        F = sorted({zpk.FunctionTable(tuple(int(v) % witness.q for v in f)) for f in family},
                   key=lambda f: f.values)
        for f in F:
            if len(f.values) != len(S.points):
                raise ConstructionError(f"family member has {len(f.values)} values, |S| = {len(S.points)}")
        caveats.append("user-supplied family")
    problems = zpk.certify_family(p, k, n_used, S, F)
    certification["direct"] = {"ok": not problems, "problems": problems}
    if problems:
        raise ConstructionError("function family not certified: " + "; ".join(problems))
    if any(F[0].values):
        raise ConstructionError("family does not contain the zero function")
    gens = grp.generators_mod_centre(H)
    return CounterexampleSpec(H, witness, n_found, exact, n_used, dim_m, S, F, gens,
                              certification, caveats)


def spec_to_dict(spec: CounterexampleSpec) -> dict:
    H = spec.H
    return {
        "group": {"name": H.name, "order": H.order, "names": list(H.names),
                  "table": [list(r) for r in H.table]},
        "witness": {"b": spec.witness.b, "p": spec.p, "k": spec.k},
        "n": spec.n, "n_exact": spec.n_exact, "n_used": spec.n_used, "dim_m": spec.dim_m,
        "S": [list(pt) for pt in spec.points],
        "F": [list(f.values) for f in spec.F],
        "F_polynomials": [zpk.format_poly(f.provenance) if f.provenance is not None else None
                          for f in spec.F],
        "gens": list(spec.gens),
        "certification": spec.certification,
        "caveats": list(spec.caveats),
    }


def spec_from_dict(d: dict) -> CounterexampleSpec:
    """Rebuild a spec without re-running any search (the stored data is trusted
    only as far as the caller re-verifies it)."""
    g = d["group"]
    H = FiniteGroup(g["table"], g["names"], name=g["name"])
    w = PurityWitness(d["witness"]["b"], d["witness"]["p"], d["witness"]["k"])
    S = zpk.PointSet(w.p, w.k, d["dim_m"], cap=max(len(d["S"]), 1))
    if [list(pt) for pt in S.points] != d["S"]:
        raise ValueError("stored point list does not match the lexicographic S")
    F = [zpk.FunctionTable(tuple(f)) for f in d["F"]]
    return CounterexampleSpec(H, w, d["n"], d["n_exact"], d["n_used"], d["dim_m"], S, F,
                              tuple(d["gens"]), d.get("certification", {}), d.get("caveats", []))


# -- vectorised twin ------------------------------------------------------------------

class GBatch:
    """Arrays of elements of ``G``: ``fi`` (function indices) and ``comps`` (rows over S)."""

    def __init__(self, spec: CounterexampleSpec):
        self.spec = spec
        self.hmul = spec.H.array
        self.hinv = spec.H.inv_array
        self.conj = np.asarray(spec.conj_table, dtype=np.int64)
        self.nS = len(spec.points)

    def mul(self, a, b):
        fa, ca = a
        fb, cb = b
        sp = self.spec
        f = sp.fadd[fa, fb]
        comps = self.hmul[self.conj[sp.fvals[fb], ca], cb]
        return f, comps

    def inv(self, a):
        fa, ca = a
        sp = self.spec
        f = sp.fneg[fa]
        return f, self.conj[sp.fvals[f], self.hinv[ca]]

    def identity(self, n: int):
        return np.zeros(n, dtype=np.int64), np.zeros((n, self.nS), dtype=np.int64)

    def all_elements(self, limit: Optional[int] = None):
        """Every element of ``G`` in canonical order (function index, then comps lexicographically)."""
        sp = self.spec
        N = sp.group_order
        if limit is not None and N > limit:
            raise BudgetExceeded(f"|G| = {N} exceeds enumeration cap {limit}", needed=N)
        return self.decode(np.arange(N, dtype=np.int64))

    def decode(self, codes: np.ndarray):
        nH = self.spec.H.order
        per = nH ** self.nS
        fi, rest = np.divmod(codes, per)
        comps = np.zeros((len(codes), self.nS), dtype=np.int64)
        for s in range(self.nS - 1, -1, -1):
            rest, comps[:, s] = np.divmod(rest, nH)
        return fi, comps

    def encode(self, a) -> np.ndarray:
        fi, comps = a
        nH = self.spec.H.order
        code = fi.copy()
        for s in range(self.nS):
            code = code * nH + comps[:, s]
        return code

    def evaluate(self, w: MixedWord, values: Sequence, n: int):
        """Batch evaluation of a coefficient-free word; ``values[i]`` is a batch for variable i."""
        invs: dict[int, tuple] = {}
        acc = self.identity(n)
        for a in w.letters:
            if isinstance(a, Coef):
                raise ValueError("GBatch.evaluate takes coefficient-free words")
            if a.sign > 0:
                v = values[a.index]
            else:
                if a.index not in invs:
                    invs[a.index] = self.inv(values[a.index])
                v = invs[a.index]
            acc = self.mul(acc, v)
        return acc

    def diagonal_mask(self, a) -> np.ndarray:
        fi, comps = a
        return (fi == 0) & np.all(comps == comps[:, :1], axis=1)

    def element(self, a, i: int) -> BigElement:
        fi, comps = a
        return BigElement(self.spec.F[int(fi[i])].values, tuple(int(c) for c in comps[i]))

    def from_elements(self, elems: Sequence[BigElement]):
        idx = self.spec.f_index
        fi = np.asarray([idx[e.f] for e in elems], dtype=np.int64)
        comps = np.asarray([e.comps for e in elems], dtype=np.int64).reshape(len(elems), self.nS)
        return fi, comps


def h_batch_evaluate(H: FiniteGroup, w: MixedWord, values: Sequence[np.ndarray], n: int) -> np.ndarray:
    """Batch evaluation of a word (coefficients allowed) in ``H``."""
    T, inv = H.array, H.inv_array
    acc = np.zeros(n, dtype=np.int64)
    for a in w.letters:
        if isinstance(a, Coef):
            acc = T[acc, a.elem]
        else:
            v = values[a.index]
            acc = T[acc, v if a.sign > 0 else inv[v]]
    return acc
