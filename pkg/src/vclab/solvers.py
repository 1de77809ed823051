"""Equation solving over finite groups and the two closedness checks.

The algebraic side is a decision procedure: ``backtracking_solve`` either
returns a solution or proves there is none by exhausting the (propagated)
search space. Hitting the node budget is reported as its own outcome and is
never mistaken for unsatisfiability.

The verbal side cannot be decided by enumeration, so the audit is tiered:
complete sweeps for power words and a fixed list of two-variable words,
sampling beyond that. Every diagonal hit is pushed through the constructive
transfer (change of variables, coordinate map, beta -> b) and re-checked in H.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import __version__
from . import construction as cons
from .construction import BigElement, CounterexampleSpec, EquationSystem, GBatch, SemidirectProduct
from .errors import BudgetExceeded, ConsistencyError
from .group import FiniteGroup
from .words import (Coef, MixedWord, Var, apply_substitution, commutator, evaluate, format_word,
                    normalize_power_form, parse_word, random_word, transform_assignment)

DEFAULT_NODE_BUDGET = 2_000_000


def _embed_for(carrier):
    if isinstance(carrier, SemidirectProduct):
        spec = carrier.spec
        return lambda h: cons.diag(spec, h)
    return None


def eval_system(system: EquationSystem | Sequence[MixedWord], carrier, assignment: Sequence) -> list[bool]:
    """Per equation: does the word evaluate to the identity?

    Coefficients are embedded diagonally when ``carrier`` is the big group ``G``.
    """
    eqs = system.equations if isinstance(system, EquationSystem) else system
    embed = _embed_for(carrier)
    return [evaluate(w, carrier, assignment, embed) == carrier.identity for w in eqs]


# -- backtracking -----------------------------------------------------------------

def _compile(w: MixedWord) -> tuple[tuple[int, int], ...]:
    return tuple((a.index, a.sign) if isinstance(a, Var) else (-1, a.elem) for a in w.letters)


@dataclass
class SolveResult:
    solution: Optional[list[int]]
    exhausted: bool
    nodes: int = 0
    domain_sizes: list[int] = field(default_factory=list)

    @property
    def status(self) -> str:
        if self.solution is not None:
            return "sat"
        return "unsat" if self.exhausted else "budget"

    def to_dict(self) -> dict:
        return {"status": self.status, "exhausted": self.exhausted, "nodes": self.nodes,
                "domain_sizes_after_propagation": self.domain_sizes,
                "solution": self.solution}


class _OutOfBudget(Exception):
    pass


class _Search:
    def __init__(self, eqs, nvars: int, H: FiniteGroup, budget: int):
        self.ops = [_compile(w) for w in eqs]
        self.nvars = nvars
        self.T = H.table
        self.inv = H._inv
        self.budget = budget
        self.nodes = 0
        self.vars_of = [sorted({v for v, _ in ops if v >= 0}) for ops in self.ops]
        self.eqs_of: list[list[int]] = [[] for _ in range(nvars)]
        for ei, vs in enumerate(self.vars_of):
            for v in vs:
                self.eqs_of[v].append(ei)
        self.order = H.order

    def value(self, ei: int, assign) -> int:
        T, inv = self.T, self.inv
        acc = 0
        for v, x in self.ops[ei]:
            if v < 0:
                acc = T[acc][x]
            else:
                e = assign[v]
                acc = T[acc][e if x > 0 else inv[e]]
        return acc

    def propagate_unary(self) -> Optional[list[list[int]]]:
        domains = [list(range(self.order)) for _ in range(self.nvars)]
        assign: list = [None] * self.nvars
        for ei, vs in enumerate(self.vars_of):
            if not vs:
                if self.value(ei, assign) != 0:
                    return None
            elif len(vs) == 1:
                v = vs[0]
                keep = []
                for x in domains[v]:
                    assign[v] = x
                    if self.value(ei, assign) == 0:
                        keep.append(x)
                assign[v] = None
                domains[v] = keep
        return domains

    def run(self, domains, mrv: bool) -> Optional[list[int]]:
        assign: list = [None] * self.nvars
        doms = [list(d) for d in domains]
        if any(not d for d in doms):
            return None
        unassigned = set(range(self.nvars))

        def pick():
            if mrv:
                return min(unassigned, key=lambda v: (len(doms[v]), v))
            return min(unassigned)

        def forward(v) -> Optional[list[tuple[int, list[int]]]]:
            saved = []
            for ei in self.eqs_of[v]:
                free = [u for u in self.vars_of[ei] if assign[u] is None]
                if not free:
                    if self.value(ei, assign) != 0:
                        return saved + [(-1, [])]
                elif len(free) == 1:
                    u = free[0]
                    keep = []
                    for x in doms[u]:
                        assign[u] = x
                        if self.value(ei, assign) == 0:
                            keep.append(x)
                    assign[u] = None
                    if len(keep) != len(doms[u]):
                        saved.append((u, doms[u]))
                        doms[u] = keep
                    if not keep:
                        return saved + [(-1, [])]
            return saved

        def undo(saved):
            for u, d in reversed(saved):
                if u >= 0:
                    doms[u] = d

        def dfs() -> bool:
            self.nodes += 1
            if self.nodes > self.budget:
                raise _OutOfBudget
            if not unassigned:
                return True
            v = pick()
            unassigned.discard(v)
            for x in list(doms[v]):
                assign[v] = x
                saved = forward(v)
                failed = saved and saved[-1][0] == -1
                if not failed and dfs():
                    return True
                undo(saved)
                assign[v] = None
            unassigned.add(v)
            return False

        if dfs():
            return list(assign)
        return None


def backtracking_solve(system: EquationSystem | Sequence[MixedWord], H: FiniteGroup,
                       budget: int = DEFAULT_NODE_BUDGET, nvars: Optional[int] = None,
                       canonical: bool = True) -> SolveResult:
    """Solve ``w = 1`` for every word in ``system`` over the finite group ``H``.

    Unary equations prune the initial domains; the search picks the smallest
    domain first and forward-checks every equation left with one free
    variable (which is how a product equation eliminates its last factor).
    With ``canonical=True`` a found solution is replaced by the
    lexicographically least one, found by a second pass in variable order.
    """
    eqs = system.equations if isinstance(system, EquationSystem) else list(system)
    if nvars is None:
        nvars = system.nvars if isinstance(system, EquationSystem) else max((w.nvars for w in eqs), default=0)
    search = _Search(eqs, nvars, H, budget)
    domains = search.propagate_unary()
    if domains is None:
        return SolveResult(None, True, 0, [0] * nvars)
    sizes = [len(d) for d in domains]
    try:
        sol = search.run(domains, mrv=True)
        if sol is not None and canonical:
            sol = search.run(domains, mrv=False)
    except _OutOfBudget:
        return SolveResult(None, False, search.nodes, sizes)
    return SolveResult(sol, True, search.nodes, sizes)


def enumerate_solve(eqs: Sequence[MixedWord], H: FiniteGroup, nvars: int) -> Optional[list[int]]:
    """Plain lexicographic enumeration of all ``|H|^nvars`` assignments."""
    for assign in itertools.product(range(H.order), repeat=nvars):
        if all(evaluate(w, H, assign) == 0 for w in eqs):
            return list(assign)
    return None


# -- certificates --------------------------------------------------------------------

@dataclass
class Certificate:
    spec: dict
    system_counts: dict
    g_solution: list[dict]
    g_residuals_ok: list[bool]
    h_unsat: dict
    vc_evidence: Optional[dict] = None
    seed: int = 0
    tool_version: str = __version__

    @property
    def issued(self) -> bool:
        return all(self.g_residuals_ok) and self.h_unsat.get("status") == "unsat"

    def to_dict(self) -> dict:
        return {
            "issued": self.issued,
            "spec": self.spec,
            "system_counts": self.system_counts,
            "g_solution": self.g_solution,
            "g_residuals_ok": self.g_residuals_ok,
            "h_unsat": self.h_unsat,
            "vc_evidence": self.vc_evidence,
            "seed": self.seed,
            "tool_version": self.tool_version,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Certificate":
        return cls(d["spec"], d["system_counts"], d["g_solution"], d["g_residuals_ok"],
                   d["h_unsat"], d.get("vc_evidence"), d.get("seed", 0), d.get("tool_version", ""))


def _encode_big(spec: CounterexampleSpec, name: str, x: BigElement) -> dict:
    return {"var": name, "f": list(x.f), "comps": list(x.comps)}


def certify_not_algebraically_closed(spec: CounterexampleSpec, budget: int = DEFAULT_NODE_BUDGET,
                                     seed: int = 0) -> Certificate:
    """Check the obvious solution in ``G`` and prove the system unsolvable in ``H``.

    Raises ``BudgetExceeded`` when the search could not be completed.
    """
    system = cons.build_equation_system(spec)
    sol = cons.obvious_solution(spec)
    residuals = eval_system(system, spec.G, sol)
    res = backtracking_solve(system, spec.H, budget=budget)
    if res.status == "budget":
        raise BudgetExceeded(f"H-search ran out of budget after {res.nodes} nodes", needed=None)
    h_unsat = res.to_dict()
    if res.solution is not None:
        h_unsat["solution_names"] = [spec.H.name_of(v) for v in res.solution]
    return Certificate(
        spec=cons.spec_to_dict(spec),
        system_counts={"total": len(system), **{str(t): c for t, c in system.tag_counts().items()}},
        g_solution=[_encode_big(spec, n, x) for n, x in zip(system.var_names, sol)],
        g_residuals_ok=residuals,
        h_unsat=h_unsat,
        seed=seed,
    )


@dataclass
class VerifyResult:
    ok: bool
    residuals_ok: list[bool]
    problems: list[str]


def verify_certificate(d: dict) -> VerifyResult:
    """Re-check a stored certificate's G-solution without re-running the search."""
    from . import zpk

    problems = []
    spec = cons.spec_from_dict(d["spec"])
    if not spec.witness.is_valid(spec.H):
        problems.append("stored witness is not a purity witness")
    problems += zpk.certify_family(spec.p, spec.k, spec.n_used, spec.S, spec.F)
    system = cons.build_equation_system(spec)
    counts = {"total": len(system), **{str(t): c for t, c in system.tag_counts().items()}}
    if counts != d["system_counts"]:
        problems.append(f"equation counts {counts} differ from stored {d['system_counts']}")
    sol = [BigElement(tuple(e["f"]), tuple(e["comps"])) for e in d["g_solution"]]
    if len(sol) != system.nvars:
        problems.append("stored assignment does not cover every variable")
        return VerifyResult(False, [], problems)
    residuals = eval_system(system, spec.G, sol)
    if not all(residuals):
        problems.append(f"{residuals.count(False)} equations fail in G")
    if d["h_unsat"].get("status") != "unsat" or not d["h_unsat"].get("exhausted"):
        problems.append("certificate does not record an exhausted UNSAT search")
    return VerifyResult(not problems, residuals, problems)


# -- solution transfer ---------------------------------------------------------------

def solution_transfer(spec: CounterexampleSpec, w: MixedWord, h: int,
                      gsol: Sequence[BigElement]) -> list[int]:
    """Turn a solution of ``w = diag(h)`` in ``G`` into a solution of ``w = h`` in ``H``.

    Change variables so only ``x`` has nonzero exponent sum, read off a point
    where the F-part of ``x`` vanishes, take that coordinate, replace beta by
    b, and change the variables back.
    """
    G, H = spec.G, spec.H
    if evaluate(w, G, gsol) != cons.diag(spec, h):
        raise ValueError("gsol does not solve w = diag(h) in G")
    _, sub = normalize_power_form(w)
    moved = transform_assignment(sub.inverse(), G, gsol)
    f = moved[0].f
    try:
        s = f.index(0)
    except ValueError:
        raise ConsistencyError(f"function {f} vanishes nowhere on S") from None
    images = [cons.phi(spec, s, x) for x in moved]
    hsol = [cons.beta_to_b(H, spec.witness, t) for t in images]
    back = transform_assignment(sub, H, hsol)
    if evaluate(w, H, back) != h:
        raise ConsistencyError(f"transferred assignment does not solve {format_word(w)} = {H.name_of(h)}")
    return back


def transfer_batch(spec: CounterexampleSpec, w: MixedWord, targets: np.ndarray, values: Sequence):
    """Vectorised ``solution_transfer``; returns ``(H-assignment arrays, ok mask)``."""
    GB = GBatch(spec)
    H = spec.H
    n = len(targets)
    _, sub = normalize_power_form(w)
    moved = [GB.evaluate(img, values, n) for img in sub.inverse().images()]
    f0 = moved[0][0]
    zero = spec.fvals[f0] == 0
    if not zero.any(axis=1).all():
        raise ConsistencyError("a function of F vanishes nowhere on S")
    s = zero.argmax(axis=1)
    rows = np.arange(n)
    bpow = np.asarray(spec.bpow, dtype=np.int64)
    hsol = []
    for fi, comps in moved:
        a = spec.fvals[fi, s]
        hsol.append(H.array[bpow[a], comps[rows, s]])
    back = [cons.h_batch_evaluate(H, img, hsol, n) for img in sub.images()]
    ok = cons.h_batch_evaluate(H, w, back, n) == targets
    return back, ok


# -- verbal sets and the audit -------------------------------------------------------

def value_set(w: MixedWord, carrier: FiniteGroup, budget: int = 1 << 22,
              rng: Optional[random.Random] = None, samples: int = 100_000) -> tuple[set[int], bool]:
    """All values of ``w`` over ``carrier`` and whether the enumeration was complete."""
    nv = w.nvars
    total = carrier.order ** nv
    if total <= budget:
        grids = np.indices((carrier.order,) * nv).reshape(nv, -1) if nv else np.zeros((0, 1), dtype=np.int64)
        vals = cons.h_batch_evaluate(carrier, w, list(grids), grids.shape[1] if nv else 1)
        return set(int(v) for v in np.unique(vals)), True
    rng = rng or random.Random(0)
    nprng = np.random.default_rng(rng.randrange(1 << 32))
    draws = [nprng.integers(0, carrier.order, samples) for _ in range(nv)]
    vals = cons.h_batch_evaluate(carrier, w, draws, samples)
    return set(int(v) for v in np.unique(vals)), False


def curated_words() -> list[tuple[str, MixedWord]]:
    return [
        ("[x,y]", commutator(MixedWord((Var(0),), 2), MixedWord((Var(1),), 2))),
        ("x^2 y^2", parse_word("x^2 y^2")),
        ("(x y)^2", parse_word("(x y)^2")),
        ("x^2 y^-2", parse_word("x^2 y^-2")),
    ]


def group_exponent(spec: CounterexampleSpec, cap: int = 1 << 16, max_e: int = 1 << 12) -> int:
    GB = GBatch(spec)
    elems = GB.all_elements(limit=cap)
    n = len(elems[0])
    acc = elems
    for e in range(1, max_e + 1):
        fi, comps = acc
        if not (fi.any() or comps.any()):
            return e
        acc = GB.mul(acc, elems)
    raise BudgetExceeded(f"exponent of G exceeds {max_e}", needed=None)


def _names(H: FiniteGroup, elems) -> list[str]:
    return [H.name_of(int(h)) for h in sorted(elems)]


def audit_power_words(spec: CounterexampleSpec, cap: int = 1 << 16) -> list[dict]:
    """Tier (i): for every ``e``, diagonal ``e``-th powers in G are exactly diag of ``e``-th powers in H."""
    H = spec.H
    GB = GBatch(spec)
    elems = GB.all_elements(limit=cap)
    N = len(elems[0])
    exp = group_exponent(spec, cap)
    out = []
    acc = elems
    for e in range(1, exp + 1):
        if e > 1:
            acc = GB.mul(acc, elems)
        mask = GB.diagonal_mask(acc)
        got = set(int(h) for h in np.unique(acc[1][mask, 0]))
        want = {H.pow(h, e) for h in range(H.order)}
        w = MixedWord((Var(0),) * e, 1)
        targets = acc[1][mask, 0]
        hits = (elems[0][mask], elems[1][mask])
        _, ok = transfer_batch(spec, w, targets, [hits]) if mask.any() else (None, np.ones(0, bool))
        out.append({
            "tier": "power", "mode": "complete", "word": f"x^{e}", "assignments": N,
            "diagonal_hits": int(mask.sum()), "diagonal_values": _names(H, got),
            "h_values": _names(H, want), "transfers_ok": int(ok.sum()),
            "violations": int(len(got ^ want) + (~ok).sum()),
        })
    return out


def audit_word_complete(spec: CounterexampleSpec, name: str, w: MixedWord,
                        chunk: int = 256) -> dict:
    """Tier (ii): full sweep of all assignments of a two-variable word."""
    H = spec.H
    GB = GBatch(spec)
    elems = GB.all_elements()
    N = len(elems[0])
    hvals, _ = value_set(w, H)
    hits = 0
    seen: set[int] = set()
    transfers_ok = 0
    violations = 0
    for start in range(0, N, chunk):
        xs = np.arange(start, min(start + chunk, N))
        xi = np.repeat(xs, N)
        yi = np.tile(np.arange(N), len(xs))
        X = (elems[0][xi], elems[1][xi])
        Y = (elems[0][yi], elems[1][yi])
        val = GB.evaluate(w, [X, Y], len(xi))
        mask = GB.diagonal_mask(val)
        if not mask.any():
            continue
        targets = val[1][mask, 0]
        hits += int(mask.sum())
        seen.update(int(h) for h in np.unique(targets))
        sel = [(X[0][mask], X[1][mask]), (Y[0][mask], Y[1][mask])]
        _, ok = transfer_batch(spec, w, targets, sel)
        transfers_ok += int(ok.sum())
        violations += int((~ok).sum())
    lacking = seen - hvals
    return {
        "tier": "curated", "mode": "complete", "word": name, "assignments": N * N,
        "diagonal_hits": hits, "diagonal_values": _names(H, seen), "h_values": _names(H, hvals),
        "values_lacking_h_solution": _names(H, lacking), "transfers_ok": transfers_ok,
        "violations": violations + len(lacking),
    }


def audit_word_sampled(spec: CounterexampleSpec, name: str, w: MixedWord, trials: int,
                       rng: random.Random, note: str = "") -> dict:
    """Random assignments of ``w``; every diagonal hit goes through the scalar transfer."""
    H = spec.H
    GB = GBatch(spec)
    nprng = np.random.default_rng(rng.randrange(1 << 32))
    codes = [nprng.integers(0, spec.group_order, trials) for _ in range(w.nvars)]
    values = [GB.decode(c) for c in codes]
    val = GB.evaluate(w, values, trials)
    mask = GB.diagonal_mask(val)
    ok = bad = 0
    for i in np.flatnonzero(mask):
        gsol = [GB.element(v, int(i)) for v in values]
        h = int(val[1][i, 0])
        try:
            solution_transfer(spec, w, h, gsol)
            ok += 1
        except ConsistencyError:
            bad += 1
    return {"tier": "sampled", "mode": "sampled", "word": name, "assignments": trials,
            "diagonal_hits": int(mask.sum()), "transfers_ok": ok, "violations": bad, "note": note}


def verbal_closedness_audit(spec: CounterexampleSpec, word_classes: Sequence[str] = ("power", "curated", "random"),
                            trials: int = 200, seed: int = 0, max_len: int = 8, max_vars: int = 3,
                            g_cap: int = 1 << 16, pair_cap: int = 1 << 23,
                            words: Optional[list[tuple[str, MixedWord]]] = None) -> dict:
    """Evidence that the diagonal copy of H is verbally closed in G.

    Complete tiers that would exceed ``g_cap`` or ``pair_cap`` are downgraded
    to sampling, and the record says so.
    """
    rng = random.Random(seed)
    N = spec.group_order
    evidence: dict = {"G_order": N, "seed": seed, "tiers": [], "complete_classes": [], "notes": []}
    if "power" in word_classes:
        if N <= g_cap:
            evidence["tiers"] += audit_power_words(spec, g_cap)
            evidence["complete_classes"].append("x^e for e = 1..exponent(G)")
        else:
            note = f"|G| = {N} exceeds cap {g_cap}; power words sampled"
            evidence["notes"].append(note)
            for e in range(1, 9):
                evidence["tiers"].append(audit_word_sampled(
                    spec, f"x^{e}", MixedWord((Var(0),) * e, 1), trials, rng, note))
    if "curated" in word_classes:
        for name, w in (words or curated_words()):
            if N ** w.nvars <= pair_cap:
                evidence["tiers"].append(audit_word_complete(spec, name, w))
                evidence["complete_classes"].append(name)
            else:
                note = f"|G|^{w.nvars} exceeds cap {pair_cap}; {name} sampled"
                evidence["notes"].append(note)
                evidence["tiers"].append(audit_word_sampled(spec, name, w, trials * 64, rng, note))
    if "random" in word_classes:
        tally = {"tier": "random", "mode": "sampled", "words": 0, "assignments": 0,
                 "diagonal_hits": 0, "seeded_diagonal": 0, "transfers_ok": 0, "violations": 0}
        H = spec.H
        for _ in range(trials):
            w = random_word(rng, max_len, rng.randint(1, max_vars))
            rec = audit_word_sampled(spec, format_word(w), w, 64, rng)
            tally["words"] += 1
            tally["assignments"] += rec["assignments"]
            tally["diagonal_hits"] += rec["diagonal_hits"]
            tally["transfers_ok"] += rec["transfers_ok"]
            tally["violations"] += rec["violations"]
            gsol = [cons.diag(spec, rng.randrange(H.order)) for _ in range(w.nvars)]
            h = cons.is_diagonal(spec, evaluate(w, spec.G, gsol))
            try:
                solution_transfer(spec, w, h, gsol)
                tally["transfers_ok"] += 1
            except ConsistencyError:
                tally["violations"] += 1
            tally["seeded_diagonal"] += 1
        evidence["tiers"].append(tally)
    evidence["violations"] = sum(t["violations"] for t in evidence["tiers"])
    return evidence
