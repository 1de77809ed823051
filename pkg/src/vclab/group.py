"""Finite groups given by Cayley tables.

Elements are plain integers in ``range(G.order)``; index 0 is always the
identity. Subsets of a group are handled internally as integer bitmasks,
which keeps the lattice searches cheap for groups of order up to 64 or so.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import BudgetExceeded, ConsistencyError, InvalidGroupError

#: order above which associativity is only checked on random triples
EXHAUSTIVE_ASSOC_LIMIT = 128
#: default cap on |H| for exhaustive subgroup-lattice work
LATTICE_ORDER_CAP = 64
LATTICE_SIZE_CAP = 50_000


def to_mask(elems: Iterable[int]) -> int:
    m = 0
    for e in elems:
        m |= 1 << e
    return m


def from_mask(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


class FiniteGroup:
    """A finite group as a Cayley table over ``0..order-1``.

    ``table[g][h]`` holds the index of ``g*h``. The table is validated on
    construction unless ``check=False`` (used for tables the toolkit builds
    itself and validates separately in the test suite).
    """

    identity = 0

    def __init__(self, table, names: Optional[Sequence[str]] = None,
                 name: str = "G", check: bool = True):
        self.table: tuple[tuple[int, ...], ...] = tuple(tuple(int(x) for x in row) for row in table)
        self.order = len(self.table)
        if names is None:
            names = [str(i) for i in range(self.order)]
        if len(names) != self.order:
            raise InvalidGroupError(f"expected {self.order} names, got {len(names)}")
        self.names: tuple[str, ...] = tuple(names)
        self.name = name
        if check:
            self.validate()
        self._inv = self._compute_inverses()

    def __repr__(self):
        return f"FiniteGroup({self.name!r}, order={self.order})"

    def __len__(self):
        return self.order

    def __eq__(self, other):
        return isinstance(other, FiniteGroup) and self.table == other.table

    def __hash__(self):
        return hash(self.table)

    # -- validation -----------------------------------------------------

    def validate(self, rng: Optional[random.Random] = None, samples: int = 20_000) -> None:
        n = self.order
        if n == 0:
            raise InvalidGroupError("a group has at least one element")
        for r, row in enumerate(self.table):
            if len(row) != n:
                raise InvalidGroupError(f"row {r} has {len(row)} entries, expected {n}")
        arr = np.asarray(self.table, dtype=np.int64)
        if arr.min() < 0 or arr.max() >= n:
            bad = np.argwhere((arr < 0) | (arr >= n))[0]
            raise InvalidGroupError(f"entry out of range at row {bad[0]}, column {bad[1]}")
        ident = np.arange(n)
        if not (np.array_equal(arr[0], ident) and np.array_equal(arr[:, 0], ident)):
            raise InvalidGroupError("index 0 is not a two-sided identity")
        for r in range(n):
            if len(set(self.table[r])) != n:
                raise InvalidGroupError(f"row {r} is not a permutation (Latin-square violation)")
        for c in range(n):
            if len(set(arr[:, c].tolist())) != n:
                raise InvalidGroupError(f"column {c} is not a permutation (Latin-square violation)")
        if n <= EXHAUSTIVE_ASSOC_LIMIT:
            left = arr[arr]          # left[a, b, c] = (ab)c
            right = arr[:, arr]      # right[a, b, c] = a(bc)
            bad = np.argwhere(left != right)
            if len(bad):
                a, b, c = (int(v) for v in bad[0])
                raise InvalidGroupError(f"associativity fails at triple ({a}, {b}, {c})")
        else:
            rng = rng or random.Random(0)
            t = self.table
            for _ in range(samples):
                a, b, c = rng.randrange(n), rng.randrange(n), rng.randrange(n)
                if t[t[a][b]][c] != t[a][t[b][c]]:
                    raise InvalidGroupError(f"associativity fails at triple ({a}, {b}, {c})")

    def _compute_inverses(self) -> tuple[int, ...]:
        inv = [0] * self.order
        for g, row in enumerate(self.table):
            inv[g] = row.index(0)
        return tuple(inv)

    # -- arithmetic -------------------------------------------------------

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.table, dtype=np.int64)

    @cached_property
    def inv_array(self) -> np.ndarray:
        return np.asarray(self._inv, dtype=np.int64)

    def mul(self, g: int, h: int) -> int:
        return self.table[g][h]

    def inv(self, g: int) -> int:
        return self._inv[g]

    def prod(self, elems: Iterable[int]) -> int:
        acc = 0
        t = self.table
        for e in elems:
            acc = t[acc][e]
        return acc

    def pow(self, g: int, e: int) -> int:
        if e < 0:
            g, e = self._inv[g], -e
        acc, base = 0, g
        t = self.table
        while e:
            if e & 1:
                acc = t[acc][base]
            base = t[base][base]
            e >>= 1
        return acc

    def conj(self, x: int, y: int) -> int:
        """``x^y = y^-1 x y``."""
        t = self.table
        return t[t[self._inv[y]][x]][y]

    def comm(self, x: int, y: int) -> int:
        """``[x, y] = x^-1 y^-1 x y``."""
        t = self.table
        return t[t[self._inv[x]][self._inv[y]]][t[x][y]]

    def commute(self, x: int, y: int) -> bool:
        return self.table[x][y] == self.table[y][x]

    @cached_property
    def element_orders(self) -> tuple[int, ...]:
        out = []
        for g in range(self.order):
            k, acc = 1, g
            while acc != 0:
                acc = self.table[acc][g]
                k += 1
            out.append(k)
        return tuple(out)

    def element_order(self, g: int) -> int:
        return self.element_orders[g]

    @cached_property
    def exponent(self) -> int:
        return math.lcm(*self.element_orders)

    @cached_property
    def is_abelian(self) -> bool:
        a = self.array
        return bool(np.array_equal(a, a.T))

    @cached_property
    def centralizer_masks(self) -> tuple[int, ...]:
        """Bitmask of the centralizer of each single element."""
        a = self.array
        comm = a == a.T
        weights = [1 << j for j in range(self.order)]
        return tuple(sum(w for w, c in zip(weights, row) if c) for row in comm.tolist())

    # -- names --------------------------------------------------------------

    def name_of(self, g: int) -> str:
        return self.names[g]

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            if name.isdigit() and int(name) < self.order:
                return int(name)
            raise KeyError(f"no element named {name!r} in {self.name}") from None

    def relabel(self, perm: Sequence[int]) -> "FiniteGroup":
        """Copy of the group with old element ``g`` renamed to ``perm[g]``.

        ``perm[0]`` must be 0 so the identity stays at index 0.
        """
        if perm[0] != 0 or sorted(perm) != list(range(self.order)):
            raise ValueError("perm must be a permutation fixing 0")
        n = self.order
        new = [[0] * n for _ in range(n)]
        for g in range(n):
            for h in range(n):
                new[perm[g]][perm[h]] = perm[self.table[g][h]]
        names = [""] * n
        for g in range(n):
            names[perm[g]] = self.names[g]
        return FiniteGroup(new, names, name=self.name, check=False)


@dataclass(frozen=True)
class Subgroup:
    """A subgroup as a sorted tuple of element indices of its parent."""

    members: tuple[int, ...]
    order_of_parent: int = field(default=0, compare=False)

    @classmethod
    def from_mask(cls, mask: int, parent_order: int = 0) -> "Subgroup":
        return cls(from_mask(mask), parent_order)

    @classmethod
    def of(cls, G: FiniteGroup, elems: Iterable[int]) -> "Subgroup":
        return cls(tuple(sorted(set(elems))), G.order)

    @cached_property
    def mask(self) -> int:
        return to_mask(self.members)

    def __len__(self):
        return len(self.members)

    def __contains__(self, g):
        return (self.mask >> g) & 1 == 1

    def __iter__(self):
        return iter(self.members)

    def is_subgroup_of(self, G: FiniteGroup) -> bool:
        if self.order_of_parent and self.order_of_parent != G.order:
            raise ValueError("subgroup belongs to a group of a different order")
        if 0 not in self:
            return False
        for a in self.members:
            if G.inv(a) not in self:
                return False
            for b in self.members:
                if G.mul(a, b) not in self:
                    return False
        return True


@dataclass(frozen=True)
class PurityWitness:
    """``b^(p^k)`` is central but not the ``p^k``-th power of a central element."""

    b: int
    p: int
    k: int

    @property
    def q(self) -> int:
        return self.p ** self.k

    def is_valid(self, H: FiniteGroup) -> bool:
        Z = centre(H)
        bq = H.pow(self.b, self.q)
        if bq not in Z:
            return False
        return all(H.pow(z, self.q) != bq for z in Z)


# -- basic structure --------------------------------------------------------

def generated_mask(G: FiniteGroup, gens: Iterable[int], start: int = 1) -> int:
    """Bitmask of the subgroup generated by ``gens`` and the subgroup with mask ``start``."""
    all_gens = [g for g in gens if g != 0] + [g for g in from_mask(start) if g != 0]
    t = G.table
    mask, frontier = 1, [0]
    while frontier:
        nxt = []
        for x in frontier:
            row = t[x]
            for g in all_gens:
                y = row[g]
                if not (mask >> y) & 1:
                    mask |= 1 << y
                    nxt.append(y)
        frontier = nxt
    return mask


def generated_subgroup(G: FiniteGroup, gens: Iterable[int]) -> Subgroup:
    return Subgroup.from_mask(generated_mask(G, gens), G.order)


def centre(G: FiniteGroup) -> Subgroup:
    full = (1 << G.order) - 1
    return Subgroup(tuple(g for g, m in enumerate(G.centralizer_masks) if m == full), G.order)


def centralizer(G: FiniteGroup, X: Iterable[int]) -> Subgroup:
    mask = (1 << G.order) - 1
    for x in X:
        mask &= G.centralizer_masks[x]
    return Subgroup.from_mask(mask, G.order)


def is_central(G: FiniteGroup, B: Iterable[int]) -> bool:
    Z = centre(G)
    return all(b in Z for b in B)


def special_set(H: FiniteGroup, w: PurityWitness) -> tuple[int, ...]:
    """Elements ``h`` with ``h^(p^k) = 1`` that commute with ``b``."""
    q = w.q
    return tuple(h for h in range(H.order)
                 if H.pow(h, q) == 0 and H.commute(h, w.b))


def primes_dividing(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def purity_witness_search(H: FiniteGroup) -> Optional[PurityWitness]:
    """Smallest ``(p, k, b)`` showing the centre of ``H`` is not pure, or ``None``."""
    Z = centre(H)
    exp = H.exponent
    for p in primes_dividing(H.order):
        k = 1
        while p ** k <= exp:
            q = p ** k
            central_powers = {H.pow(z, q) for z in Z}
            for b in range(H.order):
                bq = H.pow(b, q)
                if bq in Z and bq not in central_powers:
                    return PurityWitness(b, p, k)
            k += 1
    return None


def p_pure_check(A: FiniteGroup, B: Subgroup | Iterable[int], p: int, k: int) -> bool:
    """Whether ``B ∩ {a^(p^k)} == {b^(p^k) : b in B}`` for a central ``B``."""
    B = tuple(B)
    if not is_central(A, B):
        raise ValueError("p_pure_check requires a central subgroup B")
    q = p ** k
    bset = set(B)
    lhs = {A.pow(a, q) for a in range(A.order)} & bset
    rhs = {A.pow(b, q) for b in B}
    return lhs == rhs


def is_pure(A: FiniteGroup, B: Iterable[int], max_exponent: Optional[int] = None) -> bool:
    """Direct purity test over all exponents ``1..exponent(A)``."""
    B = tuple(B)
    bset = set(B)
    top = max_exponent or A.exponent
    for e in range(1, top + 1):
        lhs = {A.pow(a, e) for a in range(A.order)} & bset
        if lhs != {A.pow(b, e) for b in B}:
            return False
    return True


def generators_mod_centre(H: FiniteGroup) -> tuple[int, ...]:
    """Greedy generating sequence of ``H`` modulo its centre (smallest index first)."""
    full = (1 << H.order) - 1
    current = centre(H).mask
    gens: list[int] = []
    while current != full:
        for h in range(H.order):
            if not (current >> h) & 1:
                gens.append(h)
                current = generated_mask(H, [h], start=current)
                break
    return tuple(gens)


# -- subgroup lattice -------------------------------------------------------

def subgroup_lattice(G: FiniteGroup, order_cap: int = LATTICE_ORDER_CAP,
                     size_cap: int = LATTICE_SIZE_CAP) -> list[Subgroup]:
    """All subgroups of ``G`` sorted by (order, members).

    Built by joining cyclic subgroups until nothing new appears.
    """
    if G.order > order_cap:
        raise BudgetExceeded(f"|G| = {G.order} exceeds lattice cap {order_cap}", needed=G.order)
    cyclic: dict[int, int] = {}
    for g in range(G.order):
        m = generated_mask(G, [g])
        cyclic.setdefault(m, g)
    seen = set(cyclic)
    frontier = list(cyclic)
    while frontier:
        nxt = []
        for K in frontier:
            for cm, g in cyclic.items():
                if cm & ~K == 0:
                    continue
                J = generated_mask(G, [g], start=K)
                if J not in seen:
                    seen.add(J)
                    nxt.append(J)
                    if len(seen) > size_cap:
                        raise BudgetExceeded(
                            f"subgroup lattice larger than {size_cap}", needed=len(seen))
        frontier = nxt
    subs = [Subgroup.from_mask(m, G.order) for m in seen]
    subs.sort(key=lambda s: (len(s), s.members))
    return subs


def product_mask(G: FiniteGroup, A: int, B: int) -> int:
    """Bitmask of the product set ``AB``."""
    t = G.table
    out = 0
    bs = from_mask(B)
    for a in from_mask(A):
        row = t[a]
        for b in bs:
            out |= 1 << row[b]
    return out


def _centralizer_of_mask(G: FiniteGroup, mask: int) -> int:
    out = (1 << G.order) - 1
    for x in from_mask(mask):
        out &= G.centralizer_masks[x]
    return out


@dataclass(frozen=True)
class NSearchResult:
    n: int
    exact: bool
    family: tuple[Subgroup, ...] = ()
    note: str = ""


def bounded_n_search(H: FiniteGroup, E: Iterable[int], cap: int = 8,
                     order_cap: int = LATTICE_ORDER_CAP,
                     node_budget: int = 200_000) -> NSearchResult:
    """Largest family of pairwise commuting subgroups with product ``H``,
    none of which centralizes ``E``.

    Returns ``n = 0`` when no such family exists. ``exact`` is false when the
    lattice or the search budget was too large; ``n`` is then a lower bound.
    """
    E = tuple(E)
    full = (1 << H.order) - 1
    C = _centralizer_of_mask(H, to_mask(E))
    if C == full:
        return NSearchResult(0, True)
    try:
        lattice = subgroup_lattice(H, order_cap=order_cap)
    except BudgetExceeded as exc:
        # H itself is a valid one-member family because E is not central
        return NSearchResult(1, False, (Subgroup.from_mask(full, H.order),), note=str(exc))
    cands = [K for K in lattice if K.mask & ~C]
    cents = [_centralizer_of_mask(H, K.mask) for K in cands]
    masks = [K.mask for K in cands]
    best: list[int] = []
    nodes = 0
    exhausted = True

    def dfs(start: int, chosen: list[int], allowed: int, prod: int):
        nonlocal best, nodes, exhausted
        nodes += 1
        if nodes > node_budget:
            exhausted = False
            return
        if prod == full and len(chosen) > len(best):
            best = list(chosen)
        if len(chosen) >= cap:
            return
        for i in range(start, len(cands)):
            # members must commute elementwise with everything chosen so far
            if masks[i] & ~allowed:
                continue
            if len(chosen) + len(cands) - i <= len(best):
                break
            chosen.append(i)
            p = product_mask(H, prod, masks[i]) if chosen[:-1] else masks[i]
            dfs(i + 1, chosen, allowed & cents[i], p)
            chosen.pop()
            if not exhausted:
                return

    dfs(0, [], full, 1)
    family = tuple(cands[i] for i in best)
    note = "" if exhausted else f"node budget {node_budget} exhausted"
    return NSearchResult(len(best), exhausted, family, note)


def transfer_map(H: FiniteGroup, F: Subgroup | Iterable[int]) -> dict[int, int]:
    """The map ``x -> x^|H:F|`` into a central subgroup ``F``."""
    F = tuple(F)
    if not is_central(H, F):
        raise ValueError("transfer_map requires a central subgroup")
    if H.order % len(F):
        raise ValueError("F is not a subgroup of H (order does not divide |H|)")
    idx = H.order // len(F)
    tau = {x: H.pow(x, idx) for x in range(H.order)}
    fset = set(F)
    for x in range(H.order):
        if tau[x] not in fset:
            raise ConsistencyError(f"transfer image of {x} lies outside F")
        for y in range(H.order):
            if tau[H.mul(x, y)] != H.mul(tau[x], tau[y]):
                raise ConsistencyError(f"transfer is not a homomorphism at ({x}, {y})")
    return tau


def is_normal(G: FiniteGroup, K: Subgroup) -> bool:
    for g in range(G.order):
        for k in K.members:
            if G.conj(k, g) not in K:
                return False
    return True


def centre_direct_factor(H: FiniteGroup, order_cap: int = LATTICE_ORDER_CAP) -> Optional[Subgroup]:
    """A normal complement ``C`` of ``Z(H)`` (so ``H = Z(H) x C``), if one exists."""
    Z = centre(H)
    if len(Z) == H.order:
        return Subgroup((0,), H.order)
    target = H.order // len(Z)
    full = (1 << H.order) - 1
    for K in subgroup_lattice(H, order_cap=order_cap):
        if len(K) != target or K.mask & Z.mask != 1:
            continue
        if product_mask(H, Z.mask, K.mask) == full and is_normal(H, K):
            return K
    return None


def direct_product(A: FiniteGroup, B: FiniteGroup, name: Optional[str] = None) -> FiniteGroup:
    """``A x B`` with ``(a, b)`` at index ``a*|B| + b``."""
    nb = B.order
    n = A.order * nb
    table = [[0] * n for _ in range(n)]
    for a1 in range(A.order):
        for b1 in range(nb):
            row = table[a1 * nb + b1]
            for a2 in range(A.order):
                base = A.table[a1][a2] * nb
                for b2 in range(nb):
                    row[a2 * nb + b2] = base + B.table[b1][b2]
    names = [f"({x},{y})" for x in A.names for y in B.names]
    return FiniteGroup(table, names, name=name or f"{A.name}x{B.name}", check=False)
