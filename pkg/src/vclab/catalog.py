"""Named small groups used as worked examples.

Index conventions are pinned so that expected values in the tests are
reproducible:

* ``q8``: indices 0..7 are 1, -1, i, -i, j, -j, k, -k with ``i*j = k``.
* ``d<n>``: dihedral of order ``2n``; ``r^a f^e`` sits at ``a + n*e`` and
  ``f r f = r^-1``. So ``d4`` is the dihedral group of order 8.
* ``z<n>``: cyclic, written additively.
* ``s<n>``, ``a4``: permutations of 1..n in lexicographic order,
  multiplied left to right (``(g*h)(x) = h(g(x))``).
* ``heis<p>``: upper unitriangular 3x3 matrices over Z_p.
* ``AxB``: direct product, ``(a, b)`` at ``a*|B| + b``.
"""

from __future__ import annotations

import itertools
import re
from functools import lru_cache

from .group import FiniteGroup, direct_product


def cyclic(n: int) -> FiniteGroup:
    table = [[(a + b) % n for b in range(n)] for a in range(n)]
    return FiniteGroup(table, [str(i) for i in range(n)], name=f"z{n}")


def dihedral(n: int) -> FiniteGroup:
    """Dihedral group of order ``2n`` generated by ``r`` (order n) and ``f``."""
    def mul(x, y):
        a, e = x % n, x // n
        c, g = y % n, y // n
        return (a + (c if e == 0 else -c)) % n + n * ((e + g) % 2)

    table = [[mul(x, y) for y in range(2 * n)] for x in range(2 * n)]
    def rname(a):
        return "1" if a == 0 else ("r" if a == 1 else f"r{a}")
    names = [rname(a) for a in range(n)] + [("" if a == 0 else rname(a)) + "f" for a in range(n)]
    return FiniteGroup(table, names, name=f"d{n}")


_UNIT = {  # (u, v) -> (sign, w) for unit quaternions 1, i, j, k as 0..3
    (1, 1): (-1, 0), (2, 2): (-1, 0), (3, 3): (-1, 0),
    (1, 2): (1, 3), (2, 3): (1, 1), (3, 1): (1, 2),
    (2, 1): (-1, 3), (3, 2): (-1, 1), (1, 3): (-1, 2),
}


def quaternion() -> FiniteGroup:
    def mul(x, y):
        u, su = divmod(x, 2)
        v, sv = divmod(y, 2)
        if u == 0:
            sign, w = 1, v
        elif v == 0:
            sign, w = 1, u
        else:
            sign, w = _UNIT[(u, v)]
        neg = (su + sv + (sign < 0)) % 2
        return 2 * w + neg

    table = [[mul(x, y) for y in range(8)] for x in range(8)]
    names = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
    return FiniteGroup(table, names, name="q8")


def _cycle_name(perm) -> str:
    seen, parts = set(), []
    for start in range(len(perm)):
        if start in seen or perm[start] == start:
            continue
        cyc, x = [], start
        while x not in seen:
            seen.add(x)
            cyc.append(str(x + 1))
            x = perm[x]
        parts.append("(" + " ".join(cyc) + ")")
    return "".join(parts) or "()"


def _perm_group(perms, name) -> FiniteGroup:
    index = {p: i for i, p in enumerate(perms)}
    table = [[index[tuple(h[g[x]] for x in range(len(g)))] for h in perms] for g in perms]
    return FiniteGroup(table, [_cycle_name(p) for p in perms], name=name)


def symmetric(n: int) -> FiniteGroup:
    return _perm_group(list(itertools.permutations(range(n))), f"s{n}")


def _is_even(perm) -> bool:
    inversions = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm)) if perm[i] > perm[j])
    return inversions % 2 == 0


def alternating(n: int) -> FiniteGroup:
    perms = [p for p in itertools.permutations(range(n)) if _is_even(p)]
    return _perm_group(perms, f"a{n}")


def heisenberg(p: int) -> FiniteGroup:
    """UT3(Z_p); ``(a, b, c)`` is the matrix with 12-entry a, 23-entry b, 13-entry c."""
    elems = [(a, b, c) for a in range(p) for b in range(p) for c in range(p)]
    index = {e: i for i, e in enumerate(elems)}
    def mul(x, y):
        return index[((x[0] + y[0]) % p, (x[1] + y[1]) % p, (x[2] + y[2] + x[0] * y[1]) % p)]
    table = [[mul(x, y) for y in elems] for x in elems]
    names = [f"[{a},{b},{c}]" for a, b, c in elems]
    return FiniteGroup(table, names, name=f"heis{p}")


_PATTERNS = [
    (re.compile(r"z(\d+)$"), lambda m: cyclic(int(m[1]))),
    (re.compile(r"d(\d+)$"), lambda m: dihedral(int(m[1]))),
    (re.compile(r"s(\d)$"), lambda m: symmetric(int(m[1]))),
    (re.compile(r"a(\d)$"), lambda m: alternating(int(m[1]))),
    (re.compile(r"heis(\d+)$"), lambda m: heisenberg(int(m[1]))),
    (re.compile(r"q8$"), lambda m: quaternion()),
]

#: the names exercised by the test suite and listed by the CLI
CATALOG_NAMES = (
    "z1", "z2", "z3", "z4", "z6", "z8", "z2xz2", "z2xz4", "z2xz2xz2",
    "s3", "d4", "q8", "d5", "d6", "a4", "heis3", "s3xz2", "q8xz2", "d4xz2",
    "z3xs3", "s4", "heis5", "d8",
)


@lru_cache(maxsize=None)
def get(name: str) -> FiniteGroup:
    """Look up a catalog group by name, e.g. ``q8``, ``d4``, ``s3xz2``."""
    key = name.strip().lower()
    parts = key.split("x")
    if len(parts) > 1:
        G = get(parts[0])
        for part in parts[1:]:
            G = direct_product(G, get(part))
        G.name = key
        return G
    for pat, make in _PATTERNS:
        m = pat.match(key)
        if m:
            return make(m)
    raise KeyError(f"unknown catalog group {name!r}")
