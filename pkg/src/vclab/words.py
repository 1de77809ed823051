"""Words in free groups and in ``H * F(x, y, ...)``, plus Nielsen changes of variables.

A letter is either ``Var(i, sign)`` (``x_i`` or its inverse) or ``Coef(h)``
(an element of the coefficient group). Words are kept freely reduced:
adjacent coefficients are multiplied out immediately and identity
coefficients dropped, which is why reduction needs the coefficient group.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Optional, Sequence, Union


class Var(NamedTuple):
    index: int
    sign: int = 1

    def inverse(self) -> "Var":
        return Var(self.index, -self.sign)


class Coef(NamedTuple):
    elem: int


Letter = Union[Var, Coef]


def var_name(i: int) -> str:
    return "xyz"[i] if i < 3 else f"x{i}"


@dataclass(frozen=True)
class MixedWord:
    letters: tuple[Letter, ...] = ()
    nvars: int = 0

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return format_word(self)

    @property
    def has_coefficients(self) -> bool:
        return any(isinstance(a, Coef) for a in self.letters)

    def variables(self) -> tuple[int, ...]:
        return tuple(sorted({a.index for a in self.letters if isinstance(a, Var)}))

    def inverse(self, H=None) -> "MixedWord":
        out = []
        for a in reversed(self.letters):
            out.append(a.inverse() if isinstance(a, Var) else Coef(H.inv(a.elem)))
        return MixedWord(tuple(out), self.nvars)

    def concat(self, other: "MixedWord", H=None) -> "MixedWord":
        return reduce(MixedWord(self.letters + other.letters, max(self.nvars, other.nvars)), H)


def word(*letters: Letter, nvars: Optional[int] = None, H=None) -> MixedWord:
    """Build and reduce a word from letters; ``nvars`` defaults to the largest variable + 1."""
    if nvars is None:
        nvars = 1 + max((a.index for a in letters if isinstance(a, Var)), default=-1)
    return reduce(MixedWord(tuple(letters), nvars), H)


def power(i: int, e: int, nvars: Optional[int] = None) -> MixedWord:
    """``x_i^e`` as a word."""
    s = 1 if e >= 0 else -1
    return word(*[Var(i, s)] * abs(e), nvars=nvars if nvars is not None else i + 1)


def commutator(u: MixedWord, v: MixedWord, H=None) -> MixedWord:
    """``[u, v] = u^-1 v^-1 u v``."""
    n = max(u.nvars, v.nvars)
    return reduce(MixedWord(u.inverse(H).letters + v.inverse(H).letters + u.letters + v.letters, n), H)


def reduce(w: MixedWord, H=None) -> MixedWord:
    """Free reduction in ``H * F``; coefficient runs are fused using ``H``'s table."""
    out: list[Letter] = []
    for a in w.letters:
        if isinstance(a, Coef):
            if a.elem == 0:
                continue
            if out and isinstance(out[-1], Coef):
                if H is None:
                    raise ValueError("fusing coefficients needs the coefficient group")
                fused = H.mul(out[-1].elem, a.elem)
                out.pop()
                if fused != 0:
                    out.append(Coef(fused))
                continue
            out.append(a)
        else:
            if out and isinstance(out[-1], Var) and out[-1].index == a.index and out[-1].sign == -a.sign:
                out.pop()
            else:
                out.append(a)
    return MixedWord(tuple(out), w.nvars)


def exponent_sums(w: MixedWord) -> tuple[int, ...]:
    sums = [0] * w.nvars
    for a in w.letters:
        if isinstance(a, Var):
            sums[a.index] += a.sign
    return tuple(sums)


# -- Nielsen moves ------------------------------------------------------------

@dataclass(frozen=True)
class NielsenMove:
    """One elementary automorphism.

    ``kind`` is ``"swap"`` (x_i <-> x_j), ``"invert"`` (x_i -> x_i^-1) or
    ``"multiply"`` (x_i -> x_i x_j^sign).
    """

    kind: str
    i: int
    j: int = -1
    sign: int = 1

    def __post_init__(self):
        if self.kind not in ("swap", "invert", "multiply"):
            raise ValueError(f"unknown move kind {self.kind!r}")
        if self.kind != "invert" and self.i == self.j:
            raise ValueError("swap/multiply need two distinct variables")

    def inverse(self) -> "NielsenMove":
        if self.kind == "multiply":
            return NielsenMove("multiply", self.i, self.j, -self.sign)
        return self

    def image(self, a: Var) -> tuple[Var, ...]:
        """Image of one variable letter under the move."""
        i, j = self.i, self.j
        if self.kind == "swap":
            if a.index == i:
                return (Var(j, a.sign),)
            if a.index == j:
                return (Var(i, a.sign),)
            return (a,)
        if self.kind == "invert":
            return (a.inverse(),) if a.index == i else (a,)
        if a.index != i:
            return (a,)
        if a.sign > 0:
            return (a, Var(j, self.sign))
        return (Var(j, -self.sign), a)

    def act(self, e: Sequence[int]) -> tuple[int, ...]:
        """Effect on an exponent-sum vector."""
        e = list(e)
        if self.kind == "swap":
            e[self.i], e[self.j] = e[self.j], e[self.i]
        elif self.kind == "invert":
            e[self.i] = -e[self.i]
        else:
            e[self.j] += self.sign * e[self.i]
        return tuple(e)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "i": self.i, "j": self.j, "sign": self.sign}


@dataclass(frozen=True)
class VariableSubstitution:
    """A composition of Nielsen moves, applied to a word in order."""

    moves: tuple[NielsenMove, ...] = ()
    nvars: int = 0

    def inverse(self) -> "VariableSubstitution":
        return VariableSubstitution(tuple(m.inverse() for m in reversed(self.moves)), self.nvars)

    def act(self, e: Sequence[int]) -> tuple[int, ...]:
        e = tuple(e)
        for m in self.moves:
            e = m.act(e)
        return e

    def images(self) -> list[MixedWord]:
        """``sigma(x_j)`` for every variable."""
        return [apply_substitution(self, MixedWord((Var(j),), self.nvars)) for j in range(self.nvars)]


def apply_substitution(sub: VariableSubstitution, w: MixedWord, H=None) -> MixedWord:
    nvars = max(sub.nvars, w.nvars)
    letters = w.letters
    for m in sub.moves:
        out: list[Letter] = []
        for a in letters:
            if isinstance(a, Var):
                out.extend(m.image(a))
            else:
                out.append(a)
        letters = reduce(MixedWord(tuple(out), nvars), H).letters
    return MixedWord(letters, nvars)


def normalize_power_form(w: MixedWord) -> tuple[int, VariableSubstitution]:
    """Change of variables bringing the exponent sums of ``w`` to ``(m, 0, ..., 0)``.

    Euclid on the exponent vector: the entry of least absolute value is the
    pivot and every other entry is reduced modulo it, one ``multiply`` move
    per subtraction.
    """
    if w.has_coefficients:
        raise ValueError("normalize_power_form takes a pure free-group word")
    e = list(exponent_sums(w))
    moves: list[NielsenMove] = []

    def push(m: NielsenMove):
        nonlocal e
        moves.append(m)
        e = list(m.act(e))

    while True:
        nz = [i for i, v in enumerate(e) if v]
        if len(nz) <= 1:
            break
        p = min(nz, key=lambda i: (abs(e[i]), i))
        for j in nz:
            if j == p:
                continue
            q = int(e[j] / e[p])
            for _ in range(abs(q)):
                push(NielsenMove("multiply", p, j, -1 if q > 0 else 1))
    nz = [i for i, v in enumerate(e) if v]
    if nz:
        if nz[0] != 0:
            push(NielsenMove("swap", 0, nz[0]))
        if e[0] < 0:
            push(NielsenMove("invert", 0))
    m = abs(e[0]) if e else 0
    return m, VariableSubstitution(tuple(moves), w.nvars)


# -- evaluation -----------------------------------------------------------------

def evaluate(w: MixedWord, G, assignment: Sequence, embed: Optional[Callable] = None):
    """Value of ``w`` in ``G`` (anything with ``mul``, ``inv`` and ``identity``).

    ``embed`` maps coefficient elements into ``G``; it defaults to the identity,
    i.e. the coefficient group is ``G`` itself.
    """
    acc = G.identity
    for a in w.letters:
        if isinstance(a, Var):
            if a.index >= len(assignment) or assignment[a.index] is None:
                raise KeyError(f"no value assigned to {var_name(a.index)}")
            v = assignment[a.index]
            acc = G.mul(acc, v if a.sign > 0 else G.inv(v))
        else:
            acc = G.mul(acc, embed(a.elem) if embed else a.elem)
    return acc


def transform_assignment(sub: VariableSubstitution, G, assignment: Sequence,
                         embed: Optional[Callable] = None) -> list:
    """``(sigma(x_j)(a))_j``, so that ``evaluate(sigma(w), a) == evaluate(w, result)``."""
    return [evaluate(img, G, assignment, embed) for img in sub.images()]


# -- random words -----------------------------------------------------------

def random_word(rng: random.Random, max_len: int, nvars: int) -> MixedWord:
    """Uniform reduced free word of length ``1..max_len``; cancellations are rejected."""
    length = rng.randint(1, max_len)
    letters: list[Var] = []
    while len(letters) < length:
        a = Var(rng.randrange(nvars), rng.choice((1, -1)))
        if letters and letters[-1] == a.inverse():
            continue
        letters.append(a)
    return MixedWord(tuple(letters), nvars)


# -- text syntax ----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\()|(\))|`([^`]+)`|([xyz]\d*))(?:\^(-?\d+))?")


def _parse_var(name: str) -> int:
    if len(name) == 1:
        return "xyz".index(name)
    if name[0] != "x":
        raise ValueError(f"bad variable name {name!r}")
    return int(name[1:])


def parse_word(text: str, H=None, nvars: Optional[int] = None) -> MixedWord:
    """Parse e.g. ``x^-1 y^-1 x y `b```; parentheses with exponents are allowed.

    Coefficients are backquoted element names of ``H``.
    """
    pos = 0
    stack: list[list[Letter]] = [[]]
    text = text.strip()
    if text == "1":
        return MixedWord((), nvars or 0)
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse word at column {pos + 1}: {text[pos:]!r}")
        pos = m.end()
        lpar, rpar, coef, var, exp = m.groups()
        e = int(exp) if exp is not None else 1
        if lpar:
            if exp is not None:
                raise ValueError("exponent after '(' is not allowed")
            stack.append([])
            continue
        if rpar:
            if len(stack) == 1:
                raise ValueError(f"unbalanced ')' at column {pos}")
            block = stack.pop()
        elif coef is not None:
            if H is None:
                raise ValueError("coefficients need a coefficient group")
            block = [Coef(H.index_of(coef))]
        else:
            block = [Var(_parse_var(var))]
        if e < 0:
            block = list(MixedWord(tuple(block)).inverse(H).letters)
        stack[-1].extend(block * abs(e))
    if len(stack) != 1:
        raise ValueError("unbalanced '('")
    letters = stack[0]
    top = 1 + max((a.index for a in letters if isinstance(a, Var)), default=-1)
    return reduce(MixedWord(tuple(letters), max(top, nvars or 0)), H)


def format_word(w: MixedWord, H=None, var_names: Optional[Callable[[int], str]] = None) -> str:
    if not w.letters:
        return "1"
    vn = var_names or var_name
    parts: list[str] = []
    i = 0
    L = w.letters
    while i < len(L):
        a = L[i]
        if isinstance(a, Coef):
            parts.append(f"`{H.name_of(a.elem) if H is not None else a.elem}`")
            i += 1
            continue
        j = i
        while j < len(L) and L[j] == a:
            j += 1
        e = (j - i) * a.sign
        parts.append(vn(a.index) if e == 1 else f"{vn(a.index)}^{e}")
        i = j
    return " ".join(parts)


def word_to_json(w: MixedWord) -> list:
    return [["v", a.index, a.sign] if isinstance(a, Var) else ["c", a.elem] for a in w.letters]


def word_from_json(data: Iterable, nvars: int) -> MixedWord:
    letters = [Var(a[1], a[2]) if a[0] == "v" else Coef(a[1]) for a in data]
    return MixedWord(tuple(letters), nvars)


def gcd_of(values: Iterable[int]) -> int:
    return math.gcd(*values)
