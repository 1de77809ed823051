"""Reading and writing Cayley-table files.

Format::

    group <name> order <N>
    <N lines of N whitespace-separated 0-based indices>
    names <n0> <n1> ...        (optional, shell-style quoting)

Blank lines and ``#`` comments are ignored. Index 0 must be the identity.
"""

from __future__ import annotations

import shlex
from pathlib import Path

from .errors import InvalidGroupError
from .group import FiniteGroup


class CayleyParseError(InvalidGroupError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def parse_group(text: str) -> FiniteGroup:
    lines = [(i + 1, ln.split("#", 1)[0].rstrip()) for i, ln in enumerate(text.splitlines())]
    lines = [(i, ln) for i, ln in lines if ln.strip()]
    if not lines:
        raise CayleyParseError("empty file", 1)
    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 4 or parts[0] != "group" or parts[2] != "order":
        raise CayleyParseError("expected 'group <name> order <N>'", lineno)
    name = parts[1]
    try:
        n = int(parts[3])
    except ValueError:
        raise CayleyParseError(f"order {parts[3]!r} is not an integer", lineno,
                               header.index(parts[3]) + 1) from None
    if n < 1:
        raise CayleyParseError("order must be positive", lineno)
    rows = []
    names = None
    for lineno, ln in lines[1:]:
        tokens = ln.split()
        if tokens[0] == "names":
            try:
                names = shlex.split(ln)[1:]
            except ValueError as exc:
                raise CayleyParseError(f"bad names line: {exc}", lineno) from None
            if len(names) != n:
                raise CayleyParseError(f"expected {n} names, got {len(names)}", lineno)
            continue
        if len(rows) == n:
            raise CayleyParseError("more table rows than the declared order", lineno)
        row = []
        col = 0
        for tok in tokens:
            col = ln.index(tok, col)
            try:
                v = int(tok)
            except ValueError:
                raise CayleyParseError(f"{tok!r} is not an integer", lineno, col + 1) from None
            if not 0 <= v < n:
                raise CayleyParseError(f"index {v} out of range 0..{n - 1}", lineno, col + 1)
            row.append(v)
            col += len(tok)
        if len(row) != n:
            raise CayleyParseError(f"row {len(rows)} has {len(row)} entries, expected {n}", lineno)
        rows.append(row)
    if len(rows) != n:
        raise CayleyParseError(f"expected {n} table rows, got {len(rows)}", lines[-1][0])
    return FiniteGroup(rows, names, name=name)


def load_group_file(path: str | Path) -> FiniteGroup:
    return parse_group(Path(path).read_text())


def format_group(G: FiniteGroup) -> str:
    width = len(str(G.order - 1))
    out = [f"group {G.name} order {G.order}"]
    for row in G.table:
        out.append(" ".join(str(v).rjust(width) for v in row))
    out.append("names " + " ".join(shlex.quote(x) for x in G.names))
    return "\n".join(out) + "\n"


def save_group_file(G: FiniteGroup, path: str | Path) -> None:
    Path(path).write_text(format_group(G))
