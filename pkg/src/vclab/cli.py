"""Command-line interface: ``vclab <command> [options]``.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import __version__, catalog
from . import construction as cons
from . import group as grp
from . import solvers, zpk
from .cayley import load_group_file
from .errors import BudgetExceeded, ConstructionError, InvalidGroupError
from .group import FiniteGroup, PurityWitness
from .words import parse_word

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


@dataclass
class RunReport:
    command: list[str]
    parameters: dict
    result: dict = field(default_factory=dict)
    seed: int = 0
    timing: Optional[float] = None
    exit_code: int = 0

    def to_dict(self, with_timing: bool = True) -> dict:
        d = {"command": self.command, "parameters": self.parameters, "result": self.result,
             "seed": self.seed, "exit_code": self.exit_code, "tool_version": __version__}
        if with_timing:
            d["timing"] = self.timing
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        return cls(d["command"], d["parameters"], d["result"], d["seed"], d.get("timing"),
                   d.get("exit_code", 0))


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


class UsageError(Exception):
    pass


def resolve_group(spec: str) -> FiniteGroup:
    if spec.startswith("@"):
        return load_group_file(spec[1:])
    try:
        return catalog.get(spec)
    except KeyError as exc:
        raise UsageError(str(exc)) from None


def _witness(H: FiniteGroup, args) -> Optional[PurityWitness]:
    if args.b is None:
        if args.p is not None or args.k is not None:
            raise UsageError("--p/--k need --b")
        return None
    try:
        b = H.index_of(args.b)
    except KeyError as exc:
        raise UsageError(str(exc)) from None
    return PurityWitness(b, args.p or 2, args.k or 1)


def _names(H: FiniteGroup, elems) -> list[str]:
    return [H.name_of(g) for g in elems]


def _spec(H: FiniteGroup, args) -> cons.CounterexampleSpec:
    return cons.build_spec(H, _witness(H, args), n=args.n, m=args.m,
                           family_cap=args.cap_family, lattice_cap=args.cap_lattice)


# -- commands -------------------------------------------------------------------

def cmd_analyze(args) -> tuple[int, dict]:
    H = resolve_group(args.group)
    Z = grp.centre(H)
    w = _witness(H, args) or grp.purity_witness_search(H)
    out = {
        "group": H.name, "order": H.order, "exponent": H.exponent, "abelian": H.is_abelian,
        "centre": _names(H, Z.members),
        "centre_pure": w is None,
        "generators_mod_centre": _names(H, grp.generators_mod_centre(H)),
    }
    if w is not None:
        if not w.is_valid(H):
            out["witness_error"] = "supplied (b, p, k) is not a purity witness"
            return EXIT_FAIL, out
        E = grp.special_set(H, w)
        res = grp.bounded_n_search(H, E, order_cap=args.cap_lattice)
        out.update({
            "witness": {"b": H.name_of(w.b), "p": w.p, "k": w.k},
            "special_set": _names(H, E),
            "n": res.n, "n_exact": res.exact,
            "n_family": [_names(H, K.members) for K in res.family],
        })
        if res.note:
            out["n_note"] = res.note
    if H.order <= args.cap_lattice:
        C = grp.centre_direct_factor(H, order_cap=args.cap_lattice)
        out["centre_direct_factor"] = None if C is None else _names(H, C.members)
    return EXIT_OK, out


def cmd_construct(args) -> tuple[int, dict]:
    H = resolve_group(args.group)
    spec = _spec(H, args)
    d = cons.spec_to_dict(spec)
    if args.out:
        Path(args.out).write_text(dumps(d))
    return EXIT_OK, {"summary": spec.summary(), "caveats": spec.caveats,
                     "certification": spec.certification, **({} if args.out else {"spec": d})}


def cmd_verify_nac(args) -> tuple[int, dict]:
    H = resolve_group(args.group)
    spec = _spec(H, args)
    cert = solvers.certify_not_algebraically_closed(spec, budget=args.cap_nodes, seed=args.seed)
    d = cert.to_dict()
    if args.out:
        Path(args.out).write_text(dumps(d))
    return (EXIT_OK if cert.issued else EXIT_FAIL), d


def cmd_verify_vc(args) -> tuple[int, dict]:
    H = resolve_group(args.group)
    spec = _spec(H, args)
    words = None
    if args.word:
        words = [(w, parse_word(w)) for w in args.word]
    ev = solvers.verbal_closedness_audit(
        spec, word_classes=args.classes.split(","), trials=args.trials, seed=args.seed,
        max_len=args.max_len, max_vars=args.max_vars, g_cap=args.cap_g, pair_cap=args.cap_pairs,
        words=words)
    if args.out:
        Path(args.out).write_text(dumps(ev))
    return (EXIT_OK if ev["violations"] == 0 else EXIT_FAIL), ev


def cmd_fnlemma(args) -> tuple[int, dict]:
    p, k, n = args.p or 2, args.k or 1, args.n or 1
    m = args.m if args.m is not None else zpk.choose_m(p, k, n)
    mode = "sample" if args.sample else "enumerate"
    rep = zpk.verify_function_lemma(p, k, n, m, mode, budget=args.budget, seed=args.seed,
                                    family_cap=args.cap_family)
    out = rep.to_dict()
    if mode == "enumerate":
        S = zpk.PointSet(p, k, m)
        F = zpk.enumerate_F(p, k, n, m, S, cap=args.cap_family)
        out["S"] = [list(pt) for pt in S.points]
        out["functions"] = [{"values": list(f.values), "polynomial": zpk.format_poly(f.provenance)}
                            for f in F]
    return (EXIT_OK if rep.passed else EXIT_FAIL), out


def cmd_demo(args) -> tuple[int, dict]:
    H = resolve_group(args.group_pos or args.group)
    spec = _spec(H, args)
    cert = solvers.certify_not_algebraically_closed(spec, budget=args.cap_nodes, seed=args.seed)
    cert.vc_evidence = solvers.verbal_closedness_audit(
        spec, trials=args.trials, seed=args.seed, max_len=args.max_len, max_vars=args.max_vars,
        g_cap=args.cap_g, pair_cap=args.cap_pairs)
    d = cert.to_dict()
    d["summary"] = spec.summary()
    if args.out:
        Path(args.out).write_text(dumps(d))
    ok = cert.issued and cert.vc_evidence["violations"] == 0
    return (EXIT_OK if ok else EXIT_FAIL), d


def cmd_verify(args) -> tuple[int, dict]:
    try:
        d = json.loads(Path(args.certificate).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read certificate: {exc}") from None
    res = solvers.verify_certificate(d)
    return (EXIT_OK if res.ok else EXIT_FAIL), {
        "ok": res.ok, "problems": res.problems,
        "equations_checked": len(res.residuals_ok), "equations_ok": sum(res.residuals_ok)}


def cmd_catalog(args) -> tuple[int, dict]:
    return EXIT_OK, {name: catalog.get(name).order for name in catalog.CATALOG_NAMES}


COMMANDS = {
    "analyze": cmd_analyze, "construct": cmd_construct, "verify-nac": cmd_verify_nac,
    "verify-vc": cmd_verify_vc, "fnlemma": cmd_fnlemma, "demo": cmd_demo,
    "verify": cmd_verify, "catalog": cmd_catalog,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def build_parser() -> argparse.ArgumentParser:
    default_seed = int(os.environ.get("VCLAB_SEED", "0"))
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--group", default="q8", help="catalog name or @path to a Cayley file")
    common.add_argument("--b", help="witness element name")
    common.add_argument("--p", type=int)
    common.add_argument("--k", type=int)
    common.add_argument("--n", type=int)
    common.add_argument("--m", type=int)
    common.add_argument("--seed", type=int, default=default_seed)
    common.add_argument("--trials", type=int, default=200)
    common.add_argument("--max-len", type=int, default=8)
    common.add_argument("--max-vars", type=int, default=3)
    common.add_argument("--cap-nodes", type=int, default=solvers.DEFAULT_NODE_BUDGET)
    common.add_argument("--cap-family", type=int, default=4096)
    common.add_argument("--cap-lattice", type=int, default=grp.LATTICE_ORDER_CAP)
    common.add_argument("--cap-g", type=int, default=1 << 16)
    common.add_argument("--cap-pairs", type=int, default=1 << 23)
    common.add_argument("--out", help="write the main artifact (JSON) here")

    parser = _Parser(prog="vclab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("analyze", parents=[common], help="centre, purity witness, decomposition number")
    sub.add_parser("construct", parents=[common], help="build and certify S, F and the spec")
    sub.add_parser("verify-nac", parents=[common], help="certify non-algebraic-closedness")
    p = sub.add_parser("verify-vc", parents=[common], help="audit verbal closedness")
    p.add_argument("--classes", default="power,curated,random")
    p.add_argument("--word", action="append", help="override the curated word list")
    p = sub.add_parser("fnlemma", parents=[common], help="check the function-family properties")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--enumerate", action="store_true")
    mode.add_argument("--sample", action="store_true")
    p.add_argument("--budget", type=int, default=1000)
    p = sub.add_parser("demo", parents=[common], help="end-to-end certificate for one group")
    p.add_argument("group_pos", nargs="?", metavar="GROUP")
    p = sub.add_parser("verify", help="re-check a stored certificate")
    p.add_argument("certificate")
    sub.add_parser("catalog", help="list catalog groups")
    return parser


def run_command(argv: Sequence[str]) -> tuple[int, RunReport]:
    argv = list(argv)
    report = RunReport(argv, {})
    t0 = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        report.parameters = {k: v for k, v in sorted(vars(args).items()) if k != "command"}
        report.seed = getattr(args, "seed", 0)
        code, result = COMMANDS[args.command](args)
        report.result = result
    except UsageError as exc:
        code, report.result = EXIT_USAGE, {"error": str(exc)}
    except BudgetExceeded as exc:
        code, report.result = EXIT_BUDGET, {"error": str(exc), "needed": exc.needed}
    except (ConstructionError, InvalidGroupError) as exc:
        code, report.result = EXIT_FAIL, {"error": str(exc)}
    report.timing = round(time.perf_counter() - t0, 3)
    report.exit_code = code
    return code, report


def main(argv: Optional[Sequence[str]] = None) -> int:
    code, report = run_command(sys.argv[1:] if argv is None else argv)
    if code == EXIT_USAGE:
        sys.stderr.write(report.result["error"] + "\n")
    else:
        sys.stdout.write(dumps(report.to_dict()))
    return code


if __name__ == "__main__":
    sys.exit(main())
