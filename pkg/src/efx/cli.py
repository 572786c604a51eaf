"""Command line interface.

Exit status: 0 for True / pass / the requested outcome, 1 for False or a
violation, 2 for Unknown, 64 for usage errors.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from .errors import EfxError, ParseError
from .logic import Budget, Checker, _prepare, show_formula
from .parser import parse_formula, parse_program
from .printer import show_term
from .proofs import check_hoare, parse_triple
from .relations import NotFound, Universe, bounded_simulation, distinguish
from .theories import StoreTheory, get_theory
from .trees import CUT, Node, dump
from .verdict import FALSE, TRUE

EXIT_TRUE, EXIT_FALSE, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _verdict_exit(v) -> int:
    return EXIT_TRUE if v is TRUE else EXIT_FALSE if v is FALSE else EXIT_UNKNOWN


def read_source(name: str) -> str:
    """Read a program file; names of bundled programs resolve when no such file exists."""
    p = Path(name)
    if p.exists():
        return p.read_text()
    bundled = resources.files("efx").joinpath("programs")
    for cand in (name, name + ".efx"):
        f = bundled.joinpath(Path(cand).name)
        if f.is_file():
            return f.read_text()
    raise UsageError(f"no such file: {name}")


def load_program(name: str):
    try:
        return parse_program(read_source(name))
    except ParseError as e:
        e.source = name
        raise


def _budget(args) -> Budget:
    return Budget(
        fuel=args.fuel,
        width=args.width,
        arg_fuel=args.arg_fuel,
        max_size=getattr(args, "max_size", 8),
    )


def _add_budget(p):
    p.add_argument("--fuel", type=int, default=200)
    p.add_argument("--width", type=int, default=4)
    p.add_argument("--arg-fuel", type=int, default=2)


def frontier(t, path=()):
    """Paths to truncated subtrees, the positions an Unknown verdict depends on."""
    if t is CUT:
        yield path
    elif isinstance(t, Node):
        for i, c in enumerate(t.children):
            yield from frontier(c, path + (i,))


def _print_frontier(out, trees):
    for name, t in trees:
        paths = list(frontier(t))
        shown = ", ".join("/".join(map(str, p)) or "root" for p in paths[:10])
        more = f" (+{len(paths) - 10} more)" if len(paths) > 10 else ""
        out.write(f"unknown frontier of {name}: {len(paths)} cut(s) at {shown}{more}\n")


# ---------------------------------------------------------------- commands


def cmd_typecheck(args, out):
    prog = load_program(args.file)
    out.write(f"theory {prog.theory.key}\n")
    for name, d in prog.definitions.items():
        out.write(f"{name} : {d.type}\n")
    return EXIT_TRUE


def cmd_eval(args, out):
    prog = load_program(args.file)
    from .machine import eval_tree

    t = eval_tree(prog.term(args.term), args.fuel, args.width)
    out.write(dump(t))
    return EXIT_TRUE


def cmd_check(args, out):
    prog = load_program(args.file)
    term = prog.term(args.term)
    f = parse_formula(args.formula, prog)
    c = Checker(prog.theory, _budget(args))
    _prepare(term, f, prog.theory, "value" if term.is_value else "computation", args.positive)
    v = c.value(term, f) if term.is_value else c.computation(term, f)
    out.write(f"{v}\n")
    for note in sorted(c.caveats):
        out.write(f"caveat: {note}\n")
    if not v.definite:
        _print_frontier(out, [(show_term(m), t) for m, t in c._trees.items() if any(True for _ in frontier(t))])
    return _verdict_exit(v)


def cmd_compare(args, out):
    prog = load_program(args.file)
    a, b = prog.term(args.t1), prog.term(args.t2)
    budget = _budget(args)
    u = Universe([a, b], prog.theory, budget)
    table = bounded_simulation(u, prog.theory, budget, symmetric=not args.positive)
    rel = "similar" if args.positive else "bisimilar"
    ab, ba = (a, b) in table, (b, a) in table
    out.write(f"{args.t1} below {args.t2}: {ab}\n{args.t2} below {args.t1}: {ba}\n")
    verdict = ab and ba
    out.write(f"{rel} up to the budget: {verdict}\n")
    return EXIT_TRUE if verdict else EXIT_FALSE


def cmd_distinguish(args, out):
    prog = load_program(args.file)
    a, b = prog.term(args.t1), prog.term(args.t2)
    f = distinguish(a, b, prog.theory, _budget(args), positive=args.positive)
    out.write(f"{show_formula(f) if f is not NotFound else 'NotFound'}\n")
    found = f is not NotFound
    if args.expect_notfound:
        return EXIT_FALSE if found else EXIT_TRUE
    return EXIT_TRUE if found else EXIT_FALSE


def cmd_hoare(args, out):
    prog = load_program(args.file)
    if not isinstance(prog.theory, StoreTheory):
        raise UsageError("hoare needs a store program")
    tr = parse_triple(read_source(args.triple), prog)
    if args.mode:
        tr.mode = args.mode
    rep = check_hoare(tr, prog.theory, _budget(args))
    out.write(f"{show_formula(rep.formula)}\n{rep.verdict}\n")
    for note in rep.caveats:
        out.write(f"caveat: {note}\n")
    return _verdict_exit(rep.verdict)


def cmd_suite(args, out):
    from . import metatheory as mt

    th = get_theory(args.theory)
    names = mt.SUITES if args.suite == "all" else (args.suite,)
    ok = True
    for name in names:
        if name == "openness":
            rep = mt.check_openness(th, samples=args.samples, seed=args.seed)
        elif name == "decomposability":
            rep = mt.check_strong_decomposability(th, samples=args.samples, seed=args.seed)
        elif name == "relator":
            rep = mt.check_relator_laws(th, samples=args.samples, seed=args.seed)
        else:
            from .reproductions import congruence_pairs, shipped_universes

            unis = [seeds for t, seeds in shipped_universes() if t.key == th.key]
            pairs = [p for t, ps in congruence_pairs(seed=args.seed).items() if t.key == th.key for p in ps]
            rep = mt.check_coincidence_and_congruence(unis, th, Budget(max_size=6), pairs=pairs, seed=args.seed)
        for line in rep.lines():
            out.write(line + "\n")
        ok &= rep.passed
    return EXIT_TRUE if ok else EXIT_FALSE


def cmd_examples(args, out):
    from .reproductions import EXAMPLES

    r = EXAMPLES[EXAMPLE_ALIASES.get(args.name, args.name)]()
    out.write(str(r) + "\n")
    return EXIT_TRUE if r.ok else EXIT_FALSE


EXAMPLE_ALIASES = {"separation": "7.1", "approximations": "7.2"}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="efx", description="Effect trees, behavioural logic and applicative similarity.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("typecheck", help="parse a program and print the type of each definition")
    s.add_argument("file")
    s.set_defaults(fn=cmd_typecheck)

    s = sub.add_parser("eval", help="dump the effect tree of a computation")
    s.add_argument("file")
    s.add_argument("term")
    s.add_argument("--fuel", type=int, default=200)
    s.add_argument("--width", type=int, default=4)
    s.set_defaults(fn=cmd_eval)

    s = sub.add_parser("check", help="check a term against a formula")
    s.add_argument("file")
    s.add_argument("term")
    s.add_argument("formula")
    s.add_argument("--positive", action="store_true", help="reject formulas that use negation")
    _add_budget(s)
    s.set_defaults(fn=cmd_check)

    s = sub.add_parser("compare", help="bounded (bi)similarity of two terms")
    s.add_argument("file")
    s.add_argument("t1")
    s.add_argument("t2")
    s.add_argument("--positive", action="store_true", help="similarity instead of bisimilarity")
    _add_budget(s)
    s.set_defaults(fn=cmd_compare)

    s = sub.add_parser("distinguish", help="search for a formula true of T1 and false of T2")
    s.add_argument("file")
    s.add_argument("t1")
    s.add_argument("t2")
    s.add_argument("--max-size", type=int, default=8)
    s.add_argument("--positive", action="store_true")
    s.add_argument("--expect-notfound", action="store_true", help="exit 0 when no formula is found")
    _add_budget(s)
    s.set_defaults(fn=cmd_distinguish)

    s = sub.add_parser("hoare", help="compile a Hoare triple to a formula and check it")
    s.add_argument("file")
    s.add_argument("triple")
    s.add_argument("--mode", choices=("total", "partial"))
    _add_budget(s)
    s.set_defaults(fn=cmd_hoare)

    s = sub.add_parser("suite", help="run a metatheory suite")
    s.add_argument("--theory", required=True, choices=("pure", "error", "nondet", "prob", "store", "io"))
    s.add_argument("--suite", default="all", choices=("all", "openness", "decomposability", "relator", "coincidence"))
    s.add_argument("--samples", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(fn=cmd_suite)

    s = sub.add_parser("examples", help="replay a worked example")
    s.add_argument("name", choices=("7.1", "7.2", "store", "equation", *EXAMPLE_ALIASES))
    s.set_defaults(fn=cmd_examples)
    return p


def run_command(argv, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "fn", None):
            raise UsageError("a command is required")
        return args.fn(args, out)
    except UsageError as e:
        err.write(f"usage error: {e}\n")
        err.write(parser.format_usage())
        return EXIT_USAGE
    except ParseError as e:
        err.write(f"{getattr(e, 'source', '<argument>')}:{e}\n")
        return EXIT_FALSE
    except EfxError as e:
        err.write(f"error: {type(e).__name__}: {e}\n")
        return EXIT_FALSE


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
