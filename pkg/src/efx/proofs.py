"""Compositional reasoning: let rules, operation rules, Hoare triples, equations."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from math import factorial
from typing import Callable

from .errors import ArityMismatch, BoundsTooSmall, ParseError, PreconditionViolation, TypeMismatch
from .logic import (
    BOT,
    TOP,
    And,
    Budget,
    Checker,
    Formula,
    Modal,
    NatIs,
    Not,
    Or,
    PureMaps,
    check_formula_type,
    show_formula,
)
from .relations import NotFound, Universe, FormulaSpace, VALUE, distinguish
from .syntax import (
    Arrow,
    Lam,
    Let,
    NatType,
    Op,
    UnitType,
    App,
    as_nat,
    numeral,
    substitute,
    typecheck,
)
from .theories import (
    Box,
    Dia,
    EffectTheory,
    ProbGt,
    Store,
    StoreTheory,
    staircase_area,
)
from .trees import payloads
from .verdict import FALSE, TRUE, Verdict

# ---------------------------------------------------------------- let rules


@dataclass(frozen=True)
class LetRule:
    """From M |= o_i psi_i and (fun x. N) |= [psi_i => o_i' phi] for all i, conclude let M => x in N |= o phi.

    Probabilistic rules carry the side condition that the staircase area of
    their premise thresholds reaches the conclusion threshold.
    """

    conclusion: object
    premises: tuple
    theory: str = ""

    def side_condition(self) -> bool:
        if not isinstance(self.conclusion, ProbGt):
            return True
        avals = [a.q for a, _ in self.premises]
        bvals = [b.q for _, b in self.premises]
        return bool(self.premises) and staircase_area(avals, bvals) >= self.conclusion.q

    def __str__(self):
        pairs = ", ".join(f"({a}, {b})" for a, b in self.premises)
        return f"{self.conclusion} <= [{pairs}]"


@dataclass
class LetCheck:
    """Premise verdicts, the conclusion they establish, and the direct cross-check."""

    verdict: Verdict
    premises: list
    direct: Verdict
    side_condition: bool
    caveats: list = field(default_factory=list)

    @property
    def violation(self) -> bool:
        """Premises established but the conclusion definitely fails."""
        return self.verdict is TRUE and self.direct is FALSE


def _as_lam(x, rho, n):
    return Lam(x, rho, n)


def check_let_rule(rule: LetRule, m, x: str, n, phi: Formula, psis, th: EffectTheory, budget: Budget = Budget()) -> LetCheck:
    """Evaluate the premises of ``rule`` for ``let m => x in n`` and cross-check the conclusion."""
    psis = list(psis)
    if len(psis) != len(rule.premises):
        raise ArityMismatch(f"{len(psis)} premise formula(s) for a rule with {len(rule.premises)} pair(s)")
    rho = typecheck({}, m, th.signature)
    tau = typecheck({x: rho}, n, th.signature)
    check_formula_type(phi, tau, "value", th.signature)
    for psi in psis:
        check_formula_type(psi, rho, "value", th.signature)
    c = Checker(th, budget)
    body = _as_lam(x, rho, n)
    verdicts = []
    for (o, o2), psi in zip(rule.premises, psis):
        left = c.computation(m, Modal(o, psi))
        right = c.value(body, PureMaps(psi, Modal(o2, phi)))
        verdicts.append((left, right))
    side = rule.side_condition()
    est = Verdict.all(v for pair in verdicts for v in pair) & Verdict.of(side)
    direct = c.computation(Let(m, x, n), Modal(rule.conclusion, phi))
    return LetCheck(est, verdicts, direct, side, sorted(c.caveats))


def _psi_candidates(c: Checker, m, x, rho, n, o2, phi, th, budget):
    """Value formulas psi for one premise pair, strongest evident choice first."""
    leaves = payloads(c.tree(m))

    def good(v):
        return c.computation(substitute(n, x, v), Modal(o2, phi))

    if isinstance(rho, UnitType):
        return [TOP] if not leaves or good(leaves[0]) is TRUE else [BOT]
    if isinstance(rho, NatType):
        ok = frozenset(as_nat(v) for v in leaves if good(v) is TRUE)
        return [NatIs(ok)]
    if not leaves:
        return [BOT]
    universe = Universe(leaves, th, budget)
    space = FormulaSpace(universe, positive=True)
    space.grow(budget.max_size)
    return list(space.formulas((rho, VALUE)))


def synthesize_let_rule(m, x: str, n, o, phi: Formula, th: EffectTheory, budget: Budget = Budget()):
    """Search the theory's premise-pair lists for a rule instance whose premises all hold.

    Lists are tried in the theory's decomposition order (fewest pairs first,
    then modality order). Returns ``(rule, psis)`` or NotFound.
    """
    rho = typecheck({}, m, th.signature)
    c = Checker(th, budget)
    direct = c.computation(Let(m, x, n), Modal(o, phi))
    if direct is not TRUE:
        raise PreconditionViolation(f"conclusion {o} {show_formula(phi)} is {direct}, not True")
    for pairs in th.decompositions(o):
        rule = LetRule(o, tuple(pairs), th.key)
        if not rule.side_condition():
            continue
        psis = []
        for o1, o2 in pairs:
            found = None
            for psi in _psi_candidates(c, m, x, rho, n, o2, phi, th, budget):
                if c.computation(m, Modal(o1, psi)) is TRUE and c.value(
                    _as_lam(x, rho, n), PureMaps(psi, Modal(o2, phi))
                ) is TRUE:
                    found = psi
                    break
            if found is None:
                break
            psis.append(found)
        else:
            return rule, psis
    return NotFound


# ---------------------------------------------------------------- operation rules


@dataclass
class RuleInstance:
    """An operation rule read as a biconditional between premise and conclusion."""

    name: str
    premise: Verdict
    conclusion: Verdict

    @property
    def disagreement(self) -> bool:
        return self.premise.definite and self.conclusion.definite and self.premise is not self.conclusion


def operation_rules(m: Op, phi: Formula, th: EffectTheory, budget: Budget = Budget(), bounds=None) -> list:
    """All operation-rule instances at the root of ``m`` against ``phi``.

    or: M1 or M2 |= dia phi iff one side does, box phi iff both do.
    lookup_l(V) |= (s>->s')phi iff V s(l) does; update_l(n; M) |= (s>->s')phi
    iff M |= (s[l:=n]>->s')phi.
    """
    c = Checker(th, budget)
    out = []
    if m.name == "or":
        a, b = m.args
        for o, join in ((Dia(), Verdict.any), (Box(), Verdict.all)):
            f = Modal(o, phi)
            out.append(RuleInstance(f"or/{o}", join([c.computation(a, f), c.computation(b, f)]), c.computation(m, f)))
        return out
    if isinstance(th, StoreTheory) and (m.name.startswith("lookup_") or m.name.startswith("update_")):
        loc = m.name.split("_", 1)[1]
        for o in th.modalities(bounds):
            f = Modal(o, phi)
            if m.name.startswith("lookup_"):
                prem = c.computation(App(m.cont, numeral(o.pre[loc])), f)
            else:
                k = as_nat(m.param)
                if k > th.value_bound(bounds):
                    continue
                prem = c.computation(m.args[0], Modal(Store(o.pre.set(loc, k), o.post), phi))
            out.append(RuleInstance(f"{m.name}/{o}", prem, c.computation(m, f)))
        return out
    raise TypeMismatch(f"no operation rules for {m.name} in theory {th.key}")


# ---------------------------------------------------------------- equations


@dataclass
class EquationReport:
    verdict: Verdict
    witness: Formula | None = None
    compared: int = 0
    unresolved: int = 0


def basic_value_formulas(ty, leaves=(), budget: Budget = Budget()) -> list:
    if isinstance(ty, UnitType):
        return [TOP]
    if isinstance(ty, NatType):
        ns = sorted({as_nat(v) for v in leaves} | set(range(budget.arg_fuel + 1)))
        return [NatIs(frozenset([k])) for k in ns]
    raise TypeMismatch("basic value formulas are only enumerated at ground types")


def check_equation(lhs, rhs, th: EffectTheory, bounds=None, budget: Budget = Budget()) -> EquationReport:
    """Compare two computations on every basic modal formula within bounds.

    At ground types the formulas are o{n} (or o top at unit) for each
    enumerated modality; at arrow types a full-logic distinguishing search is
    run instead. True means no definite disagreement was found.
    """
    t1 = typecheck({}, lhs, th.signature)
    t2 = typecheck({}, rhs, th.signature)
    if t1 != t2:
        raise TypeMismatch(f"{t1} and {t2} differ")
    if isinstance(t1, Arrow):
        f = distinguish(lhs, rhs, th, budget, positive=False, bounds=bounds)
        if f is NotFound:
            return EquationReport(TRUE)
        return EquationReport(FALSE, f)
    c = Checker(th, budget)
    leaves = payloads(c.tree(lhs)) + payloads(c.tree(rhs))
    compared = unresolved = 0
    for o in th.modalities(bounds):
        for psi in basic_value_formulas(t1, leaves, budget):
            f = Modal(o, psi)
            a, b = c.computation(lhs, f), c.computation(rhs, f)
            compared += 1
            if a.definite and b.definite:
                if a is not b:
                    return EquationReport(FALSE, f, compared, unresolved)
            else:
                unresolved += 1
    return EquationReport(TRUE, None, compared, unresolved)


# ---------------------------------------------------------------- Hoare triples


@dataclass
class HoareTriple:
    """{pre} program {post} over the bounded store states.

    ``pre(z, s)`` and ``post(z, s, s2, v)`` take the auxiliary variable z,
    instantiated over ``z_range``; ``v`` is the return value as an int (None
    at unit type).
    """

    pre: Callable
    program: object
    post: Callable
    mode: str = "total"
    z_range: tuple = (0,)
    limits: tuple = ()

    @staticmethod
    def simple(pre, program, post, mode="total"):
        """A triple without auxiliary variable: pre(s), post(s2, v)."""
        return HoareTriple(lambda z, s: pre(s), program, lambda z, s, s2, v: post(s2, v), mode)


def compile_hoare(tr: HoareTriple, th: StoreTheory, bounds=None) -> Formula:
    """The modal formula equivalent to the triple at the theory's bounds.

    total:   and over z, s with pre: or over (s2, v) with post of (s>->s2){v}
    partial: as total, with the extra disjunct not (or over s2 of (s>->s2) top)
    """
    if tr.mode not in ("total", "partial"):
        raise ValueError(f"mode must be total or partial, not {tr.mode!r}")
    B = th.value_bound(bounds)
    for lim in tr.limits:
        if lim > B:
            raise BoundsTooSmall(f"the triple refers to the value {lim}, above the bound {B}")
    ty = typecheck({}, tr.program, th.signature)
    if isinstance(ty, Arrow):
        raise TypeMismatch("Hoare triples need a program of ground type")
    states = th.states(bounds)
    conj = []
    seen = set()
    for z in tr.z_range:
        for s in states:
            if not tr.pre(z, s):
                continue
            disj = []
            for s2 in states:
                if isinstance(ty, UnitType):
                    if tr.post(z, s, s2, None):
                        disj.append(Modal(Store(s, s2), TOP))
                else:
                    ok = frozenset(v for v in range(B + 1) if tr.post(z, s, s2, v))
                    if ok:
                        disj.append(Modal(Store(s, s2), NatIs(ok)))
            body = _or(disj)
            if tr.mode == "partial":
                body = _or([body, Not(_or([Modal(Store(s, s2), TOP) for s2 in states]))])
            if body not in seen:
                seen.add(body)
                conj.append(body)
    if not conj:
        return TOP
    return conj[0] if len(conj) == 1 else And(tuple(conj))


def _or(items):
    return items[0] if len(items) == 1 else Or(tuple(items))  # Or(()) is BOT


@dataclass
class HoareReport:
    formula: Formula
    verdict: Verdict
    caveats: list = field(default_factory=list)


def check_hoare(tr: HoareTriple, th: StoreTheory, budget: Budget = Budget(), bounds=None) -> HoareReport:
    f = compile_hoare(tr, th, bounds)
    c = Checker(th, budget)
    return HoareReport(f, c.computation(tr.program, f), sorted(c.caveats))


# Triple files: one directive per line.
#   program NAME
#   pre  COND           COND: true | states S S ... | LOC = EXPR [and LOC = EXPR ...]
#   post COND           in post, EXPR may mention start values as 'old LOC', and 'ret = EXPR'
#   z LO..HI
#   mode total|partial
# EXPR: NUM | z | old LOC, optionally followed by ! and/or + NUM.

_EXPR = re.compile(r"^(?:(\d+)|z|old\s+(\w+))\s*(!)?\s*(?:\+\s*(\d+))?$")


def _expr(text):
    m = _EXPR.match(text.strip())
    if m is None:
        raise ParseError(f"bad expression {text!r}")
    num, loc, bang, plus = m.groups()

    def ev(z, s):
        base = int(num) if num is not None else (s[loc] if loc else z)
        if bang:
            base = factorial(base)
        return base + (int(plus) if plus else 0)

    ev.uses_state = loc is not None
    return ev


def _cond(text, post, parse_state):
    text = text.strip()
    if text == "true":
        return lambda z, s, s2=None, v=None: True
    if text.startswith("states"):
        states = [parse_state(m.group(0)) for m in re.finditer(r"\{[^}]*\}", text)]
        if post:
            return lambda z, s, s2, v: s2 in states
        return lambda z, s: s in states
    parts = []
    for clause in re.split(r"\band\b", text):
        lhs, sep, rhs = clause.partition("=")
        if not sep:
            raise ParseError(f"expected LOC = EXPR in {clause.strip()!r}")
        parts.append((lhs.strip(), _expr(rhs)))

    if post:
        def check(z, s, s2, v):
            return all((v if l == "ret" else s2[l]) == e(z, s) for l, e in parts)
    else:
        def check(z, s):
            return all(s[l] == e(z, s) for l, e in parts)

    check.exprs = parts
    return check


def parse_triple(text: str, program) -> HoareTriple:
    """Read a triple file against a parsed store program."""
    from .parser import Parser, tokenize

    def parse_state(src):
        return Parser(tokenize(src), program).state()

    fields = {"mode": "total"}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        if key not in ("program", "pre", "post", "z", "mode"):
            raise ParseError(f"unknown directive {key!r}", n, 1)
        fields[key] = rest.strip()
    for need in ("program", "pre", "post"):
        if need not in fields:
            raise ParseError(f"triple file lacks a {need!r} line")
    z_range = (0,)
    if "z" in fields:
        lo, _, hi = fields["z"].partition("..")
        z_range = tuple(range(int(lo), int(hi or lo) + 1))
    pre = _cond(fields["pre"], False, parse_state)
    post = _cond(fields["post"], True, parse_state)
    limits = []
    for cond in (pre, post):
        for loc, e in getattr(cond, "exprs", ()):
            if not e.uses_state:
                limits.extend(e(z, None) for z in z_range)
    return HoareTriple(pre, program.term(fields["program"]), post, fields["mode"], z_range, tuple(limits))


__all__ = [
    "LetRule",
    "LetCheck",
    "check_let_rule",
    "synthesize_let_rule",
    "RuleInstance",
    "operation_rules",
    "EquationReport",
    "check_equation",
    "basic_value_formulas",
    "HoareTriple",
    "HoareReport",
    "compile_hoare",
    "check_hoare",
    "parse_triple",
]
