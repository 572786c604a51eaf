"""Behavioural formulas and their three-valued satisfaction.

Value formulas: NatIs, Maps ([V |-> F]), PureMaps ([phi => F]) and the
connectives. Computation formulas: Modal (o phi) and the connectives.
``TOP = And(())`` and ``BOT = Or(())`` serve at both aspects.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

from .errors import ExplosionGuard, PolarityViolation, TypeMismatch
from .machine import eval_tree
from .syntax import (
    STAR,
    App,
    Arrow,
    NatType,
    Type,
    UnitType,
    Value,
    as_nat,
    enumerate_values,
    numeral,
    typecheck,
)
from .theories import Bounds, EffectTheory, Modality
from .trees import Tree, payloads, restrict
from .verdict import FALSE, TRUE, Verdict

# ---------------------------------------------------------------- formulas


class Formula:
    def __str__(self):
        return show_formula(self)

    def __repr__(self):
        return f"{type(self).__name__}<{show_formula(self)}>"


@dataclass(frozen=True, repr=False)
class NatIs(Formula):
    """Membership in a finite set, or in the complement of one when ``cofinite``."""

    values: frozenset
    cofinite: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", frozenset(self.values))

    def holds(self, n: int) -> bool:
        return (n in self.values) != self.cofinite


@dataclass(frozen=True, repr=False)
class Maps(Formula):
    arg: Value
    body: Formula


@dataclass(frozen=True, repr=False)
class PureMaps(Formula):
    pre: Formula
    body: Formula


@dataclass(frozen=True, repr=False)
class And(Formula):
    items: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))


@dataclass(frozen=True, repr=False)
class Or(Formula):
    items: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))


@dataclass(frozen=True, repr=False)
class Not(Formula):
    item: Formula


@dataclass(frozen=True, repr=False)
class Modal(Formula):
    modality: Modality
    body: Formula


TOP = And(())
BOT = Or(())


def nat_is(*ns) -> NatIs:
    return NatIs(frozenset(ns))


def children(f: Formula) -> list:
    if isinstance(f, (And, Or)):
        return list(f.items)
    if isinstance(f, Not):
        return [f.item]
    if isinstance(f, (Maps, Modal)):
        return [f.body]
    if isinstance(f, PureMaps):
        return [f.pre, f.body]
    return []


def formula_size(f: Formula) -> int:
    """Node count; the argument value of Maps and the modality are not nodes."""
    return 1 + sum(formula_size(c) for c in children(f))


def is_positive(f: Formula) -> bool:
    return not isinstance(f, Not) and all(is_positive(c) for c in children(f))


def is_pure(f: Formula) -> bool:
    return not isinstance(f, Maps) and all(is_pure(c) for c in children(f))


def uses_pure_maps(f: Formula) -> bool:
    return isinstance(f, PureMaps) or any(uses_pure_maps(c) for c in children(f))


def show_formula(f: Formula) -> str:
    if isinstance(f, NatIs):
        if not f.cofinite:
            return "{" + ",".join(str(n) for n in sorted(f.values)) + "}"
        k = len(f.values)
        if f.values == frozenset(range(k)):
            return "{>=%d}" % k
        return "{~" + ",".join(str(n) for n in sorted(f.values)) + "}"
    if isinstance(f, And):
        return "top" if not f.items else "and(" + ", ".join(map(show_formula, f.items)) + ")"
    if isinstance(f, Or):
        return "bot" if not f.items else "or(" + ", ".join(map(show_formula, f.items)) + ")"
    if isinstance(f, Not):
        return "not " + show_formula(f.item)
    if isinstance(f, Maps):
        return f"[{f.arg} |-> {show_formula(f.body)}]"
    if isinstance(f, PureMaps):
        return f"[{show_formula(f.pre)} => {show_formula(f.body)}]"
    if isinstance(f, Modal):
        return f"{f.modality} {show_formula(f.body)}"
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------- formula typing


def check_formula_type(f: Formula, ty: Type, aspect: str, sig=None):
    """Raise TypeMismatch unless ``f`` is a formula of ``ty`` at ``aspect``.

    ``aspect`` is ``"value"`` or ``"computation"``.
    """
    if isinstance(f, (And, Or)):
        for g in f.items:
            check_formula_type(g, ty, aspect, sig)
        return
    if isinstance(f, Not):
        check_formula_type(f.item, ty, aspect, sig)
        return
    if aspect == "computation":
        if not isinstance(f, Modal):
            raise TypeMismatch(f"{show_formula(f)} is not a computation formula")
        check_formula_type(f.body, ty, "value", sig)
        return
    if isinstance(f, Modal):
        raise TypeMismatch(f"{show_formula(f)} is a computation formula, a value formula is needed")
    if isinstance(f, NatIs):
        if not isinstance(ty, NatType):
            raise TypeMismatch(f"{show_formula(f)} needs type N, not {ty}")
        return
    if not isinstance(ty, Arrow):
        raise TypeMismatch(f"{show_formula(f)} needs a function type, not {ty}")
    if isinstance(f, Maps):
        if not f.arg.closed:
            raise TypeMismatch(f"argument {f.arg} of a formula must be closed")
        from .syntax import EMPTY_SIGNATURE

        aty = typecheck({}, f.arg, sig or EMPTY_SIGNATURE)
        if aty != ty.domain:
            raise TypeMismatch(f"argument {f.arg} has type {aty}, expected {ty.domain}")
        check_formula_type(f.body, ty.codomain, "computation", sig)
        return
    if isinstance(f, PureMaps):
        check_formula_type(f.pre, ty.domain, "value", sig)
        check_formula_type(f.body, ty.codomain, "computation", sig)
        return
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------- budgets and checking


@dataclass(frozen=True)
class Budget:
    """Evaluation and search cut-offs.

    ``fuel`` is the n of |M|_n, ``width`` the materialised children of
    infinite-arity nodes, ``arg_fuel`` the enumerate_values bound used for
    PureMaps and for the argument lists at arrow types. The remaining fields
    bound the relation and formula searches.
    """

    fuel: int = 200
    width: int = 4
    arg_fuel: int = 2
    closure_depth: int = 6
    max_size: int = 8
    explosion_guard: int = 12


CheckBudget = Budget


class Checker:
    """Satisfaction checker with evaluation and verdict caches.

    ``caveats`` collects notes on verdicts that are only relative to a finite
    candidate set of arguments.
    """

    def __init__(self, theory: EffectTheory, budget: Budget = Budget()):
        self.theory = theory
        self.budget = budget
        self.caveats: set = set()
        self._trees: dict = {}
        self._memo: dict = {}

    def tree(self, m) -> Tree:
        t = self._trees.get(m)
        if t is None:
            t = eval_tree(m, self.budget.fuel, self.budget.width)
            self._trees[m] = t
        return t

    def computation(self, m, f: Formula) -> Verdict:
        k = ("c", m, f)
        if k in self._memo:
            return self._memo[k]
        if isinstance(f, Modal):
            t = restrict(self.tree(m), lambda v: self.value(v, f.body))
            out = self.theory.verdict(f.modality, t)
        else:
            out = self._connective(f, lambda g: self.computation(m, g))
        self._memo[k] = out
        return out

    def value(self, v, f: Formula) -> Verdict:
        k = ("v", v, f)
        if k in self._memo:
            return self._memo[k]
        if isinstance(f, NatIs):
            n = as_nat(v)
            if n is None:
                raise TypeMismatch(f"{v} is not a numeral")
            out = Verdict.of(f.holds(n))
        elif isinstance(f, Maps):
            out = self.computation(App(v, f.arg), f.body)
        elif isinstance(f, PureMaps):
            out = self._pure_maps(v, f)
        else:
            out = self._connective(f, lambda g: self.value(v, g))
        self._memo[k] = out
        return out

    def _connective(self, f, sub):
        if isinstance(f, And):
            return Verdict.all(sub(g) for g in f.items)
        if isinstance(f, Or):
            return Verdict.any(sub(g) for g in f.items)
        if isinstance(f, Not):
            return ~sub(f.item)
        raise TypeMismatch(f"{show_formula(f)} used at the wrong aspect")

    def _pure_maps(self, v, f: PureMaps) -> Verdict:
        dom = _domain_of(v, self.theory)
        exact = _exact_support(f.pre, dom)
        if exact is None:
            cands = enumerate_values(dom, self.budget.arg_fuel, self.theory.signature)
            self.caveats.add(
                f"[{show_formula(f.pre)} => ...] at {dom} quantified over "
                f"{len(cands)} candidate value(s) (arg_fuel={self.budget.arg_fuel})"
            )
        else:
            cands = exact
        return Verdict.all(
            self.value(u, f.pre).implies(self.computation(App(v, u), f.body)) for u in cands
        )


def _domain_of(v, theory) -> Type:
    ty = typecheck({}, v, theory.signature)
    if not isinstance(ty, Arrow):
        raise TypeMismatch(f"{v} is not a function")
    return ty.domain


def _exact_support(pre: Formula, dom: Type):
    """A finite list of values containing every value satisfying ``pre``, if one is evident."""
    if isinstance(dom, UnitType):
        return [STAR]
    if not isinstance(dom, NatType):
        return None
    s = _finite_nat_support(pre)
    return None if s is None else [numeral(n) for n in sorted(s)]


def _finite_nat_support(f):
    if isinstance(f, NatIs):
        return None if f.cofinite else set(f.values)
    if isinstance(f, Or):
        out = set()
        for g in f.items:
            s = _finite_nat_support(g)
            if s is None:
                return None
            out |= s
        return out
    if isinstance(f, And):
        sets = [s for s in map(_finite_nat_support, f.items) if s is not None]
        if not sets:
            return None
        return set.intersection(*sets)
    return None


def _prepare(term, f, th, aspect, positive):
    if positive and not is_positive(f):
        raise PolarityViolation(f"{show_formula(f)} uses negation in a positive-only query")
    ty = typecheck({}, term, th.signature)
    check_formula_type(f, ty, aspect, th.signature)


def check_computation(m, f: Formula, th: EffectTheory, b: Budget = Budget(), positive=False) -> Verdict:
    _prepare(m, f, th, "computation", positive)
    return Checker(th, b).computation(m, f)


def check_value(v, f: Formula, th: EffectTheory, b: Budget = Budget(), positive=False) -> Verdict:
    _prepare(v, f, th, "value", positive)
    return Checker(th, b).value(v, f)


@dataclass
class Report:
    """A verdict together with the caveats collected while computing it."""

    verdict: Verdict
    caveats: list = field(default_factory=list)


def check(term, f: Formula, th: EffectTheory, b: Budget = Budget(), positive=False) -> Report:
    """Check a value or computation and return the verdict with its caveats."""
    aspect = "value" if term.is_value else "computation"
    _prepare(term, f, th, aspect, positive)
    c = Checker(th, b)
    v = c.value(term, f) if term.is_value else c.computation(term, f)
    return Report(v, sorted(c.caveats))


# ---------------------------------------------------------------- lifted membership and preorders


def in_modality(th: EffectTheory, o: Modality, t: Tree, member: Callable) -> Verdict:
    """The three-valued membership t in o(A) where A is given by ``member``."""
    return th.verdict(o, restrict(t, member))


def _never(_):
    return False


def tree_preorder(t: Tree, t2: Tree, th: EffectTheory, bounds: Bounds | None = None) -> Verdict:
    """t below t2: every o({*}) and o(empty) membership of t carries over to t2."""
    acc = TRUE
    for o in th.modalities(bounds):
        acc = acc & th.verdict(o, t).implies(th.verdict(o, t2))
        if acc is FALSE:
            return acc
        acc = acc & in_modality(th, o, t, _never).implies(in_modality(th, o, t2, _never))
        if acc is FALSE:
            return acc
    return acc


def subsets(xs):
    xs = list(xs)
    for k in range(len(xs) + 1):
        yield from itertools.combinations(xs, k)


def double_tree_preorder(r: Tree, r2: Tree, th: EffectTheory, bounds: Bounds | None = None, guard: int = 12) -> Verdict:
    """For all o and A: r in o(A) implies r2 in o(A up), A up taken along the tree preorder.

    Only subsets of r's own payloads are enumerated: any extra elements of A
    leave r's membership unchanged and can only enlarge A up.
    """
    left = payloads(r)
    right = payloads(r2)
    if len(left) > guard:
        raise ExplosionGuard(f"{len(left)} payloads exceed the guard of {guard}")
    above = {(a, b): tree_preorder(a, b, th, bounds) for a in left for b in right}
    mods = th.modalities(bounds)
    acc = TRUE
    for A in subsets(left):
        inA = set(A)
        up = {b: Verdict.any(above[a, b] for a in A) for b in right}
        for o in mods:
            lhs = in_modality(th, o, r, inA.__contains__)
            if lhs is FALSE:
                continue
            acc = acc & lhs.implies(in_modality(th, o, r2, up.__getitem__))
            if acc is FALSE:
                return acc
    return acc
