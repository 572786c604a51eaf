"""The O-relator, bounded applicative (bi)similarity, and distinguishing formulas.

Both the simulation refinement and the formula search run over a finite
``Universe``: the seed terms closed under taking leaves of evaluated
computations and under applying arrow-typed values to a fixed argument list.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .errors import CarrierMismatch, ExplosionGuard
from .logic import (
    BOT,
    TOP,
    And,
    Budget,
    Checker,
    Maps,
    Modal,
    NatIs,
    Not,
    Or,
    in_modality,
    show_formula,
    subsets,
)
from .syntax import App, Arrow, NatType, Star, as_nat, enumerate_values, typecheck
from .theories import Bounds, EffectTheory
from .trees import Tree, payloads
from .verdict import FALSE, TRUE, UNKNOWN, Verdict

# ---------------------------------------------------------------- relator


def as_relation(R) -> Callable:
    """Accept a predicate (bool or Verdict), or a collection of pairs."""
    if callable(R):
        return R
    pairs = frozenset(R)
    return lambda x, y: (x, y) in pairs


def relator_lift(R, t: Tree, t2: Tree, th: EffectTheory, bounds: Bounds | None = None, guard: int = 12, carriers=None) -> Verdict:
    """t O(R) t2: for every A within t's payloads and every o, t in o(A) implies t2 in o(R[A]).

    ``carriers``, when given, is a pair of containers the payloads of t and
    t2 must belong to.
    """
    rel = as_relation(R)
    left, right = payloads(t), payloads(t2)
    if carriers is not None:
        if any(x not in carriers[0] for x in left) or any(y not in carriers[1] for y in right):
            raise CarrierMismatch("tree payloads fall outside the relation's carriers")
    if len(left) > guard:
        raise ExplosionGuard(f"{len(left)} payloads exceed the guard of {guard}")
    related = {(x, y): Verdict.of(rel(x, y)) for x in left for y in right}
    mods = th.modalities(bounds)
    acc = TRUE
    for A in subsets(left):
        inA = set(A)
        image = {y: Verdict.any(related[x, y] for x in A) for y in right}
        for o in mods:
            lhs = in_modality(th, o, t, inA.__contains__)
            if lhs is FALSE:
                continue
            acc = acc & lhs.implies(in_modality(th, o, t2, image.__getitem__))
            if acc is FALSE:
                return acc
    return acc


# ---------------------------------------------------------------- universes


VALUE = "value"
COMPUTATION = "computation"


class Universe:
    """Closed terms grouped by (type, aspect), with their trees and applications."""

    def __init__(self, seeds, theory: EffectTheory, budget: Budget = Budget()):
        self.theory = theory
        self.budget = budget
        self.checker = Checker(theory, budget)
        self.groups: dict = {}
        self.where: dict = {}
        self.apps: dict = {}
        self._args: dict = {}
        frontier = []
        for t in seeds:
            ty = typecheck({}, t, theory.signature)
            if self._add(t, ty):
                frontier.append(t)
        self.complete = False
        for _ in range(budget.closure_depth):
            if not frontier:
                self.complete = True
                break
            frontier = self._expand(frontier)
        else:
            self.complete = not frontier

    def _add(self, t, ty) -> bool:
        if t in self.where:
            return False
        g = (ty, VALUE if t.is_value else COMPUTATION)
        self.groups.setdefault(g, []).append(t)
        self.where[t] = g
        return True

    def _expand(self, frontier):
        new = []
        for t in frontier:
            ty, aspect = self.where[t]
            if aspect == COMPUTATION:
                for leaf in payloads(self.tree(t)):
                    if self._add(leaf, ty):
                        new.append(leaf)
            elif isinstance(ty, Arrow):
                for u in self.args(ty.domain):
                    app = App(t, u)
                    self.apps[t, u] = app
                    if self._add(app, ty.codomain):
                        new.append(app)
        return new

    def args(self, ty) -> list:
        if ty not in self._args:
            self._args[ty] = enumerate_values(ty, self.budget.arg_fuel, self.theory.signature)
        return self._args[ty]

    def tree(self, m) -> Tree:
        return self.checker.tree(m)

    def group_of(self, t):
        return self.where.get(t)

    def __contains__(self, t):
        return t in self.where

    def terms(self):
        return list(self.where)


@dataclass
class RelationTable:
    universe: Universe
    pairs: set

    def related(self, a, b) -> bool:
        return (a, b) in self.pairs

    def __contains__(self, pair):
        return pair in self.pairs

    def group_pairs(self, group):
        terms = self.universe.groups.get(group, [])
        return [(a, b) for a in terms for b in terms if (a, b) in self.pairs]


def _clause1(a, b, ty) -> bool:
    if isinstance(ty, NatType):
        return as_nat(a) == as_nat(b)
    return True


def bounded_simulation(universe, th: EffectTheory, budget: Budget = Budget(), symmetric: bool = False, bounds: Bounds | None = None) -> RelationTable:
    """Greatest-fixed-point refinement of the simulation clauses on a finite universe.

    ``universe`` is a Universe or an iterable of closed seed terms. Pairs are
    deleted only on a definite violation, so a deleted pair is provably not
    similar while a retained pair is only similar up to the budget.
    """
    if not isinstance(universe, Universe):
        universe = Universe(universe, th, budget)
    pairs = set()
    for (ty, aspect), terms in universe.groups.items():
        for a in terms:
            for b in terms:
                if aspect == COMPUTATION or _clause1(a, b, ty):
                    pairs.add((a, b))

    def rel(x, y):
        gx, gy = universe.group_of(x), universe.group_of(y)
        if gx is not None and gx == gy:
            return TRUE if (x, y) in pairs else FALSE
        n, m = as_nat(x), as_nat(y)
        if n is not None and m is not None:
            return Verdict.of(n == m)
        if isinstance(x, Star) and isinstance(y, Star):
            return TRUE
        return UNKNOWN

    def violated(a, b) -> bool:
        ty, aspect = universe.group_of(a)
        if aspect == COMPUTATION:
            ta, tb = universe.tree(a), universe.tree(b)
            if relator_lift(rel, ta, tb, th, bounds, budget.explosion_guard) is FALSE:
                return True
            return symmetric and relator_lift(lambda x, y: rel(y, x), tb, ta, th, bounds, budget.explosion_guard) is FALSE
        if isinstance(ty, Arrow):
            for u in universe.args(ty.domain):
                fa, fb = universe.apps.get((a, u)), universe.apps.get((b, u))
                if fa is not None and fb is not None and (fa, fb) not in pairs:
                    return True
        return False

    changed = True
    while changed:
        changed = False
        for a, b in sorted(pairs, key=lambda p: (_order(universe, p[0]), _order(universe, p[1]))):
            if (a, b) in pairs and violated(a, b):
                pairs.discard((a, b))
                if symmetric:
                    pairs.discard((b, a))
                changed = True
    return RelationTable(universe, pairs)


def _order(universe, t):
    g = universe.where[t]
    return (str(g[0]), g[1], universe.groups[g].index(t))


# ---------------------------------------------------------------- formula space


class NotFoundType:
    """Returned by distinguish when no formula within the budget separates the terms."""

    def __repr__(self):
        return "NotFound"

    def __bool__(self):
        return False


NotFound = NotFoundType()


class FormulaSpace:
    """Formulas enumerated by size, one representative per meaning on the universe.

    The meaning of a formula at a (type, aspect) group is its vector of
    verdicts on the group's terms. Within a size, candidates come in this
    constructor order: top, bot, {n} by ascending n, Maps by argument order
    then body, Modal by modality order then body, not, and, or. Binary
    connectives take smaller-size left operands first.
    """

    def __init__(self, universe: Universe, positive: bool = False, bounds: Bounds | None = None):
        self.u = universe
        self.positive = positive
        self.mods = universe.theory.modalities(bounds)
        self.classes: dict = {}  # group -> {vector: formula}
        self.by_size: dict = {}  # group -> {size: [formulas]}
        self.vectors: dict = {}  # (group, formula) -> vector
        self.size_done = 0
        self.saturated = False
        self._groups = self._all_groups()
        for g in self._groups:
            self.classes[g] = {}
            self.by_size[g] = {}

    def _all_groups(self):
        gs = list(self.u.groups)
        extra = []
        for ty, aspect in gs:
            if aspect == COMPUTATION and (ty, VALUE) not in self.u.groups:
                extra.append((ty, VALUE))
        return gs + [g for g in extra if g not in gs]

    # meanings --------------------------------------------------------

    def _terms(self, g):
        return self.u.groups.get(g, [])

    def vector(self, g, f) -> tuple:
        v = self.vectors.get((g, f))
        if v is None:
            v = self._compute(g, f)
            self.vectors[g, f] = v
        return v

    def _compute(self, g, f):
        ty, aspect = g
        terms = self._terms(g)
        if isinstance(f, And):
            vs = [self.vector(g, h) for h in f.items]
            return tuple(Verdict.all(col) for col in zip(*vs)) if vs else (TRUE,) * len(terms)
        if isinstance(f, Or):
            vs = [self.vector(g, h) for h in f.items]
            return tuple(Verdict.any(col) for col in zip(*vs)) if vs else (FALSE,) * len(terms)
        if isinstance(f, Not):
            return tuple(~x for x in self.vector(g, f.item))
        if isinstance(f, NatIs):
            return tuple(Verdict.of(f.holds(as_nat(t))) for t in terms)
        if isinstance(f, Maps):
            cg = (ty.codomain, COMPUTATION)
            out = []
            for t in terms:
                app = self.u.apps.get((t, f.arg))
                if app is not None and cg in self.classes:
                    out.append(self.vector(cg, f.body)[self._terms(cg).index(app)])
                else:
                    out.append(self.u.checker.value(t, f))
            return tuple(out)
        if isinstance(f, Modal):
            vg = (ty, VALUE)
            index = {t: i for i, t in enumerate(self._terms(vg))}
            vec = self.vector(vg, f.body) if vg in self.classes else ()
            th = self.u.theory
            out = []
            for t in terms:
                def member(leaf):
                    i = index.get(leaf)
                    return vec[i] if i is not None else self.u.checker.value(leaf, f.body)
                out.append(in_modality(th, f.modality, self.u.tree(t), member))
            return tuple(out)
        raise TypeError(f"unexpected formula {f!r}")

    def _offer(self, g, f, size) -> bool:
        vec = self.vector(g, f)
        if vec in self.classes[g]:
            return False
        self.classes[g][vec] = f
        self.by_size[g].setdefault(size, []).append(f)
        return True

    # enumeration -----------------------------------------------------

    def _of_size(self, g, s):
        return self.by_size.get(g, {}).get(s, [])

    def _candidates(self, g, s):
        ty, aspect = g
        if s == 1:
            yield TOP
            yield BOT
            if aspect == VALUE and isinstance(ty, NatType):
                for n in sorted({as_nat(t) for t in self._terms(g)}):
                    yield NatIs(frozenset((n,)))
        if s >= 2:
            if aspect == VALUE and isinstance(ty, Arrow):
                cg = (ty.codomain, COMPUTATION)
                if cg in self.classes:
                    for u in self.u.args(ty.domain):
                        for body in self._of_size(cg, s - 1):
                            yield Maps(u, body)
            if aspect == COMPUTATION:
                vg = (ty, VALUE)
                for o in self.mods:
                    for body in self._of_size(vg, s - 1):
                        yield Modal(o, body)
            if not self.positive:
                for f in self._of_size(g, s - 1):
                    yield Not(f)
        if s >= 3:
            for ctor in (And, Or):
                for sa in range(1, s - 1):
                    for a in self._of_size(g, sa):
                        for b in self._of_size(g, s - 1 - sa):
                            if a != b:
                                yield ctor((a, b))

    def grow(self, max_size: int):
        """Enumerate every size up to ``max_size`` (or until saturated)."""
        while self.size_done < max_size and not self.saturated:
            s = self.size_done + 1
            added = 0
            for g in self._groups:
                for f in list(self._candidates(g, s)):
                    added += self._offer(g, f, s)
            self.size_done = s
            if added == 0 and s >= 3 and self._closed():
                self.saturated = True

    def _closed(self) -> bool:
        """No constructor applied to existing representatives yields a new meaning."""
        for g in self._groups:
            ty, aspect = g
            reps = list(self.classes[g].values())
            seen = self.classes[g]
            cands = []
            if not self.positive:
                cands += [Not(f) for f in reps]
            cands += [c((a, b)) for c in (And, Or) for a in reps for b in reps]
            if aspect == VALUE and isinstance(ty, Arrow):
                cg = (ty.codomain, COMPUTATION)
                if cg in self.classes:
                    cands += [Maps(u, b) for u in self.u.args(ty.domain) for b in self.classes[cg].values()]
            if aspect == COMPUTATION:
                cands += [Modal(o, b) for o in self.mods for b in self.classes[(ty, VALUE)].values()]
            for f in cands:
                if self.vector(g, f) not in seen:
                    return False
        return True

    def formulas(self, g):
        """Representatives of group ``g`` in enumeration order."""
        for s in range(1, self.size_done + 1):
            yield from self._of_size(g, s)

    def separating(self, a, b):
        """First representative true on ``a`` and false on ``b``, or NotFound."""
        g = self.u.group_of(a)
        if g is None or g != self.u.group_of(b):
            raise ValueError("terms must belong to the same universe group")
        terms = self._terms(g)
        i, j = terms.index(a), terms.index(b)
        for f in self.formulas(g):
            vec = self.vector(g, f)
            if vec[i] is TRUE and vec[j] is FALSE:
                return f
        return NotFound


def distinguish(M, N, th: EffectTheory, budget: Budget = Budget(), positive: bool = False, bounds: Bounds | None = None):
    """Smallest formula (in enumeration order) satisfied by M and refuted by N, or NotFound.

    Works for values as well as computations. NotFound is evidence of
    equivalence up to the budget, not a proof.
    """
    u = Universe([M, N], th, budget)
    space = FormulaSpace(u, positive, bounds)
    space.grow(budget.max_size)
    f = space.separating(M, N)
    if f is NotFound:
        return f
    # Re-check directly: the compositional vectors must agree with the checker.
    c = Checker(th, budget)
    check = c.value if M.is_value else c.computation
    if check(M, f) is not TRUE or check(N, f) is not FALSE:
        raise AssertionError(f"formula space disagrees with the checker on {show_formula(f)}")
    return f


def logical_table(universe: Universe, budget: Budget = Budget(), positive: bool = True, bounds: Bounds | None = None, space=None) -> set:
    """Pairs (a, b) of the universe not separated by any enumerated formula."""
    if space is None:
        space = FormulaSpace(universe, positive, bounds)
        space.grow(budget.max_size)
    out = set()
    for g, terms in universe.groups.items():
        for a in terms:
            for b in terms:
                if space.separating(a, b) is NotFound:
                    out.add((a, b))
    return out
