"""Randomised checks of the side conditions the theory relies on.

Each suite samples trees (or terms) from a seeded generator, checks law
instances on them, and returns a SuiteReport. Violations carry a
counterexample shrunk by node count.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable

from .logic import Budget, in_modality
from .relations import NotFound, Universe, bounded_simulation, distinguish, logical_table, relator_lift
from .syntax import (
    NAT,
    STAR,
    UNIT,
    App,
    Arrow,
    Case,
    Diverge,
    Fix,
    Lam,
    Let,
    NatType,
    Op,
    Return,
    Succ,
    UnitType,
    Var,
    numeral,
    typecheck,
)
from .theories import (
    Bounds,
    EffectTheory,
    ErrorTheory,
    IoTheory,
    ProbGt,
    ProbTheory,
    PureTheory,
    prob_bounds,
    StoreTheory,
    staircase_area,
)
from .trees import CUT, DIV, Leaf, Node, Tree, depth, dump_inline, mu_flatten, size, tmap, truncate
from .verdict import FALSE, TRUE, UNKNOWN, Verdict

# ---------------------------------------------------------------- reports


@dataclass
class Violation:
    law: str
    counterexample: str
    detail: str = ""


@dataclass
class LawStats:
    checked: int = 0
    antecedent: int = 0
    skipped: int = 0
    violations: int = 0


@dataclass
class SuiteReport:
    suite: str
    theory: str
    samples: int
    seed: int
    violations: list = field(default_factory=list)
    laws: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def law(self, name) -> LawStats:
        return self.laws.setdefault(name, LawStats())

    def record(self, name, ok: bool, counterexample="", detail=""):
        st = self.law(name)
        st.checked += 1
        if not ok:
            st.violations += 1
            self.violations.append(Violation(name, str(counterexample), detail))

    def lines(self) -> list:
        out = []
        for name, st in self.laws.items():
            status = "pass" if st.violations == 0 else "FAIL"
            out.append(
                f"{self.suite}/{self.theory} {name}: {status} checked={st.checked} "
                f"antecedent={st.antecedent} skipped={st.skipped} violations={st.violations}"
            )
        for v in self.violations[:5]:
            out.append(f"  counterexample for {v.law}: {v.counterexample} {v.detail}".rstrip())
        return out

    def __str__(self):
        return "\n".join(self.lines())


# ---------------------------------------------------------------- tree generation


@dataclass(frozen=True)
class Shape:
    op: str
    param: int | None
    arity: int
    infinite: bool = False


def shapes(th: EffectTheory, bounds: Bounds | None = None) -> list:
    """Node shapes of the theory, with infinite arities materialised just wide enough."""
    b = bounds or th.bounds
    if isinstance(th, ErrorTheory):
        return [Shape(f"raise_{e}", None, 0) for e in th.labels]
    if isinstance(th, StoreTheory):
        B = th.value_bound(bounds)
        out = []
        for l in th.locations:
            out.append(Shape(f"lookup_{l}", None, B + 1, True))
            out.extend(Shape(f"update_{l}", k, 1) for k in range(B + 1))
        return out
    if isinstance(th, IoTheory):
        return [Shape("read", None, b.io_values, True)] + [Shape("write", k, 1) for k in range(b.io_values)]
    if isinstance(th, PureTheory):
        return []
    op = next(iter(dict(th.signature.items())))
    return [Shape(op, None, 2)]


@dataclass
class TreeGenerator:
    """Random trees over a theory's signature.

    At each position a leaf, ``div`` or ``cut`` is chosen with the given
    weights, otherwise a node (always a bottom or leaf at ``max_depth``).
    ``max_width`` caps the materialised children of infinite-arity nodes.
    """

    theory: EffectTheory
    max_depth: int = 4
    max_width: int | None = None
    leaf_weight: float = 0.35
    div_weight: float = 0.15
    cut_weight: float = 0.15
    bounds: Bounds | None = None

    def __post_init__(self):
        self.shapes = shapes(self.theory, self.bounds)

    def _shape(self, rng):
        s = rng.choice(self.shapes)
        if s.infinite and self.max_width is not None:
            s = Shape(s.op, s.param, min(s.arity, self.max_width), True)
        return s

    def tree(self, rng: random.Random, payloads=(STAR,), definite=False, depth=None) -> Tree:
        depth = self.max_depth if depth is None else depth
        cw = 0.0 if definite else self.cut_weight
        base = self.leaf_weight + self.div_weight + cw
        x = rng.random()
        if depth <= 0 or not self.shapes or x < base:
            y = rng.random() * base
            if y < self.leaf_weight:
                return Leaf(rng.choice(list(payloads)))
            if y < self.leaf_weight + self.div_weight:
                return DIV
            return CUT
        s = self._shape(rng)
        kids = tuple(self.tree(rng, payloads, definite, depth - 1) for _ in range(s.arity))
        return Node(s.op, kids, s.param, s.infinite)

    def grow(self, rng, t: Tree, at_div=False, payloads=(STAR,)) -> Tree:
        """A tree above ``t``: some bottoms are replaced by fresh random trees."""
        if t is CUT or (at_div and t is DIV):
            return self.tree(rng, payloads, depth=2) if rng.random() < 0.7 else t
        if isinstance(t, Node):
            return Node(t.op, tuple(self.grow(rng, c, at_div, payloads) for c in t.children), t.param, t.infinite)
        return t

    def prune(self, rng, t: Tree, p=0.3) -> Tree:
        """A tree below ``t`` in the order where div is least: subtrees become div."""
        if rng.random() < p:
            return DIV
        if isinstance(t, Node):
            return Node(t.op, tuple(self.prune(rng, c, p) for c in t.children), t.param, t.infinite)
        return t

    def mutate(self, rng, t: Tree, payloads, p=0.2) -> Tree:
        if rng.random() < p:
            return self.tree(rng, payloads, definite=True, depth=2)
        if isinstance(t, Node):
            return Node(t.op, tuple(self.mutate(rng, c, payloads, p) for c in t.children), t.param, t.infinite)
        return t

    def spine(self, k: int) -> Tree:
        """The depth-k truncation of an infinite branch that never reaches a leaf."""
        rec = [s for s in self.shapes if s.arity >= 1]
        if not rec:
            return DIV
        s = rec[0]
        t = CUT
        for _ in range(k):
            kids = [DIV] * s.arity
            kids[0] = t
            t = Node(s.op, tuple(kids), s.param, s.infinite)
        return t


def replace_divs(t: Tree, new: Tree) -> Tree:
    if t is DIV:
        return new
    if isinstance(t, Node):
        return Node(t.op, tuple(replace_divs(c, new) for c in t.children), t.param, t.infinite)
    return t


def has_explicit_cut(t: Tree) -> bool:
    if t is CUT:
        return True
    return isinstance(t, Node) and any(has_explicit_cut(c) for c in t.children)


# ---------------------------------------------------------------- shrinking


def _subtrees(t: Tree, path=()):
    yield path, t
    if isinstance(t, Node):
        for i, c in enumerate(t.children):
            yield from _subtrees(c, path + (i,))


def _replace(t: Tree, path, new) -> Tree:
    if not path:
        return new
    kids = list(t.children)
    kids[path[0]] = _replace(kids[path[0]], path[1:], new)
    return Node(t.op, tuple(kids), t.param, t.infinite)


def shrink(t: Tree, fails: Callable, extra=()) -> Tree:
    """Greedy shrinking by node count while ``fails`` stays true."""
    improved = True
    while improved:
        improved = False
        for path, s in list(_subtrees(t)):
            cands = [CUT, DIV, *extra]
            if isinstance(s, Node):
                cands += list(s.children)
            for c in cands:
                if size(c) >= size(s):
                    continue
                t2 = _replace(t, path, c)
                try:
                    bad = fails(t2)
                except Exception:
                    bad = False
                if bad:
                    t, improved = t2, True
                    break
            if improved:
                break
    return t


def _show(t) -> str:
    return dump_inline(t)


# ---------------------------------------------------------------- openness


def check_openness(th: EffectTheory, gen: TreeGenerator | None = None, samples: int = 1000, seed: int = 0, bounds: Bounds | None = None) -> SuiteReport:
    """Upward closure and chain openness of every enumerated modality.

    upward-closure: growing a tree at any bottom keeps a True verdict True.
    stability: growing only at cuts keeps any definite verdict.
    definiteness: cut-free trees get definite verdicts.
    chain: a True cut-free tree with an infinite branch grafted at its div
    leaves is True at some finite truncation, and no truncation is False.
    """
    if samples <= 0:
        raise ValueError("samples must be positive")
    gen = gen or TreeGenerator(th, bounds=bounds)
    rng = random.Random(seed)
    rep = SuiteReport("openness", th.key, samples, seed)
    mods = th.modalities(bounds)
    for _ in range(samples):
        t = gen.tree(rng)
        up = gen.grow(rng, t, at_div=True)
        grown = gen.grow(rng, t, at_div=False)
        for o in mods:
            v = th.verdict(o, t)
            if v is TRUE:
                rep.law("upward-closure").antecedent += 1
            ok = v is not TRUE or th.verdict(o, up) is TRUE
            if not ok:
                small = shrink(t, lambda s, o=o: _upward_fails(th, o, s))
                rep.record("upward-closure", False, _show(small), f"{o}")
            else:
                rep.record("upward-closure", True)
            if v.definite:
                rep.law("stability").antecedent += 1
            stable = not v.definite or th.verdict(o, grown) is v
            rep.record("stability", stable, "" if stable else _show(t), "" if stable else f"{o}")
            if not has_explicit_cut(t):
                rep.law("definiteness").antecedent += 1
                rep.record("definiteness", v.definite, "" if v.definite else _show(t), f"{o}")
        d = gen.tree(rng, definite=True)
        for o in mods:
            if th.verdict(o, d) is not TRUE:
                continue
            rep.law("chain").antecedent += 1
            horizon = gen.max_depth + 3
            stages = [truncate(replace_divs(d, gen.spine(k)), k) for k in range(horizon + 1)]
            vs = [th.verdict(o, s) for s in stages]
            ok = TRUE in vs and FALSE not in vs
            rep.record("chain", ok, "" if ok else _show(d), "" if ok else f"{o} stages={[str(x) for x in vs]}")
    return rep


def replace_cuts(t: Tree, new: Tree = DIV) -> Tree:
    if t is CUT:
        return new
    if isinstance(t, Node):
        return Node(t.op, tuple(replace_cuts(c, new) for c in t.children), t.param, t.infinite)
    return t


def _upward_fails(th, o, s) -> bool:
    """True at ``s`` but not at one of a few canonical trees above it."""
    if th.verdict(o, s) is not TRUE:
        return False
    star = Leaf(STAR)
    above = [replace_cuts(s, DIV), replace_cuts(s, star), replace_divs(replace_cuts(s, star), star)]
    return any(th.verdict(o, a) is not TRUE for a in above)


class BrokenDownTheory(PureTheory):
    """Negative control: termination that wrongly holds of truncated trees."""

    def _verdict(self, o, t):
        if t is CUT:
            return TRUE
        return super()._verdict(o, t)


# ---------------------------------------------------------------- strong decomposability


def leaf_masses(r: Tree) -> dict:
    """Probability of reaching each payload of a cut-free probabilistic tree."""
    out: dict = {}

    def go(s, p):
        if isinstance(s, Leaf):
            out[s.value] = out.get(s.value, Fraction(0)) + p
        elif isinstance(s, Node):
            share = p / len(s.children)
            for c in s.children:
                go(c, share)

    go(r, Fraction(1))
    return out


def prob_witness(th: ProbTheory, r: Tree, q: Fraction, d: int, max_refine: int = 10):
    """A staircase of premise pairs for r in P>q after flattening, or None.

    On grid 1/D with D = d * 2^k, take every b on the grid paired with the
    largest grid a strictly below f_r(b), the r-mass of payloads whose success
    probability exceeds b. The area of these rectangles approaches the
    success probability of mu r from below as the grid is refined.
    """
    masses = leaf_masses(r)
    succ = {t: prob_bounds(t)[0] for t in masses}

    def f(b):
        return sum((p for t, p in masses.items() if succ[t] > b), Fraction(0))

    for k in range(max_refine + 1):
        D = d * 2**k
        pts = []
        for j in range(D - 1, 0, -1):
            b = Fraction(j, D)
            fb = f(b)
            i = -(-fb * D // 1) - 1  # largest i with i/D < fb
            i = min(int(i), D - 1)
            if i >= 1:
                pts.append((Fraction(i, D), b))
        stair = []
        for a, b in pts:  # b decreasing, a non-decreasing
            if stair and stair[-1][0] == a:
                continue
            stair.append((a, b))
        if stair and staircase_area([a for a, _ in stair], [b for _, b in stair]) >= q:
            pairs = [(ProbGt(a), ProbGt(b)) for a, b in stair]
            return pairs, D
    return None


def _premise_holds(th, o1, o2, r) -> Verdict:
    return in_modality(th, o1, r, lambda t: th.verdict(o2, t))


def check_strong_decomposability(th: EffectTheory, gen: TreeGenerator | None = None, samples: int = 500, seed: int = 0, bounds: Bounds | None = None, pool: int = 4) -> SuiteReport:
    """Biconditional witnesses of strong decomposability on cut-free double trees.

    For every modality o, mu r is in o exactly when, for one of the theory's
    premise lists, r is in o_i(o_i'({*})) for every pair. For probability the
    backward direction uses a staircase found on a refined grid.
    """
    gen = gen or TreeGenerator(th, max_depth=3, bounds=bounds)
    rng = random.Random(seed)
    rep = SuiteReport("decomposability", th.key, samples, seed)
    mods = th.modalities(bounds)
    d = (bounds or th.bounds).q_denominator
    for _ in range(samples):
        inner = [gen.tree(rng, definite=True, depth=2) for _ in range(rng.randint(1, pool))]
        r = gen.tree(rng, payloads=inner, definite=True, depth=3)
        mu = mu_flatten(r)
        for o in mods:
            lhs = th.verdict(o, mu)
            if not lhs.definite:
                rep.law("definite").skipped += 1
                continue
            lists = th.decompositions(o, bounds)
            if isinstance(th, ProbTheory):
                for pairs in lists:
                    if Verdict.all(_premise_holds(th, a, b, r) for a, b in pairs) is TRUE:
                        rep.law("staircase-sound").antecedent += 1
                        rep.record("staircase-sound", lhs is TRUE, "" if lhs is TRUE else _show(r), f"{o} {pairs}")
                if lhs is TRUE:
                    rep.law("witness").antecedent += 1
                    w = prob_witness(th, r, o.q, d)
                    ok = w is not None and all(_premise_holds(th, a, b, r) is TRUE for a, b in w[0])
                    if ok:
                        rep.law("witness-sound").antecedent += 1
                        rep.record("witness-sound", True)
                    rep.record("witness", ok, "" if ok else _show(r), "" if ok else f"{o}")
                continue
            rhs = Verdict.any(Verdict.all(_premise_holds(th, a, b, r) for a, b in pairs) for pairs in lists)
            if lhs is TRUE:
                rep.law("biconditional").antecedent += 1
            ok = rhs is lhs
            rep.record("biconditional", ok, "" if ok else _show(r), "" if ok else f"{o}: mu={lhs} pairs={rhs}")
    return rep


# ---------------------------------------------------------------- relator laws

RELATOR_LAWS = (
    "reflexivity",
    "composition",
    "monotonicity",
    "map",
    "order",
    "eta",
    "mu",
    "kleisli",
    "effect-op",
)


def _rand_relation(rng, xs, ys, density=0.5):
    return frozenset((x, y) for x in xs for y in ys if rng.random() < density)


def _compose(R, S):
    return frozenset((x, z) for x, y in sorted(R) for y2, z in sorted(S) if y == y2)


def _correlate(rng, gen, t, R, ys):
    """Move payloads of t along R (randomly elsewhere when unrelated), then mutate."""
    def move(x):
        ys_x = [y for a, y in sorted(R) if a == x]
        return rng.choice(ys_x) if ys_x and rng.random() < 0.9 else rng.choice(ys)

    return gen.mutate(rng, tmap(t, move), ys, p=0.1)


def check_relator_laws(th: EffectTheory, gen: TreeGenerator | None = None, samples: int = 500, seed: int = 0, bounds: Bounds | None = None, laws=RELATOR_LAWS) -> SuiteReport:
    """Relator laws on random carriers of at most 4 elements and correlated trees.

    Under probability the thresholds are taken on a grid fine enough to be
    exact for the trees at hand; the coarse default grid does not preserve
    the mu and Kleisli laws. Implications are checked only when their antecedent is definitely True;
    Unknown instances are skipped and counted.
    """
    gen = gen or TreeGenerator(th, max_depth=3, bounds=bounds)
    rng = random.Random(seed)
    rep = SuiteReport("relator", th.key, samples, seed)

    grid0 = bounds or th.bounds

    def lift(R, a, b):
        if isinstance(th, ProbTheory):
            # masses of depth-k trees are multiples of 2^-k, so this grid is exact
            d = 2 ** max(1, depth(a), depth(b))
            return relator_lift(R, a, b, th, replace(grid0, q_denominator=d), guard=16)
        return relator_lift(R, a, b, th, bounds, guard=16)

    def implication(name, antecedent: Verdict, consequent: Callable, show):
        st = rep.law(name)
        if antecedent is UNKNOWN:
            st.skipped += 1
            return
        if antecedent is FALSE:
            rep.record(name, True)
            return
        st.antecedent += 1
        c = consequent()
        if c is UNKNOWN:
            st.skipped += 1
            return
        rep.record(name, c is TRUE, "" if c is TRUE else show(), "")

    for _ in range(samples):
        X = list(range(rng.randint(1, 4)))
        Y = [f"y{i}" for i in range(rng.randint(1, 4))]
        Z = [f"z{i}" for i in range(rng.randint(1, 4))]
        definite = rng.random() < 0.8
        R = _rand_relation(rng, X, Y)
        S = _rand_relation(rng, Y, Z)
        t = gen.tree(rng, X, definite)
        t2 = _correlate(rng, gen, t, R, Y)
        if "reflexivity" in laws:
            Rr = frozenset((x, x) for x in X) | _rand_relation(rng, X, X, 0.3)
            v = lift(Rr, t, t)
            if v is UNKNOWN:
                rep.law("reflexivity").skipped += 1
            else:
                rep.law("reflexivity").antecedent += 1
                rep.record("reflexivity", v is TRUE, _show(t))
        if "composition" in laws:
            t3 = _correlate(rng, gen, t2, S, Z)
            implication(
                "composition",
                lift(R, t, t2) & lift(S, t2, t3),
                lambda: lift(_compose(R, S), t, t3),
                lambda: f"{_show(t)} | {_show(t2)} | {_show(t3)}",
            )
        if "monotonicity" in laws:
            R2 = R | _rand_relation(rng, X, Y, 0.3)
            implication("monotonicity", lift(R, t, t2), lambda: lift(R2, t, t2), lambda: f"{_show(t)} | {_show(t2)}")
        if "map" in laws:
            f = {x: rng.choice(Y) for x in X}
            g = {y: rng.choice(Z) for y in Y}
            T = _rand_relation(rng, Y, Z)
            pulled = frozenset((x, y) for x in X for y in Y if (f[x], g[y]) in T)
            a = lift(T, tmap(t, f.__getitem__), tmap(t2, g.__getitem__))
            b = lift(pulled, t, t2)
            if not (a.definite and b.definite):
                rep.law("map").skipped += 1
            else:
                rep.law("map").antecedent += a is TRUE
                rep.record("map", a is b, f"{_show(t)} | {_show(t2)}")
        if "order" in laws:
            Rr = frozenset((x, x) for x in X) | _rand_relation(rng, X, X, 0.3)
            below = gen.prune(rng, t)
            v = lift(Rr, below, t)
            if v is UNKNOWN:
                rep.law("order").skipped += 1
            else:
                rep.law("order").antecedent += 1
                rep.record("order", v is TRUE, f"{_show(below)} <= {_show(t)}")
        if "eta" in laws:
            x, y = rng.choice(X), rng.choice(Y)
            v = lift(R, Leaf(x), Leaf(y))
            rep.law("eta").antecedent += (x, y) in R
            rep.record("eta", v is Verdict.of((x, y) in R), f"{x} {y}")
        if "mu" in laws:
            pool = [gen.tree(rng, X, True, depth=2) for _ in range(rng.randint(1, 3))]
            pool2 = [_correlate(rng, gen, p, R, Y) for p in pool]
            r = gen.tree(rng, range(len(pool)), True, depth=2)
            r2 = gen.mutate(rng, r, range(len(pool)), p=0.1)
            inner = {(i, j): lift(R, pool[i], pool2[j]) for i in range(len(pool)) for j in range(len(pool))}
            rr = tmap(r, pool.__getitem__)
            rr2 = tmap(r2, pool2.__getitem__)
            implication(
                "mu",
                lift(lambda i, j: inner[i, j], r, r2),
                lambda: lift(R, mu_flatten(rr), mu_flatten(rr2)),
                lambda: f"{_show(rr)} | {_show(rr2)}",
            )
        if "kleisli" in laws:
            fx = {x: gen.tree(rng, Z, True, depth=2) for x in X}
            gy = {}
            for y in Y:
                xs = [x for x, y2 in sorted(R) if y2 == y]
                base = fx[rng.choice(xs)] if xs else gen.tree(rng, Z, True, depth=2)
                gy[y] = gen.mutate(rng, base, Z, p=0.1)
            Sz = frozenset((z, z) for z in Z) | _rand_relation(rng, Z, Z, 0.2)
            fam = Verdict.all(lift(Sz, fx[x], gy[y]) for x, y in sorted(R))
            implication(
                "kleisli",
                lift(R, t, t2) & fam,
                lambda: lift(Sz, mu_flatten(tmap(t, fx.__getitem__)), mu_flatten(tmap(t2, gy.__getitem__))),
                lambda: f"{_show(t)} | {_show(t2)} R={sorted(R)} f={ {x: _show(v) for x, v in fx.items()} } "
                f"g={ {y: _show(v) for y, v in gy.items()} } S={sorted(Sz)}",
            )
        if "effect-op" in laws and gen.shapes:
            s = gen._shape(rng)
            kids = [gen.tree(rng, X, definite, depth=2) for _ in range(s.arity)]
            kids2 = [_correlate(rng, gen, k, R, Y) for k in kids]
            n1, n2 = Node(s.op, tuple(kids), s.param, s.infinite), Node(s.op, tuple(kids2), s.param, s.infinite)
            implication(
                "effect-op",
                Verdict.all(lift(R, a, b) for a, b in zip(kids, kids2)),
                lambda: lift(R, n1, n2),
                lambda: f"{_show(n1)} | {_show(n2)}",
            )
    return rep


# ---------------------------------------------------------------- random terms


class TermGenerator:
    """Random well-typed closed terms over a theory's signature."""

    def __init__(self, theory: EffectTheory, seed: int = 0, max_depth: int = 3, allow_fix: bool = True):
        self.theory = theory
        self.rng = random.Random(seed)
        self.max_depth = max_depth
        self.allow_fix = allow_fix
        self.sig = theory.signature
        self._n = 0

    def fresh(self, base="x"):
        self._n += 1
        return f"{base}{self._n}"

    def type_(self, depth=1):
        r = self.rng.random()
        if depth <= 0 or r < 0.4:
            return UNIT
        if r < 0.75:
            return NAT
        return Arrow(self.type_(depth - 1), self.type_(depth - 1))

    def value(self, ty, env=(), depth=None):
        depth = self.max_depth if depth is None else depth
        rng = self.rng
        vars_ = [x for x, t in env if t == ty]
        if vars_ and rng.random() < 0.4:
            return Var(rng.choice(vars_))
        if isinstance(ty, UnitType):
            return STAR
        if isinstance(ty, NatType):
            nats = [x for x, t in env if t == NAT]
            if nats and rng.random() < 0.3:
                return Succ(Var(rng.choice(nats)))
            return numeral(rng.randint(0, 3))
        x = self.fresh()
        return Lam(x, ty.domain, self.computation(ty.codomain, env + ((x, ty.domain),), depth - 1))

    def computation(self, ty, env=(), depth=None):
        depth = self.max_depth if depth is None else depth
        rng = self.rng
        if depth <= 0:
            return Return(self.value(ty, env, 0)) if rng.random() < 0.85 else Diverge(ty)
        choices = ["return", "return", "let", "app", "case", "diverge"]
        if self.sig.items():
            choices += ["op", "op", "op"]
        if self.allow_fix:
            choices.append("fix")
        c = rng.choice(choices)
        if c == "return":
            return Return(self.value(ty, env, depth))
        if c == "diverge":
            return Diverge(ty)
        if c == "let":
            rho = self.type_(1)
            x = self.fresh()
            return Let(self.computation(rho, env, depth - 1), x, self.computation(ty, env + ((x, rho),), depth - 1))
        if c == "app":
            rho = rng.choice([UNIT, NAT])
            return App(self.value(Arrow(rho, ty), env, depth - 1), self.value(rho, env, depth - 1))
        if c == "case":
            x = self.fresh("p")
            return Case(
                self.value(NAT, env, depth - 1),
                self.computation(ty, env, depth - 1),
                x,
                self.computation(ty, env + ((x, NAT),), depth - 1),
            )
        if c == "fix":
            # a recursive function of N -> ty applied to a numeral; it may loop
            f, k, p = self.fresh("f"), self.fresh("k"), self.fresh("p")
            fty = Arrow(NAT, ty)
            inner = env + ((f, fty), (k, NAT))
            body = Case(
                Var(k),
                self.computation(ty, inner, depth - 2),
                p,
                App(Var(f), Var(p)) if rng.random() < 0.7 else self.computation(ty, inner + ((p, NAT),), depth - 2),
            )
            g = self.fresh("g")
            return Let(Fix(Lam(f, fty, Return(Lam(k, NAT, body)))), g, App(Var(g), numeral(rng.randint(0, 2))))
        name, form = rng.choice(list(self.sig.items()))
        param = numeral(rng.randint(0, 1)) if form.param else None
        if form.infinite:
            x = self.fresh("n")
            return Op(name, param, (), Lam(x, NAT, self.computation(ty, env + ((x, NAT),), depth - 1)))
        args = tuple(self.computation(ty, env, depth - 1) for _ in range(form.n))
        return Op(name, param, args, None, ty if form.n == 0 else None)


# ---------------------------------------------------------------- coincidence and congruence


def _context_layers(th: EffectTheory, rng: random.Random, gen: TermGenerator, ty):
    """One term constructor wrapped around a hole of computation type ``ty``.

    Returns (ty', wrap) where wrap builds the outer computation from the hole.
    """
    opts = ["let-return", "let-pure", "case", "lam-app"]
    if isinstance(ty, Arrow):
        opts.append("apply")
    sig = dict(th.signature.items())
    finite = [n for n, f in sig.items() if not f.infinite and f.n >= 1]
    infinite = [n for n, f in sig.items() if f.infinite]
    if finite:
        opts += ["op", "op"]
    if infinite:
        opts.append("op-cont")
    c = rng.choice(opts)
    if c == "let-return":
        x = gen.fresh()
        return ty, lambda h: Let(h, x, Return(Var(x)))
    if c == "let-pure":
        y = gen.fresh("y")
        w = gen.value(UNIT, (), 1)
        return ty, lambda h: Let(Return(w), y, h)
    if c == "case":
        p = gen.fresh("p")
        k = numeral(rng.randint(0, 1))
        other = gen.computation(ty, ((p, NAT),), 1)
        if rng.random() < 0.5:
            return ty, lambda h: Case(k, h, p, other)
        other0 = gen.computation(ty, (), 1)
        return ty, lambda h: Case(k, other0, p, h)
    if c == "lam-app":
        u = gen.fresh("u")
        return ty, lambda h: App(Lam(u, UNIT, h), STAR)
    if c == "apply":
        f = gen.fresh("f")
        arg = gen.value(ty.domain, (), 1)
        return ty.codomain, lambda h: Let(h, f, App(Var(f), arg))
    if c == "op":
        name = rng.choice(finite)
        form = sig[name]
        param = numeral(rng.randint(0, 1)) if form.param else None
        others = [gen.computation(ty, (), 1) for _ in range(form.n)]
        pos = rng.randrange(form.n)

        def wrap(h, name=name, param=param, others=others, pos=pos):
            args = list(others)
            args[pos] = h
            return Op(name, param, tuple(args))

        return ty, wrap
    name = rng.choice(infinite)
    form = sig[name]
    param = numeral(rng.randint(0, 1)) if form.param else None
    n = gen.fresh("n")
    return ty, lambda h: Op(name, param, (), Lam(n, NAT, h))


def sample_contexts(th: EffectTheory, ty, count: int, seed: int = 0, max_layers: int = 3) -> list:
    """``count`` one-hole contexts around a hole of computation type ``ty``."""
    rng = random.Random(seed)
    gen = TermGenerator(th, seed=seed + 1, max_depth=1, allow_fix=False)
    out = []
    for _ in range(count):
        cur, layers = ty, []
        for _ in range(rng.randint(1, max_layers)):
            cur, wrap = _context_layers(th, rng, gen, cur)
            layers.append(wrap)

        def ctx(h, layers=tuple(layers)):
            for w in layers:
                h = w(h)
            return h

        out.append(ctx)
    return out


@dataclass
class CongruenceResult:
    context: str
    pair: tuple
    formula: object


def check_coincidence_and_congruence(
    universes,
    th: EffectTheory,
    budget: Budget = Budget(),
    bounds: Bounds | None = None,
    pairs=(),
    contexts: int = 20,
    seed: int = 0,
    positive: bool = True,
) -> SuiteReport:
    """Bounded similarity against the positive logical preorder, then congruence.

    coincidence: on each universe the simulation table equals the set of pairs
    with no distinguishing positive formula.
    congruence: for each NotFound computation pair, sampled one-hole contexts
    create no definite distinction.
    """
    rep = SuiteReport("coincidence", th.key, len(universes), seed)
    for seeds in universes:
        u = Universe(seeds, th, budget)
        sim = bounded_simulation(u, th, budget, symmetric=not positive, bounds=bounds)
        log = logical_table(u, budget, positive=positive, bounds=bounds)
        diff = sim.pairs ^ log
        rep.law("coincidence").antecedent += len(log)
        rep.record("coincidence", not diff, "" if not diff else ", ".join(f"({a}, {b})" for a, b in list(diff)[:3]))
    for i, (m, n) in enumerate(pairs):
        if distinguish(m, n, th, budget, positive, bounds) is not NotFound:
            rep.law("congruence").skipped += 1
            continue
        ty = typecheck({}, m, th.signature)
        for ctx in sample_contexts(th, ty, contexts, seed=seed * 1000 + i):
            cm, cn = ctx(m), ctx(n)
            rep.law("congruence").antecedent += 1
            f = distinguish(cm, cn, th, budget, positive, bounds)
            ok = f is NotFound
            rep.record("congruence", ok, "" if ok else f"{cm} vs {cn}", "" if ok else f"by {f}")
    return rep


SUITES = ("openness", "decomposability", "relator", "coincidence")
