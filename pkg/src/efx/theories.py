"""The six effect theories: signatures, modalities and three-valued evaluators.

A modality evaluator reads a unit tree (leaves ``*``) and answers TRUE or
FALSE only when every tree extending the truncation (with the same ``DIV``
leaves) would give the same answer; otherwise UNKNOWN.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import SignatureMismatch, ValueBoundExceeded
from .syntax import STAR, ArityForm, EffectSignature
from .trees import CUT, DIV, Leaf, Node, Tree
from .verdict import FALSE, TRUE, UNKNOWN, Verdict

# ---------------------------------------------------------------- states and traces


@dataclass(frozen=True)
class State:
    """A total map from locations to naturals, stored as sorted pairs."""

    items: tuple

    @staticmethod
    def of(mapping) -> "State":
        return State(tuple(sorted(dict(mapping).items())))

    def __getitem__(self, loc):
        for l, n in self.items:
            if l == loc:
                return n
        raise KeyError(loc)

    def set(self, loc, n) -> "State":
        if loc not in self.locations:
            raise KeyError(loc)
        return State(tuple((l, n if l == loc else m) for l, m in self.items))

    @property
    def locations(self):
        return tuple(l for l, _ in self.items)

    def as_dict(self):
        return dict(self.items)

    def __str__(self):
        return "{" + ",".join(f"{l}:{n}" for l, n in self.items) + "}"


def trace_str(w) -> str:
    return "".join(f"{k}{n}" for k, n in w)


# ---------------------------------------------------------------- modalities


class Modality:
    pass


@dataclass(frozen=True)
class Down(Modality):
    def __str__(self):
        return "down"


@dataclass(frozen=True)
class Err(Modality):
    label: str

    def __str__(self):
        return f"err({self.label})"


@dataclass(frozen=True)
class Dia(Modality):
    def __str__(self):
        return "dia"


@dataclass(frozen=True)
class Box(Modality):
    def __str__(self):
        return "box"


@dataclass(frozen=True)
class ProbGt(Modality):
    q: Fraction

    def __post_init__(self):
        object.__setattr__(self, "q", Fraction(self.q))
        if not 0 <= self.q < 1:
            raise ValueError("ProbGt threshold must lie in [0, 1)")

    def __str__(self):
        return f"P>{self.q}"


@dataclass(frozen=True)
class Store(Modality):
    pre: State
    post: State

    def __str__(self):
        return f"st{self.pre}->{self.post}"


@dataclass(frozen=True)
class IoDone(Modality):
    trace: tuple

    def __str__(self):
        return f'io.done"{trace_str(self.trace)}"'


@dataclass(frozen=True)
class IoPref(Modality):
    trace: tuple

    def __str__(self):
        return f'io.pref"{trace_str(self.trace)}"'


@dataclass(frozen=True)
class Bounds:
    """Finite cut-offs for the modality families.

    ``state_bound`` overrides the store theory's own value bound when set;
    ``io_values`` is the number of distinct i/o symbols (0 .. io_values-1).
    """

    q_denominator: int = 4
    trace_len: int = 2
    io_values: int = 2
    state_bound: int | None = None


DEFAULT_BOUNDS = Bounds()


# ---------------------------------------------------------------- leaf helpers


def _is_star(t) -> bool:
    return isinstance(t, Leaf) and t.value == STAR


def _any_leaf_star(t) -> Verdict:
    """Dia on a unit tree."""
    if _is_star(t):
        return TRUE
    if t is CUT:
        return UNKNOWN
    if isinstance(t, Node):
        acc = UNKNOWN if t.infinite else FALSE
        for c in t.children:
            acc = acc | _any_leaf_star(c)
            if acc is TRUE:
                return acc
        return acc
    return FALSE


def _all_leaves_star(t) -> Verdict:
    """Box on a unit tree: finite and every leaf is ``*``."""
    if _is_star(t):
        return TRUE
    if t is CUT:
        return UNKNOWN
    if isinstance(t, Node):
        acc = UNKNOWN if t.infinite else TRUE
        for c in t.children:
            acc = acc & _all_leaves_star(c)
            if acc is FALSE:
                return acc
        return acc
    return FALSE


def prob_bounds(t: Tree) -> tuple:
    """(lower, upper) bounds on the probability of reaching a ``*`` leaf."""
    succ, fail = _prob_masses(t)
    return succ, 1 - fail


def _prob_masses(t):
    if _is_star(t):
        return Fraction(1), Fraction(0)
    if t is CUT:
        return Fraction(0), Fraction(0)
    if isinstance(t, Node):
        if t.op != "por" or len(t.children) != 2:
            raise SignatureMismatch(f"prob_bounds expects por nodes, found {t.op}")
        s0, f0 = _prob_masses(t.children[0])
        s1, f1 = _prob_masses(t.children[1])
        return (s0 + s1) / 2, (f0 + f1) / 2
    return Fraction(0), Fraction(1)


class NoResult:
    """exec_store hit certified divergence."""

    def __repr__(self):
        return "NO_RESULT"


NO_RESULT = NoResult()


def exec_store(t: Tree, s: State, bound: int | None = None):
    """Run a lookup/update tree from state ``s``.

    Returns ``(payload, final_state)``, ``UNKNOWN`` when the path reaches a
    cut, or ``NO_RESULT`` when it reaches ``DIV``.
    """
    while True:
        if isinstance(t, Leaf):
            return t.value, s
        if t is CUT:
            return UNKNOWN
        if t is DIV:
            return NO_RESULT
        op = t.op
        if op.startswith("lookup_"):
            loc = op[len("lookup_"):]
            t = t.child(s[loc])
        elif op.startswith("update_"):
            loc = op[len("update_"):]
            if t.param is None:
                raise SignatureMismatch(f"{op} node without a value")
            if bound is not None and t.param > bound:
                raise ValueBoundExceeded(f"{op} writes {t.param} > {bound}")
            if loc not in s.locations:
                raise SignatureMismatch(f"unknown location {loc!r}")
            s = s.set(loc, t.param)
            t = t.children[0]
        else:
            raise SignatureMismatch(f"exec_store cannot run {op} nodes")


def _io_done(t, w) -> Verdict:
    for kind, n in w:
        if t is CUT:
            return UNKNOWN
        if not isinstance(t, Node):
            return FALSE
        if kind == "?" and t.op == "read":
            t = t.child(n)
        elif kind == "!" and t.op == "write" and t.param == n:
            t = t.children[0]
        else:
            return FALSE
    if t is CUT:
        return UNKNOWN
    return Verdict.of(_is_star(t))


def _io_pref(t, w) -> Verdict:
    for kind, n in w:
        if t is CUT:
            return UNKNOWN
        if not isinstance(t, Node):
            return FALSE
        if kind == "?" and t.op == "read":
            t = t.child(n)
        elif kind == "!" and t.op == "write" and t.param == n:
            t = t.children[0]
        else:
            return FALSE
    return TRUE


# ---------------------------------------------------------------- theories


class EffectTheory:
    """Base class: a signature, a modality family, and their evaluators."""

    name = "?"
    key = "?"

    def __init__(self, signature: EffectSignature, bounds: Bounds = DEFAULT_BOUNDS):
        self.signature = signature
        self.bounds = bounds

    def __repr__(self):
        return f"<theory {self.key}>"

    def __eq__(self, other):
        return type(self) is type(other) and self._ident() == other._ident()

    def __hash__(self):
        return hash((type(self), self._ident()))

    def _ident(self):
        return (self.signature, self.bounds)

    def modalities(self, bounds: Bounds | None = None) -> list:
        raise NotImplementedError

    def owns(self, o: Modality) -> bool:
        raise NotImplementedError

    def verdict(self, o: Modality, t: Tree) -> Verdict:
        self.check_signature(t)
        if not self.owns(o):
            raise SignatureMismatch(f"modality {o} does not belong to theory {self.key}")
        return self._verdict(o, t)

    def _verdict(self, o, t):
        raise NotImplementedError

    def check_signature(self, t: Tree):
        stack = [t]
        while stack:
            s = stack.pop()
            if isinstance(s, Node):
                if s.op not in self.signature:
                    raise SignatureMismatch(f"{s.op} is not an operation of {self.key}")
                stack.extend(s.children)

    def decompositions(self, o: Modality, bounds: Bounds | None = None) -> list:
        """Premise-pair lists (o_i, o_i') witnessing strong decomposability of ``o``.

        mu r is in o iff, for some list, r in o_i(o_i'({*})) for every pair.
        Lists are ordered by length, then by modality enumeration order.
        """
        raise NotImplementedError


class PureTheory(EffectTheory):
    name = key = "pure"

    def __init__(self, bounds=DEFAULT_BOUNDS):
        super().__init__(EffectSignature(), bounds)

    def modalities(self, bounds=None):
        return [Down()]

    def owns(self, o):
        return isinstance(o, Down)

    def _verdict(self, o, t):
        return _down(t)

    def decompositions(self, o, bounds=None):
        return [[(Down(), Down())]]


def _down(t):
    if t is CUT:
        return UNKNOWN
    return Verdict.of(_is_star(t))


class ErrorTheory(EffectTheory):
    name = key = "error"

    def __init__(self, labels=("e",), bounds=DEFAULT_BOUNDS):
        self.labels = tuple(labels)
        sig = EffectSignature({f"raise_{e}": ArityForm(n=0) for e in self.labels})
        super().__init__(sig, bounds)

    def modalities(self, bounds=None):
        return [Down()] + [Err(e) for e in self.labels]

    def owns(self, o):
        return isinstance(o, Down) or (isinstance(o, Err) and o.label in self.labels)

    def _verdict(self, o, t):
        if isinstance(o, Down):
            return _down(t)
        if t is CUT:
            return UNKNOWN
        return Verdict.of(isinstance(t, Node) and t.op == f"raise_{o.label}")

    def decompositions(self, o, bounds=None):
        if isinstance(o, Down):
            return [[(Down(), Down())]]
        return [[(o, o)], [(Down(), o)]]


class NondetTheory(EffectTheory):
    name = key = "nondet"

    def __init__(self, bounds=DEFAULT_BOUNDS):
        super().__init__(EffectSignature({"or": ArityForm(n=2)}), bounds)

    def modalities(self, bounds=None):
        return [Dia(), Box()]

    def owns(self, o):
        return isinstance(o, (Dia, Box))

    def _verdict(self, o, t):
        return _any_leaf_star(t) if isinstance(o, Dia) else _all_leaves_star(t)

    def decompositions(self, o, bounds=None):
        return [[(o, o)]]


class ProbTheory(EffectTheory):
    name = key = "prob"

    def __init__(self, bounds=DEFAULT_BOUNDS):
        super().__init__(EffectSignature({"por": ArityForm(n=2)}), bounds)

    def modalities(self, bounds=None):
        d = (bounds or self.bounds).q_denominator
        return [ProbGt(Fraction(k, d)) for k in range(d)]

    def owns(self, o):
        return isinstance(o, ProbGt)

    def _verdict(self, o, t):
        lower, upper = prob_bounds(t)
        if lower > o.q:
            return TRUE
        if upper <= o.q:
            return FALSE
        return UNKNOWN

    def decompositions(self, o, bounds=None):
        d = (bounds or self.bounds).q_denominator
        return [
            [(ProbGt(a), ProbGt(b)) for a, b in zip(avals, bvals)]
            for avals, bvals in staircases(o.q, d)
        ]


def staircase_area(avals, bvals) -> Fraction:
    """a0*b0 + sum (a_i - a_{i-1}) * b_i."""
    total = Fraction(0)
    prev = Fraction(0)
    for a, b in zip(avals, bvals):
        total += (a - prev) * b
        prev = a
    return total


def is_staircase(avals, bvals) -> bool:
    if not avals or len(avals) != len(bvals):
        return False
    inc = all(x < y for x, y in zip(avals, avals[1:]))
    dec = all(x > y for x, y in zip(bvals, bvals[1:]))
    return inc and dec and 0 < avals[0] and avals[-1] < 1 and bvals[0] < 1 and bvals[-1] > 0


def staircases(q, d) -> list:
    """All grid staircases (a, b) of denominator ``d`` with area >= q, shortest first."""
    q = Fraction(q)
    grid = [Fraction(k, d) for k in range(1, d)]
    out = []
    for n in range(1, len(grid) + 1):
        for avals in itertools.combinations(grid, n):
            for bvals in itertools.combinations(sorted(grid, reverse=True), n):
                if staircase_area(avals, bvals) >= q:
                    out.append((avals, bvals))
    return out


class StoreTheory(EffectTheory):
    name = key = "store"

    def __init__(self, locations=("l",), bound=1, bounds=DEFAULT_BOUNDS):
        self.locations = tuple(locations)
        self.bound = bound
        ops = {}
        for l in self.locations:
            ops[f"lookup_{l}"] = ArityForm(infinite=True)
            ops[f"update_{l}"] = ArityForm(param=True, n=1)
        super().__init__(EffectSignature(ops), bounds)

    def _ident(self):
        return (self.locations, self.bound, self.bounds)

    def value_bound(self, bounds=None):
        b = (bounds or self.bounds).state_bound
        return self.bound if b is None else b

    def states(self, bounds=None) -> list:
        B = self.value_bound(bounds)
        return [
            State(tuple(zip(self.locations, vals)))
            for vals in itertools.product(range(B + 1), repeat=len(self.locations))
        ]

    def modalities(self, bounds=None):
        sts = self.states(bounds)
        return [Store(s, s2) for s in sts for s2 in sts]

    def owns(self, o):
        return isinstance(o, Store) and o.pre.locations == self.locations

    def _verdict(self, o, t):
        r = exec_store(t, o.pre, self.bound)
        if r is UNKNOWN:
            return UNKNOWN
        if r is NO_RESULT:
            return FALSE
        x, s2 = r
        return Verdict.of(x == STAR and s2 == o.post)

    def decompositions(self, o, bounds=None):
        return [[(Store(o.pre, mid), Store(mid, o.post))] for mid in self.states(bounds)]


class IoTheory(EffectTheory):
    name = key = "io"

    def __init__(self, bounds=DEFAULT_BOUNDS):
        sig = EffectSignature({"read": ArityForm(infinite=True), "write": ArityForm(param=True, n=1)})
        super().__init__(sig, bounds)

    def traces(self, bounds=None) -> list:
        b = bounds or self.bounds
        symbols = [("?", n) for n in range(b.io_values)] + [("!", n) for n in range(b.io_values)]
        out = []
        for k in range(b.trace_len + 1):
            out.extend(itertools.product(symbols, repeat=k))
        return out

    def modalities(self, bounds=None):
        ws = self.traces(bounds)
        return [IoDone(w) for w in ws] + [IoPref(w) for w in ws]

    def owns(self, o):
        return isinstance(o, (IoDone, IoPref))

    def _verdict(self, o, t):
        if isinstance(o, IoDone):
            return _io_done(t, o.trace)
        return _io_pref(t, o.trace)

    def decompositions(self, o, bounds=None):
        w = o.trace
        splits = [(w[:i], w[i:]) for i in range(len(w) + 1)]
        if isinstance(o, IoDone):
            return [[(IoDone(v), IoDone(u))] for v, u in splits]
        return [[(IoPref(w), IoPref(()))]] + [[(IoDone(v), IoPref(u))] for v, u in splits]


THEORY_KEYS = ("pure", "error", "nondet", "prob", "store", "io")


def get_theory(key: str, **options) -> EffectTheory:
    """Build a theory from its selection key and keyword options.

    error: labels; store: locations, bound; every theory accepts bounds.
    """
    classes = {
        "pure": PureTheory,
        "error": ErrorTheory,
        "nondet": NondetTheory,
        "prob": ProbTheory,
        "store": StoreTheory,
        "io": IoTheory,
    }
    if key not in classes:
        raise ValueError(f"unknown theory {key!r}; choose from {', '.join(THEORY_KEYS)}")
    return classes[key](**options)


def modality_verdict(th: EffectTheory, o: Modality, t: Tree) -> Verdict:
    return th.verdict(o, t)


def enumerate_modalities(th: EffectTheory, bounds: Bounds | None = None) -> list:
    return th.modalities(bounds)
