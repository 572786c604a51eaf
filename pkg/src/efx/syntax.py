"""Types, terms, typing and substitution for fine-grained call-by-value PCF.

Terms carry ordinary variable names, but equality and hashing go through a
nameless (de Bruijn) key, so alpha-equivalent terms are interchangeable as
dictionary keys and set members.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from .errors import (
    ArityMismatch,
    AspectError,
    SignatureMismatch,
    TypeMismatch,
    UnboundVariable,
)

# ---------------------------------------------------------------- types


class Type:
    def __repr__(self):
        return f"Type({self})"


@dataclass(frozen=True, repr=False)
class UnitType(Type):
    def __str__(self):
        return "1"


@dataclass(frozen=True, repr=False)
class NatType(Type):
    def __str__(self):
        return "N"


@dataclass(frozen=True, repr=False)
class Arrow(Type):
    domain: Type
    codomain: Type

    def __str__(self):
        dom = f"({self.domain})" if isinstance(self.domain, Arrow) else str(self.domain)
        return f"{dom} -> {self.codomain}"


UNIT = UnitType()
NAT = NatType()


# ---------------------------------------------------------------- signatures


@dataclass(frozen=True)
class ArityForm:
    """One of the four arity shapes: alpha^n, N x alpha^n, alpha^N, N x alpha^N."""

    param: bool = False
    infinite: bool = False
    n: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("arity must be non-negative")
        if self.infinite and self.n:
            raise ValueError("infinite arity takes no finite child count")

    def __str__(self):
        base = "a^N" if self.infinite else f"a^{self.n}"
        return f"N x {base}" if self.param else base


class EffectSignature:
    """Mapping from operation names to arity forms."""

    def __init__(self, ops=None):
        self._ops = dict(ops or {})

    def __getitem__(self, name):
        try:
            return self._ops[name]
        except KeyError:
            raise SignatureMismatch(f"operation {name!r} is not in the signature") from None

    def __contains__(self, name):
        return name in self._ops

    def __iter__(self):
        return iter(self._ops)

    def items(self):
        return self._ops.items()

    def __len__(self):
        return len(self._ops)

    def __eq__(self, other):
        return isinstance(other, EffectSignature) and self._ops == other._ops

    def __hash__(self):
        return hash(frozenset(self._ops.items()))

    def __repr__(self):
        inner = ", ".join(f"{k}: {v}" for k, v in self._ops.items())
        return f"EffectSignature({{{inner}}})"


EMPTY_SIGNATURE = EffectSignature()


# ---------------------------------------------------------------- terms


class Term:
    """Base class. Subclasses are either values or computations."""

    is_value = False

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, Term) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"{type(self).__name__}<{self}>"

    def __str__(self):
        from .printer import show_term

        return show_term(self)

    @cached_property
    def key(self):
        return _key(self, ())

    @cached_property
    def free_vars(self) -> frozenset:
        return _free(self)

    @property
    def closed(self):
        return not self.free_vars


class Value(Term):
    is_value = True


class Computation(Term):
    pass


@dataclass(frozen=True, eq=False, repr=False)
class Star(Value):
    pass


@dataclass(frozen=True, eq=False, repr=False)
class Zero(Value):
    pass


@dataclass(frozen=True, eq=False, repr=False)
class Succ(Value):
    pred: Value


@dataclass(frozen=True, eq=False, repr=False)
class Var(Value):
    name: str


@dataclass(frozen=True, eq=False, repr=False)
class Lam(Value):
    var: str
    ty: Type
    body: Computation


@dataclass(frozen=True, eq=False, repr=False)
class App(Computation):
    fn: Value
    arg: Value


@dataclass(frozen=True, eq=False, repr=False)
class Return(Computation):
    value: Value


@dataclass(frozen=True, eq=False, repr=False)
class Let(Computation):
    bound: Computation
    var: str
    body: Computation


@dataclass(frozen=True, eq=False, repr=False)
class Fix(Computation):
    fn: Value


@dataclass(frozen=True, eq=False, repr=False)
class Case(Computation):
    scrutinee: Value
    zero: Computation
    var: str
    succ: Computation


@dataclass(frozen=True, eq=False, repr=False)
class Op(Computation):
    """An effect operation.

    ``param`` is the natural-number argument of the ``N x ...`` forms,
    ``args`` the computation children of finite arities and ``cont`` the
    continuation value (of type N -> tau) of the infinite arities.
    ``ty`` annotates nullary operations, whose type cannot be synthesised.
    """

    name: str
    param: Value | None = None
    args: tuple = ()
    cont: Value | None = None
    ty: Type | None = None


@dataclass(frozen=True, eq=False, repr=False)
class Diverge(Computation):
    ty: Type


STAR = Star()
ZERO = Zero()


def numeral(n: int) -> Value:
    if n < 0:
        raise ValueError("numerals are non-negative")
    v = ZERO
    for _ in range(n):
        v = Succ(v)
    return v


def as_nat(v) -> int | None:
    """The integer denoted by a closed numeral, else None."""
    n = 0
    while isinstance(v, Succ):
        v = v.pred
        n += 1
    return n if isinstance(v, Zero) else None


def op_children(m: Op):
    """Sub-terms of an operation node in a fixed order (param, args, cont)."""
    out = []
    if m.param is not None:
        out.append(m.param)
    out.extend(m.args)
    if m.cont is not None:
        out.append(m.cont)
    return out


# ---------------------------------------------------------------- canonical keys


def _key(t, env):
    if isinstance(t, Var):
        try:
            return ("b", env.index(t.name))
        except ValueError:
            return ("f", t.name)
    if isinstance(t, Star):
        return ("*",)
    if isinstance(t, Zero):
        return ("Z",)
    if isinstance(t, Succ):
        n = 1
        v = t.pred
        while isinstance(v, Succ):
            n += 1
            v = v.pred
        return ("S", n, _key(v, env))
    if isinstance(t, Lam):
        return ("lam", t.ty, _key(t.body, (t.var,) + env))
    if isinstance(t, App):
        return ("app", _key(t.fn, env), _key(t.arg, env))
    if isinstance(t, Return):
        return ("ret", _key(t.value, env))
    if isinstance(t, Let):
        return ("let", _key(t.bound, env), _key(t.body, (t.var,) + env))
    if isinstance(t, Fix):
        return ("fix", _key(t.fn, env))
    if isinstance(t, Case):
        return (
            "case",
            _key(t.scrutinee, env),
            _key(t.zero, env),
            _key(t.succ, (t.var,) + env),
        )
    if isinstance(t, Op):
        return (
            "op",
            t.name,
            None if t.param is None else _key(t.param, env),
            tuple(_key(a, env) for a in t.args),
            None if t.cont is None else _key(t.cont, env),
            t.ty,
        )
    if isinstance(t, Diverge):
        return ("div", t.ty)
    raise TypeError(f"not a term: {t!r}")


def _free(t) -> frozenset:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, (Star, Zero, Diverge)):
        return frozenset()
    if isinstance(t, Succ):
        return t.pred.free_vars
    if isinstance(t, Lam):
        return t.body.free_vars - {t.var}
    if isinstance(t, App):
        return t.fn.free_vars | t.arg.free_vars
    if isinstance(t, Return):
        return t.value.free_vars
    if isinstance(t, Let):
        return t.bound.free_vars | (t.body.free_vars - {t.var})
    if isinstance(t, Fix):
        return t.fn.free_vars
    if isinstance(t, Case):
        return t.scrutinee.free_vars | t.zero.free_vars | (t.succ.free_vars - {t.var})
    if isinstance(t, Op):
        out = frozenset()
        for c in op_children(t):
            out |= c.free_vars
        return out
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------- substitution

_fresh_counter = itertools.count()


def _fresh(base, avoid):
    base = base.rstrip("0123456789_") or "v"
    while True:
        name = f"{base}_{next(_fresh_counter)}"
        if name not in avoid:
            return name


def substitute(t: Term, x: str, v: Term) -> Term:
    """Capture-avoiding ``t[v/x]``."""
    if not isinstance(v, Value):
        raise AspectError("only values can be substituted for variables")
    return _subst(t, x, v)


def _subst(t, x, v):
    if x not in t.free_vars:
        return t
    if isinstance(t, Var):
        return v
    if isinstance(t, Succ):
        return Succ(_subst(t.pred, x, v))
    if isinstance(t, Lam):
        var, body = _under_binder(t.var, t.body, x, v)
        return Lam(var, t.ty, _subst(body, x, v))
    if isinstance(t, App):
        return App(_subst(t.fn, x, v), _subst(t.arg, x, v))
    if isinstance(t, Return):
        return Return(_subst(t.value, x, v))
    if isinstance(t, Let):
        bound = _subst(t.bound, x, v)
        if t.var == x:
            return Let(bound, t.var, t.body)
        var, body = _under_binder(t.var, t.body, x, v)
        return Let(bound, var, _subst(body, x, v))
    if isinstance(t, Fix):
        return Fix(_subst(t.fn, x, v))
    if isinstance(t, Case):
        scrut = _subst(t.scrutinee, x, v)
        zero = _subst(t.zero, x, v)
        if t.var == x:
            return Case(scrut, zero, t.var, t.succ)
        var, succ = _under_binder(t.var, t.succ, x, v)
        return Case(scrut, zero, var, _subst(succ, x, v))
    if isinstance(t, Op):
        return Op(
            t.name,
            None if t.param is None else _subst(t.param, x, v),
            tuple(_subst(a, x, v) for a in t.args),
            None if t.cont is None else _subst(t.cont, x, v),
            t.ty,
        )
    raise TypeError(f"not a term: {t!r}")


def _under_binder(var, body, x, v):
    # x is free in body here (otherwise _subst returned early), so a binder
    # equal to x cannot reach this point for Lam; Let/Case check separately.
    if var in v.free_vars:
        new = _fresh(var, v.free_vars | body.free_vars)
        body = _subst(body, var, Var(new))
        var = new
    return var, body


# ---------------------------------------------------------------- contexts and typing


class Context:
    """Ordered typing context with pairwise distinct variable names."""

    def __init__(self, pairs=()):
        pairs = tuple(pairs)
        names = [n for n, _ in pairs]
        if len(set(names)) != len(names):
            raise ValueError("context variables must be pairwise distinct")
        self.pairs = pairs

    def extend(self, name, ty):
        return Context(self.pairs + ((name, ty),))

    def lookup(self, name):
        for n, ty in reversed(self.pairs):
            if n == name:
                return ty
        raise UnboundVariable(f"unbound variable {name!r}")

    def names(self):
        return [n for n, _ in self.pairs]

    def __repr__(self):
        return "Context(" + ", ".join(f"{n}:{t}" for n, t in self.pairs) + ")"


def _as_env(ctx):
    if ctx is None:
        return {}
    if isinstance(ctx, Context):
        return dict(ctx.pairs)
    return dict(ctx)


def typecheck(ctx, t: Term, sig: EffectSignature = EMPTY_SIGNATURE) -> Type:
    """Synthesise the type of ``t``; for computations this is the tau of Com(tau)."""
    return _tc(_as_env(ctx), t, sig)


def _expect(actual, expected, what):
    if actual != expected:
        raise TypeMismatch(f"{what}: expected {expected}, got {actual}")


def _tc(env, t, sig):
    if isinstance(t, Var):
        if t.name not in env:
            raise UnboundVariable(f"unbound variable {t.name!r}")
        return env[t.name]
    if isinstance(t, Star):
        return UNIT
    if isinstance(t, Zero):
        return NAT
    if isinstance(t, Succ):
        _expect(_tc(env, t.pred, sig), NAT, "argument of S")
        return NAT
    if isinstance(t, Lam):
        body = _tc({**env, t.var: t.ty}, t.body, sig)
        return Arrow(t.ty, body)
    if isinstance(t, Return):
        _value(t.value)
        return _tc(env, t.value, sig)
    if isinstance(t, App):
        _value(t.fn)
        _value(t.arg)
        fty = _tc(env, t.fn, sig)
        if not isinstance(fty, Arrow):
            raise TypeMismatch(f"applying a non-function of type {fty}")
        _expect(_tc(env, t.arg, sig), fty.domain, "function argument")
        return fty.codomain
    if isinstance(t, Let):
        _computation(t.bound)
        _computation(t.body)
        rho = _tc(env, t.bound, sig)
        return _tc({**env, t.var: rho}, t.body, sig)
    if isinstance(t, Fix):
        _value(t.fn)
        fty = _tc(env, t.fn, sig)
        if not (
            isinstance(fty, Arrow)
            and isinstance(fty.domain, Arrow)
            and fty.domain == fty.codomain
        ):
            raise TypeMismatch(f"fix needs (r -> t) -> (r -> t), got {fty}")
        return fty.domain
    if isinstance(t, Case):
        _value(t.scrutinee)
        _expect(_tc(env, t.scrutinee, sig), NAT, "case scrutinee")
        tz = _tc(env, t.zero, sig)
        ts = _tc({**env, t.var: NAT}, t.succ, sig)
        _expect(ts, tz, "case branches")
        return tz
    if isinstance(t, Op):
        return _tc_op(env, t, sig)
    if isinstance(t, Diverge):
        return t.ty
    raise TypeError(f"not a term: {t!r}")


def _tc_op(env, t, sig):
    form = sig[t.name]
    if form.param != (t.param is not None):
        raise ArityMismatch(f"{t.name}: parameter {'missing' if form.param else 'unexpected'}")
    if form.param:
        _value(t.param)
        _expect(_tc(env, t.param, sig), NAT, f"{t.name} parameter")
    if form.infinite:
        if t.args or t.cont is None:
            raise ArityMismatch(f"{t.name} takes a continuation N -> t")
        _value(t.cont)
        cty = _tc(env, t.cont, sig)
        if not (isinstance(cty, Arrow) and cty.domain == NAT):
            raise TypeMismatch(f"{t.name} continuation must have type N -> t, got {cty}")
        return cty.codomain
    if t.cont is not None or len(t.args) != form.n:
        raise ArityMismatch(f"{t.name} takes {form.n} computation argument(s)")
    if form.n == 0:
        if t.ty is None:
            raise TypeMismatch(f"nullary operation {t.name} needs a type annotation")
        return t.ty
    types = []
    for a in t.args:
        _computation(a)
        types.append(_tc(env, a, sig))
    for other in types[1:]:
        _expect(other, types[0], f"{t.name} branches")
    return types[0]


def _value(t):
    if not isinstance(t, Value):
        raise AspectError(f"expected a value, got computation {t}")


def _computation(t):
    if not isinstance(t, Computation):
        raise AspectError(f"expected a computation, got value {t}")


# ---------------------------------------------------------------- value enumeration


def enumerate_values(ty: Type, fuel: int, sig: EffectSignature = EMPTY_SIGNATURE) -> list:
    """Closed values of ``ty`` from a fixed template grammar.

    Grammar, with fuel k:
      1:      [*]
      N:      [0, 1, ..., k]
      r -> t: [] at k = 0; otherwise the list at k - 1 followed by the new
              abstractions ``fun x:r. B`` for bodies B, in this order:
                diverge;  return x (when r = t);  return v for v at (t, k-1);
                and, for k >= 2, op(B1, ..., Bn) for every parameterless
                operation of finite arity n <= 2, each Bi drawn from the three
                simple forms above at level k - 1.
    The list at fuel k is a prefix of the list at fuel k + 1.
    """
    return list(_enum(ty, fuel, sig))


def _enum(ty, fuel, sig):
    if isinstance(ty, UnitType):
        return (STAR,)
    if isinstance(ty, NatType):
        return tuple(numeral(n) for n in range(fuel + 1))
    if fuel == 0:
        return ()
    prev = _enum(ty, fuel - 1, sig)
    seen = set(prev)
    out = list(prev)
    for body in _bodies(ty, fuel, sig):
        lam = Lam("x", ty.domain, body)
        if lam not in seen:
            seen.add(lam)
            out.append(lam)
    return tuple(out)


def _simple_bodies(ty, level, sig):
    out = [Diverge(ty.codomain)]
    if ty.domain == ty.codomain:
        out.append(Return(Var("x")))
    out.extend(Return(v) for v in _enum(ty.codomain, level - 1, sig))
    return out


def _bodies(ty, level, sig):
    yield from _simple_bodies(ty, level, sig)
    if level < 2:
        return
    simple = _simple_bodies(ty, level - 1, sig)
    for name, form in sig.items():
        if form.param or form.infinite or form.n > 2:
            continue
        if form.n == 0:
            yield Op(name, ty=ty.codomain)
            continue
        for combo in itertools.product(simple, repeat=form.n):
            yield Op(name, args=tuple(combo))
