"""Stack machine and the fuel-indexed evaluation into effect trees."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import StuckState
from .syntax import (
    App,
    Case,
    Diverge,
    Fix,
    Lam,
    Let,
    Op,
    Return,
    Succ,
    Var,
    Zero,
    as_nat,
    numeral,
    substitute,
)
from .trees import CUT, DIV, Leaf, Node

# A stack is None (the identity) or a frame (var, continuation, rest).


@dataclass(frozen=True)
class Config:
    stack: tuple | None
    focus: object


def stack_frames(stack) -> list:
    """Frames as (var, continuation) pairs, innermost last."""
    out = []
    while stack is not None:
        var, body, stack = stack
        out.append((var, body))
    out.reverse()
    return out


def plug(stack, m):
    """S{M}: rebuild the computation a configuration stands for."""
    while stack is not None:
        var, body, stack = stack
        m = Let(m, var, body)
    return m


def fix_unfold(f: Lam):
    """fix F  ~>  return fun x. let F (fun y. let fix F => z in z y) => w in w x."""
    rho = f.ty.domain
    inner = Lam("y", rho, Let(Fix(f), "z", App(Var("z"), Var("y"))))
    return Return(Lam("x", rho, Let(App(f, inner), "w", App(Var("w"), Var("x")))))


def reduce(m):
    """One stack-independent reduction step, or None if ``m`` is not a redex."""
    if isinstance(m, App) and isinstance(m.fn, Lam):
        return substitute(m.fn.body, m.fn.var, m.arg)
    if isinstance(m, Case):
        v = m.scrutinee
        if isinstance(v, Zero):
            return m.zero
        if isinstance(v, Succ):
            return substitute(m.succ, m.var, v.pred)
        return None
    if isinstance(m, Fix) and isinstance(m.fn, Lam):
        return fix_unfold(m.fn)
    return None


def step(cfg: Config) -> Config | None:
    """One machine transition on a configuration, None when none applies."""
    s, m = cfg.stack, cfg.focus
    if isinstance(m, Let):
        return Config((m.var, m.body, s), m.bound)
    if isinstance(m, Return) and s is not None:
        var, body, rest = s
        return Config(rest, substitute(body, var, m.value))
    r = reduce(m)
    return None if r is None else Config(s, r)


def eval_tree(m, fuel: int, width: int = 4):
    """|M|_fuel with infinite-arity nodes materialised up to ``width`` children."""
    if fuel < 0 or width < 0:
        raise ValueError("fuel and width must be non-negative")
    return _run(None, m, fuel, width)


def _run(stack, m, n, width):
    while True:
        if n == 0:
            return CUT
        n -= 1
        if isinstance(m, Return):
            if stack is None:
                return Leaf(m.value)
            var, body, stack = stack
            m = substitute(body, var, m.value)
        elif isinstance(m, Let):
            stack = (m.var, m.body, stack)
            m = m.bound
        elif isinstance(m, Op):
            return _run_op(stack, m, n, width)
        elif isinstance(m, Diverge):
            return DIV
        else:
            r = reduce(m)
            if r is None:
                raise StuckState(f"no rule applies to {m}")
            m = r


def _run_op(stack, m: Op, n, width):
    param = None
    if m.param is not None:
        param = as_nat(m.param)
        if param is None:
            raise StuckState(f"{m.name} parameter is not a numeral: {m.param}")
    if m.cont is not None:
        if not isinstance(m.cont, Lam) and not isinstance(m.cont, Var):
            raise StuckState(f"{m.name} continuation is not a function")
        kids = tuple(_run(stack, App(m.cont, numeral(k)), n, width) for k in range(width))
        return Node(m.name, kids, param, infinite=True)
    kids = tuple(_run(stack, a, n, width) for a in m.args)
    return Node(m.name, kids, param)
