"""Concrete-syntax printing for terms. The parser reads back exactly this."""

from __future__ import annotations

from .syntax import (
    App,
    Case,
    Diverge,
    Fix,
    Lam,
    Let,
    Op,
    Return,
    Star,
    Succ,
    Var,
    Zero,
    as_nat,
)


def show_term(t) -> str:
    if isinstance(t, Lam):
        return f"fun {t.var}:{t.ty}. {show_term(t.body)}"
    if isinstance(t, Let):
        bound = show_term(t.bound)
        if isinstance(t.bound, Let):
            bound = f"({bound})"
        return f"let {bound} => {t.var} in {show_term(t.body)}"
    if isinstance(t, Case):
        return (
            f"case {_atom(t.scrutinee)} of "
            f"{{Z => {show_term(t.zero)}; S({t.var}) => {show_term(t.succ)}}}"
        )
    if isinstance(t, Return):
        return f"return {_atom(t.value)}"
    if isinstance(t, App):
        return f"{_atom(t.fn)} {_atom(t.arg)}"
    if isinstance(t, Fix):
        return f"fix({show_term(t.fn)})"
    if isinstance(t, Diverge):
        return f"diverge[{t.ty}]"
    if isinstance(t, Op):
        return _show_op(t)
    return _atom(t)


def _atom(v) -> str:
    if isinstance(v, Star):
        return "*"
    if isinstance(v, Zero):
        return "0"
    if isinstance(v, Succ):
        n = as_nat(v)
        return str(n) if n is not None else f"S({show_term(v.pred)})"
    if isinstance(v, Var):
        return v.name
    return f"({show_term(v)})"


def _show_op(t: Op) -> str:
    parts = [", ".join(show_term(a) for a in t.args)]
    if t.cont is not None:
        parts = [show_term(t.cont)]
    inner = parts[0]
    if t.param is not None:
        inner = f"{show_term(t.param)}; {inner}"
    ann = f"[{t.ty}]" if t.ty is not None and not t.args and t.cont is None else ""
    return f"{t.name}{ann}({inner})"
