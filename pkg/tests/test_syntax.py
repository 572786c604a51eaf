import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from efx import (
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
    Op,
    Return,
    Succ,
    Var,
    Zero,
    enumerate_values,
    get_theory,
    numeral,
    substitute,
    typecheck,
)
from efx.errors import ArityMismatch, AspectError, TypeMismatch, UnboundVariable
from efx.metatheory import TermGenerator
from efx.syntax import Context, EffectSignature, ArityForm

from conftest import ALL_THEORIES, theory


def test_typecheck_basics():
    assert typecheck({}, Zero()) == NAT
    assert typecheck({}, Lam("x", UNIT, Return(Var("x")))) == Arrow(UNIT, UNIT)
    v = Lam("f", Arrow(UNIT, NAT), Return(Var("f")))
    assert typecheck({}, Fix(v)) == Arrow(UNIT, NAT)
    assert typecheck({}, Diverge(NAT)) == NAT


def test_typecheck_errors():
    with pytest.raises(UnboundVariable):
        typecheck({}, Return(Var("y")))
    with pytest.raises(TypeMismatch):
        typecheck({}, App(Zero(), STAR))
    with pytest.raises(TypeMismatch):
        typecheck({}, Case(STAR, Return(STAR), "p", Return(STAR)))
    nd = get_theory("nondet").signature
    with pytest.raises(ArityMismatch):
        typecheck({}, Op("or", args=(Return(STAR),)), nd)
    with pytest.raises(AspectError):
        typecheck({}, Return(Return(STAR)))


def test_context_rejects_duplicates():
    with pytest.raises(ValueError):
        Context([("x", NAT), ("x", UNIT)])
    assert typecheck(Context([("x", NAT)]), Return(Succ(Var("x")))) == NAT


def test_alpha_equivalent_terms_are_equal():
    a = Lam("x", NAT, Return(Var("x")))
    b = Lam("y", NAT, Return(Var("y")))
    assert a == b and hash(a) == hash(b)
    assert Lam("x", NAT, Return(Var("z"))) != Lam("x", NAT, Return(Var("w")))


def test_substitute_examples():
    v = numeral(2)
    assert substitute(Return(Var("x")), "x", v) == Return(v)
    got = substitute(Lam("y", NAT, Return(Var("x"))), "x", Zero())
    assert got == Lam("y", NAT, Return(Zero()))
    shadow = Let(Return(Var("x")), "x", Return(Var("x")))
    assert substitute(shadow, "x", STAR) == Let(Return(STAR), "x", Return(Var("x")))
    with pytest.raises(AspectError):
        substitute(Return(Var("x")), "x", Return(STAR))


# Independent nameless form: bound variables become indices, free ones keep names.
def db(t, env=()):
    if isinstance(t, Var):
        return ("i", env.index(t.name)) if t.name in env else ("v", t.name)
    if isinstance(t, Lam):
        return ("lam", str(t.ty), db(t.body, (t.var,) + env))
    if isinstance(t, Let):
        return ("let", db(t.bound, env), db(t.body, (t.var,) + env))
    if isinstance(t, Case):
        return ("case", db(t.scrutinee, env), db(t.zero, env), db(t.succ, (t.var,) + env))
    if isinstance(t, Succ):
        return ("S", db(t.pred, env))
    if isinstance(t, App):
        return ("app", db(t.fn, env), db(t.arg, env))
    if isinstance(t, Return):
        return ("ret", db(t.value, env))
    if isinstance(t, Fix):
        return ("fix", db(t.fn, env))
    if isinstance(t, Op):
        return (
            "op",
            t.name,
            None if t.param is None else db(t.param, env),
            tuple(db(a, env) for a in t.args),
            None if t.cont is None else db(t.cont, env),
            str(t.ty),
        )
    if isinstance(t, Diverge):
        return ("div", str(t.ty))
    return (type(t).__name__,)


def db_subst(d, x, r):
    # r is closed, so no shifting is needed
    if d == ("v", x):
        return r
    if isinstance(d, tuple):
        return tuple(db_subst(c, x, r) if isinstance(c, tuple) else c for c in d)
    return d


def shadowing(t, x):
    """Occasionally rebind x inside t so substitution must stop at the binder."""
    return Let(Return(Var(x)), x, t)


@pytest.mark.parametrize("key", ["nondet", "store", "io"])
def test_substitution_against_nameless_oracle(key):
    th = theory(key)
    gen = TermGenerator(th, seed=11, max_depth=3)
    for i in range(100 // 3 + 1):
        body = gen.computation(NAT, (("x", NAT),))
        if i % 3 == 0:
            body = shadowing(body, "x")
        v = numeral(i % 4)
        got = substitute(body, "x", v)
        assert db(got) == db_subst(db(body), "x", db(v))
        assert typecheck({}, got, th.signature) == NAT


@given(st.integers(0, 10**6), st.sampled_from(ALL_THEORIES))
@settings(max_examples=60)
def test_substitution_preserves_typing(seed, key):
    th = theory(key)
    gen = TermGenerator(th, seed=seed, max_depth=3)
    rho = gen.type_(1)
    ty = gen.type_(1)
    m = gen.computation(ty, (("x", rho),))
    v = gen.value(rho)
    assert typecheck({"x": rho}, m, th.signature) == ty
    assert typecheck({}, substitute(m, "x", v), th.signature) == ty


@given(st.integers(0, 10**6), st.sampled_from(ALL_THEORIES))
@settings(max_examples=60)
def test_typing_is_deterministic(seed, key):
    th = theory(key)
    gen = TermGenerator(th, seed=seed)
    ty = gen.type_(2)
    m = gen.computation(ty)
    assert typecheck({}, m, th.signature) == ty
    assert typecheck({}, m, th.signature) == typecheck({}, m, th.signature)


def test_enumerate_values_examples():
    assert enumerate_values(NAT, 2) == [numeral(0), numeral(1), numeral(2)]
    assert enumerate_values(UNIT, 0) == [STAR]
    assert enumerate_values(Arrow(UNIT, UNIT), 0) == []
    unit_fns = enumerate_values(Arrow(UNIT, UNIT), 1)
    assert Lam("x", UNIT, Return(STAR)) in unit_fns
    assert Lam("x", UNIT, Diverge(UNIT)) in unit_fns


def template_oracle(ty, k, sig):
    """Exhaustive expansion of the documented template grammar, as a set."""
    if ty == UNIT:
        return {STAR}
    if ty == NAT:
        return {numeral(n) for n in range(k + 1)}
    if k == 0:
        return set()
    out = set(template_oracle(ty, k - 1, sig))

    def simple(level):
        b = {Diverge(ty.codomain)} | {Return(v) for v in template_oracle(ty.codomain, level - 1, sig)}
        if ty.domain == ty.codomain:
            b.add(Return(Var("x")))
        return b

    bodies = simple(k)
    if k >= 2:
        for name, form in sig.items():
            if form.param or form.infinite or form.n > 2:
                continue
            if form.n == 0:
                bodies.add(Op(name, ty=ty.codomain))
            else:
                bodies |= {Op(name, args=c) for c in itertools.product(simple(k - 1), repeat=form.n)}
    return out | {Lam("x", ty.domain, b) for b in bodies}


TYPES = [UNIT, NAT, Arrow(UNIT, UNIT), Arrow(NAT, NAT), Arrow(NAT, Arrow(UNIT, NAT)), Arrow(Arrow(UNIT, UNIT), UNIT)]


@pytest.mark.parametrize("key", ["pure", "nondet", "error"])
@pytest.mark.parametrize("ty", TYPES, ids=str)
def test_enumerate_values_matches_template_oracle(ty, key):
    sig = theory(key).signature
    for k in range(4):
        got = enumerate_values(ty, k, sig)
        assert len(got) == len(set(got))
        assert set(got) == template_oracle(ty, k, sig)
        for v in got:
            assert v.closed
            assert typecheck({}, v, sig) == ty
        assert enumerate_values(ty, k + 1, sig)[: len(got)] == got


def test_signature_forms():
    sig = EffectSignature({"or": ArityForm(n=2), "lookup": ArityForm(infinite=True)})
    assert "or" in sig and len(sig) == 2
    assert str(sig["or"]) == "a^2"
    assert str(sig["lookup"]) == "a^N"
    assert str(ArityForm(param=True, n=1)) == "N x a^1"
