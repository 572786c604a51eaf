import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from efx import (
    CUT,
    DIV,
    NAT,
    STAR,
    App,
    Leaf,
    Node,
    Return,
    Zero,
    dump,
    eta,
    eval_tree,
    mu_flatten,
    numeral,
    restrict,
    tmap,
)
from efx.errors import StuckState
from efx.machine import Config, step
from efx.metatheory import TermGenerator, TreeGenerator
from efx.reproductions import STORE_DUMP, load
from efx.trees import bind, payloads, tree_leq

from conftest import ALL_THEORIES, theory


def test_return_is_a_leaf():
    assert eval_tree(Return(STAR), 1) == Leaf(STAR)
    assert eval_tree(Return(STAR), 0) is CUT


def test_any_nat_golden():
    m = load("prelude.efx").term("?N")
    prefix = Node("or", (Leaf(numeral(0)), Node("or", (Leaf(numeral(1)), Node("or", (Leaf(numeral(2)), CUT))))))
    # smallest fuel at which the 0, 1, 2 prefix is present, found by running the machine
    assert tree_leq(prefix, eval_tree(m, 34, 2))
    assert not tree_leq(prefix, eval_tree(m, 33, 2))
    assert payloads(eval_tree(m, 60, 2)) == [numeral(k) for k in range(5)]


def test_store_dump_golden(store_prog):
    t = eval_tree(store_prog.term("V1"), 200, 4)
    assert dump(t) == STORE_DUMP
    assert t.op == "update_l" and t.param == 1
    look = t.children[0]
    assert look.infinite and look.child(7) is CUT
    assert [c.value for c in look.children] == [numeral(m + 1) for m in range(4)]


def test_diverge_is_certified_bottom():
    from efx import Diverge

    assert eval_tree(Diverge(NAT), 5) is DIV


def test_stuck_state_on_ill_formed_input():
    with pytest.raises(StuckState):
        eval_tree(App(Zero(), STAR), 5)


def test_step_machine_matches_runner():
    m = load("ex71.efx").term("M")
    cfg, n = Config(None, m), 0
    while True:
        nxt = step(cfg)
        if nxt is None:
            break
        cfg, n = nxt, n + 1
    # the machine stops at the first operation, after the same steps the runner spends
    assert cfg.stack is None and cfg.focus.name == "or"
    assert eval_tree(m, n, 2) is CUT and isinstance(eval_tree(m, n + 1, 2), Node)


def test_tree_leq_examples():
    a, b = Leaf(numeral(1)), Leaf(numeral(2))
    assert tree_leq(CUT, a) and tree_leq(CUT, DIV)
    assert tree_leq(Node("or", (a, CUT)), Node("or", (a, b)))
    assert not tree_leq(DIV, a) and tree_leq(DIV, DIV)
    assert not tree_leq(a, CUT)


def test_mu_examples():
    x = Leaf(numeral(3))
    assert mu_flatten(Leaf(x)) == x
    assert mu_flatten(Node("or", (Leaf(x), Leaf(DIV)))) == Node("or", (x, DIV))
    assert mu_flatten(Node("or", (CUT, DIV))) == Node("or", (CUT, DIV))


def test_restrict_examples():
    three = Leaf(numeral(3))
    assert restrict(three, lambda v: v == numeral(3)) == Leaf(STAR)
    assert restrict(three, lambda v: v == numeral(4)) is DIV
    assert restrict(Node("or", (Leaf(numeral(0)), CUT)), lambda v: True) == Node("or", (Leaf(STAR), CUT))


@pytest.mark.parametrize("key", ALL_THEORIES)
def test_fuel_monotonicity_and_determinism(key):
    th = theory(key)
    gen = TermGenerator(th, seed=7, max_depth=3)
    for _ in range(200 // len(ALL_THEORIES) + 1):
        ty = gen.type_(1)
        m = gen.computation(ty)
        prev = eval_tree(m, 0, 2)
        for n in range(1, 40, 3):
            cur = eval_tree(m, n, 2)
            assert tree_leq(prev, cur), (m, n)
            prev = cur
        assert eval_tree(m, 25, 2) == eval_tree(m, 25, 2)
        assert tree_leq(eval_tree(m, 25, 2), eval_tree(m, 25, 3))


NUMS = [numeral(k) for k in range(3)]


def _trees(key, seed, payload_trees=False):
    th = theory(key)
    gen = TreeGenerator(th, max_depth=3)
    rng = random.Random(seed)
    if payload_trees:
        inner = [gen.tree(rng, NUMS) for _ in range(3)]
        return th, gen, rng, gen.tree(rng, inner)
    return th, gen, rng, gen.tree(rng, NUMS)


@given(st.integers(0, 10**6), st.sampled_from(ALL_THEORIES))
@settings(max_examples=100)
def test_monad_laws(seed, key):
    th, gen, rng, t = _trees(key, seed)
    assert mu_flatten(tmap(t, eta)) == t
    assert mu_flatten(eta(t)) == t
    inner = [gen.tree(rng, NUMS) for _ in range(2)]
    outer = [gen.tree(rng, inner) for _ in range(2)]
    rrr = gen.tree(rng, outer)
    assert mu_flatten(tmap(rrr, mu_flatten)) == mu_flatten(mu_flatten(rrr))
    f = {n: gen.tree(rng, NUMS) for n in NUMS}
    assert bind(eta(NUMS[1]), f.get) == f[NUMS[1]]


@given(st.integers(0, 10**6), st.sampled_from(ALL_THEORIES))
@settings(max_examples=100)
def test_restrict_commutes_with_mu(seed, key):
    th, gen, rng, r = _trees(key, seed, payload_trees=True)
    pred = lambda v: v == NUMS[0] or v == NUMS[2]
    assert restrict(mu_flatten(r), pred) == mu_flatten(tmap(r, lambda t: restrict(t, pred)))
