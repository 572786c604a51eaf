import random
from fractions import Fraction as Q

import pytest

from efx import DIV, STAR, UNIT, Budget, Leaf, Let, Node, NotFound, Return, Var, distinguish, get_theory
from efx.logic import in_modality
from efx.metatheory import (
    BrokenDownTheory,
    TreeGenerator,
    check_coincidence_and_congruence,
    check_openness,
    check_relator_laws,
    check_strong_decomposability,
    leaf_masses,
    prob_witness,
    sample_contexts,
    shrink,
)
from efx.reproductions import congruence_pairs, shipped_universes
from efx.theories import ProbGt, staircase_area
from efx.trees import size

from conftest import ALL_THEORIES, theory

S = Leaf(STAR)


@pytest.mark.parametrize("seed", [1, 2])
@pytest.mark.parametrize("key", ALL_THEORIES)
def test_openness_small(key, seed):
    rep = check_openness(theory(key), samples=150, seed=seed)
    assert rep.passed, rep.lines()
    assert rep.law("upward-closure").antecedent > 0 and rep.law("chain").antecedent > 0


@pytest.mark.parametrize("key", ALL_THEORIES)
def test_decomposability_small(key):
    th = theory(key)
    rep = check_strong_decomposability(th, samples=80, seed=3)
    assert rep.passed, rep.lines()
    law = "witness" if key == "prob" else "biconditional"
    assert rep.law(law).antecedent > 0


@pytest.mark.parametrize("key", ALL_THEORIES)
def test_relator_laws_small(key):
    rep = check_relator_laws(theory(key), samples=60, seed=4)
    assert rep.passed, rep.lines()
    assert all(rep.law(n).checked > 0 for n in ("reflexivity", "composition", "mu", "kleisli"))


def test_store_decomposability_at_bound_one():
    th = get_theory("store", locations=("l",), bound=1)
    assert check_strong_decomposability(th, samples=200, seed=0).passed


def test_reports_are_reproducible():
    th = get_theory("nondet")
    a = check_relator_laws(th, samples=30, seed=9).lines()
    b = check_relator_laws(th, samples=30, seed=9).lines()
    assert a == b
    assert check_openness(th, samples=30, seed=1).lines() != [] and a[0].startswith("relator/nondet reflexivity: pass")


def test_openness_rejects_nonpositive_samples():
    with pytest.raises(ValueError):
        check_openness(get_theory("pure"), samples=0)


def test_broken_down_is_caught():
    rep = check_openness(BrokenDownTheory(), samples=200, seed=0)
    assert not rep.passed
    assert rep.law("upward-closure").violations + rep.law("stability").violations >= 1
    assert rep.law("definiteness").violations == 0
    # shrinking reduces every counterexample to the bare cut
    assert {v.counterexample for v in rep.violations} == {"cut"}


def test_shrink_reaches_minimal_tree():
    t = Node("or", (Node("or", (S, DIV)), Node("or", (DIV, Node("or", (S, S))))))
    small = shrink(t, lambda s: isinstance(s, Node) and s.op == "or")
    assert size(small) <= 3


def test_prob_witness_example():
    th = get_theory("prob")
    r = Node("por", (Leaf(S), Leaf(DIV)))
    assert leaf_masses(r) == {S: Q(1, 2), DIV: Q(1, 2)}
    pairs, D = prob_witness(th, r, Q(1, 4), 4)
    a = [o1.q for o1, _ in pairs]
    b = [o2.q for _, o2 in pairs]
    assert staircase_area(a, b) >= Q(1, 4)
    for o1, o2 in pairs:
        assert in_modality(th, o1, r, lambda t, o2=o2: th.verdict(o2, t)).definite
    # the flattened tree has success 1/2, so P>1/4 holds and the witness is consistent
    assert th.verdict(ProbGt(Q(1, 4)), Node("por", (S, DIV))).name == "TRUE"


def test_prob_witness_needs_refinement():
    # success mass (d-1)/d cannot be matched on the d-grid itself
    th = get_theory("prob")
    r = Node("por", (Leaf(S), Leaf(Node("por", (S, DIV)))))
    pairs, D = prob_witness(th, r, Q(1, 2), 4)
    assert D > 4


def test_coincidence_and_congruence_on_shipped():
    pairs = congruence_pairs(20)
    assert sum(map(len, pairs.values())) == 20
    for th, seeds in shipped_universes():
        rep = check_coincidence_and_congruence([seeds], th, Budget(max_size=6), pairs=pairs.get(th, ()), contexts=5)
        assert rep.passed, rep.lines()


def test_let_context_preserves_equivalences(nondet):
    pairs = congruence_pairs(20)[nondet]
    for m, n in pairs:
        ms = Let(m, "x", Return(Var("x")))
        ns = Let(n, "x", Return(Var("x")))
        assert distinguish(ms, ns, nondet, Budget(max_size=6), positive=True) is NotFound


def test_contexts_are_well_typed():
    from efx import typecheck

    for key in ALL_THEORIES:
        th = theory(key)
        for ctx in sample_contexts(th, UNIT, 20, seed=5):
            assert typecheck({}, ctx(Return(STAR)), th.signature) is not None


def test_generator_respects_signature():
    for key in ALL_THEORIES:
        th = theory(key)
        gen = TreeGenerator(th)
        rng = random.Random(0)
        for _ in range(50):
            th.check_signature(gen.tree(rng))
