"""Acceptance gate: one test per criterion, each with its runtime bound.

Every test records a line in ``RESULTS``; conftest prints them at the end of
the run. ``python3 tests/test_acceptance.py`` runs the gate without pytest.
"""

import sys
import time
from math import factorial

import pytest

from efx import (
    FALSE,
    NAT,
    TOP,
    TRUE,
    UNIT,
    Budget,
    Down,
    NotFound,
    bounded_simulation,
    check_computation,
    distinguish,
    dump,
    eval_tree,
    exec_store,
    get_theory,
    logical_table,
    numeral,
    show_formula,
)
from efx.syntax import App, Case, Diverge, Fix, Lam, Let, Op, Return, Star, Succ, Var, Zero
from efx.metatheory import (
    BrokenDownTheory,
    check_coincidence_and_congruence,
    check_openness,
    check_relator_laws,
    check_strong_decomposability,
)
from efx.proofs import LetRule, check_equation, check_hoare, check_let_rule, compile_hoare, parse_triple
from efx.relations import Universe
from efx.reproductions import (
    EXPECTED_SIX,
    SEPARATOR,
    SIX,
    STORE_DUMP,
    congruence_pairs,
    example_approximations,
    example_equations,
    load,
    program_text,
    shipped_universes,
)

RESULTS = {}


class timed:
    def __init__(self, label, limit):
        self.label, self.limit = label, limit

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, kind, exc, tb):
        dt = time.perf_counter() - self.t0
        ok = kind is None and dt < self.limit
        note = "" if kind is None else f" ({kind.__name__})"
        RESULTS[self.label] = f"{self.label}: {'PASS' if ok else 'FAIL'} in {dt:.2f}s (limit {self.limit}s){note}"
        print(RESULTS[self.label])
        if kind is None:
            assert dt < self.limit, RESULTS[self.label]


def test_criterion_1_full_versus_positive():
    with timed("criterion 1 (full vs positive separation)", 5):
        p = load("ex71.efx")
        th = p.theory
        M, N = p.term("M"), p.term("N")
        for f, expected in zip(SIX, EXPECTED_SIX):
            assert check_computation(M, f, th) is expected, show_formula(f)
            assert check_computation(N, f, th) is expected, show_formula(f)
        assert EXPECTED_SIX.count(TRUE) == 4 and EXPECTED_SIX.count(FALSE) == 2
        b = Budget()
        sep = distinguish(N, M, th, b)
        assert sep is not NotFound
        assert check_computation(N, sep, th) is TRUE and check_computation(M, sep, th) is FALSE
        # equivalent to the known separator on the universe of both terms
        assert sep == SEPARATOR
        assert distinguish(N, M, th, b, positive=True) is NotFound
        assert distinguish(M, N, th, b, positive=True) is NotFound


def test_criterion_2_approximations():
    with timed("criterion 2 (identity against its approximations)", 30):
        rep = example_approximations(kmax=5)
        assert rep.ok, rep.lines
        assert rep.data["leaves"] >= 6
        assert all(r is FALSE for r in rep.data["refuted"])


def test_criterion_3_global_store():
    with timed("criterion 3 (global store semantics)", 5):
        p = load("store.efx")
        th = p.theory
        t = eval_tree(p.term("V1"), 200, 4)
        assert dump(t) == STORE_DUMP
        for s in th.states():
            assert exec_store(t, s, th.bound) == (numeral(2), s.set("l", 1))


# An environment-passing big-step interpreter for store programs. It shares
# no code with the machine: values are Python ints, None and closures.


class _Diverged(Exception):
    pass


def _value(v, env):
    if isinstance(v, Star):
        return None
    if isinstance(v, Zero):
        return 0
    if isinstance(v, Succ):
        return _value(v.pred, env) + 1
    if isinstance(v, Var):
        return env[v.name]
    if isinstance(v, Lam):
        return lambda a, st: _run(v.body, {**env, v.var: a}, st)
    raise TypeError(v)


def _run(m, env, st):
    if isinstance(m, Return):
        return _value(m.value, env), st
    if isinstance(m, App):
        return _value(m.fn, env)(_value(m.arg, env), st)
    if isinstance(m, Let):
        a, st = _run(m.bound, env, st)
        return _run(m.body, {**env, m.var: a}, st)
    if isinstance(m, Case):
        n = _value(m.scrutinee, env)
        if n == 0:
            return _run(m.zero, env, st)
        return _run(m.succ, {**env, m.var: n - 1}, st)
    if isinstance(m, Fix):
        body = _value(m.fn, env)

        def g(x, st):
            h, st = body(g, st)
            return h(x, st)

        return g, st
    if isinstance(m, Op) and m.name.startswith("lookup_"):
        return _value(m.cont, env)(st[m.name[7:]], st)
    if isinstance(m, Op) and m.name.startswith("update_"):
        return _run(m.args[0], env, {**st, m.name[7:]: _value(m.param, env)})
    if isinstance(m, Diverge):
        raise _Diverged
    raise TypeError(m)


def test_criterion_4_hoare_factorial():
    with timed("criterion 4 (Hoare triple compilation)", 5):
        program = load("fact.efx")
        th = program.theory
        assert th.locations == ("l", "l2") and th.bound == 6
        tr = parse_triple(program_text("fact.triple"), program)
        f = compile_hoare(tr, th)
        # total-correctness shape: a conjunction over start states of
        # disjunctions of st{s}->{s'} top with s'(l2) = s(l)!
        for conj in f.items:
            pre = {d.modality.pre for d in conj.items}
            assert len(pre) == 1
            (s,) = pre
            assert s["l"] <= 3
            assert {d.modality.post["l2"] for d in conj.items} == {factorial(s["l"])}
            assert all(d.body == TOP for d in conj.items)
        assert len(f.items) == 4 * (th.bound + 1)
        # the oracle runs the program from every bounded start state
        states = th.states()
        assert len(states) == 49
        limit = sys.getrecursionlimit()
        sys.setrecursionlimit(50000)
        try:
            oracle = {}
            for s in states:
                ret, final = _run(tr.program, {}, dict(s.items))
                oracle[s] = final
                assert ret is None and final["l"] == s["l"] and final["l2"] == factorial(s["l"])
        finally:
            sys.setrecursionlimit(limit)
        holds = all(tr.post(z, s, s.set("l2", oracle[s]["l2"]), None) for z in tr.z_range for s in states if tr.pre(z, s))
        assert holds
        rep = check_hoare(tr, th, Budget(fuel=1000))
        assert rep.verdict is TRUE
        # a wrong postcondition is refuted by both routes
        bad = parse_triple(program_text("fact.triple").replace("post l2 = z!", "post l2 = z"), program)
        assert not all(bad.post(z, s, s.set("l2", oracle[s]["l2"]), None) for z in bad.z_range for s in states if bad.pre(z, s))
        assert check_hoare(bad, th, Budget(fuel=1000)).verdict is FALSE


def test_criterion_5_equational_laws():
    with timed("criterion 5 (equational laws)", 30):
        rep = example_equations(seed=0, bodies=3, or_terms=10)
        assert rep.ok, rep.lines
        assert sum("update/lookup" in line for line in rep.lines) == 3
        assert sum("or-idempotence" in line for line in rep.lines) == 10
        # a non-equation is refuted under the same bounds
        st = get_theory("store", locations=("l",), bound=3)
        lhs = Op("update_l", numeral(1), (Op("lookup_l", cont=Lam("x", NAT, Return(Var("x")))),))
        assert check_equation(lhs, Op("update_l", numeral(1), (Return(numeral(0)),)), st).verdict is FALSE


SUITE_THEORIES = [
    ("pure", {}),
    ("error", {"labels": ("e",)}),
    ("nondet", {}),
    ("prob", {}),
    ("store", {"locations": ("l",), "bound": 1}),
    ("store", {"locations": ("l", "k"), "bound": 2}),
    ("io", {}),
]
SUITE_IDS = ["pure", "error", "nondet", "prob", "store1", "store2x2", "io"]


@pytest.mark.parametrize("key,opts", SUITE_THEORIES, ids=SUITE_IDS)
@pytest.mark.parametrize(
    "suite,run,samples",
    [
        ("openness", check_openness, 1000),
        ("decomposability", check_strong_decomposability, 500),
        ("relator", check_relator_laws, 500),
    ],
    ids=["openness", "decomposability", "relator"],
)
def test_criterion_6_metatheory_suites(key, opts, suite, run, samples):
    tag = SUITE_IDS[SUITE_THEORIES.index((key, opts))]
    with timed(f"criterion 6 ({suite}, {tag}, {samples} samples)", 60):
        rep = run(get_theory(key, **opts), samples=samples, seed=0)
        assert rep.passed, "\n".join(rep.lines())
        assert all(st.checked > 0 for st in rep.laws.values())


def test_criterion_7_coincidence():
    with timed("criterion 7 (coincidence on shipped universes)", 60):
        b = Budget()
        for th, seeds in shipped_universes():
            u = Universe(seeds, th, b)
            sim = bounded_simulation(u, th, b)
            assert sim.pairs == logical_table(u, b, positive=True)


def test_criterion_8_congruence():
    with timed("criterion 8 (congruence smoke)", 60):
        pairs = congruence_pairs(20)
        assert sum(map(len, pairs.values())) == 20
        b = Budget(max_size=6)
        for th, ps in pairs.items():
            for m, n in ps:
                assert distinguish(m, n, th, b, positive=True) is NotFound
            rep = check_coincidence_and_congruence([], th, b, pairs=ps, contexts=20, seed=0)
            assert rep.passed, "\n".join(rep.lines())
            assert rep.law("congruence").checked == 20 * len(ps)


def test_criterion_9_negative_controls():
    with timed("criterion 9 (seeded faults are detected)", 60):
        rep = check_openness(BrokenDownTheory(), samples=1000, seed=0)
        assert rep.law("upward-closure").violations + rep.law("stability").violations >= 1
        pure = get_theory("pure")
        res = check_let_rule(LetRule(Down(), ()), Diverge(UNIT), "x", Return(Star()), TOP, [], pure)
        assert res.verdict is TRUE and res.direct is FALSE and res.violation


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
