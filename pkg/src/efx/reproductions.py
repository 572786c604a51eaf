"""Replayable reproductions of the worked examples, used by the CLI and the tests."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from .logic import TOP, And, Budget, Checker, Maps, Modal, Not, nat_is, show_formula
from .machine import eval_tree
from .metatheory import TermGenerator
from .parser import parse_program
from .proofs import check_equation
from .relations import NotFound, Universe, bounded_simulation, distinguish, logical_table
from .syntax import NAT, STAR, UNIT, Lam, Op, Return, numeral, substitute
from .theories import Box, Dia, exec_store, get_theory
from .trees import dump, payloads
from .verdict import FALSE, TRUE


def program_text(name: str) -> str:
    return resources.files("efx").joinpath(f"programs/{name}").read_text()


def load(name: str):
    return parse_program(program_text(name))


@dataclass
class Reproduction:
    name: str
    ok: bool
    lines: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def __str__(self):
        return "\n".join(self.lines + [f"{self.name}: {'reproduced' if self.ok else 'MISMATCH'}"])


# ---------------------------------------------------------------- separating full and positive logic

SIX = [
    Modal(Dia(), TOP),
    Modal(Box(), TOP),
    Modal(Dia(), Maps(STAR, Modal(Dia(), TOP))),
    Modal(Dia(), Maps(STAR, Modal(Box(), TOP))),
    Modal(Box(), Maps(STAR, Modal(Dia(), TOP))),
    Modal(Box(), Maps(STAR, Modal(Box(), TOP))),
]
EXPECTED_SIX = [TRUE, TRUE, TRUE, TRUE, FALSE, FALSE]
SEPARATOR = Modal(Dia(), Maps(STAR, And((Modal(Dia(), TOP), Not(Modal(Box(), TOP))))))


def example_full_vs_positive(budget: Budget = Budget()) -> Reproduction:
    p = load("ex71.efx")
    th = p.theory
    M, N = p.term("M"), p.term("N")
    c = Checker(th, budget)
    lines = [f"{'formula':<28} {'M':<8} N"]
    rows = []
    for f in SIX:
        vm, vn = c.computation(M, f), c.computation(N, f)
        rows.append((f, vm, vn))
        lines.append(f"{show_formula(f):<28} {str(vm):<8} {vn}")
    six_ok = all(vm is e and vn is e for (_, vm, vn), e in zip(rows, EXPECTED_SIX))
    full = distinguish(N, M, th, budget)
    pos_nm = distinguish(N, M, th, budget, positive=True)
    pos_mn = distinguish(M, N, th, budget, positive=True)
    lines.append(f"full logic separates N from M by: {show_formula(full) if full else full}")
    lines.append(f"positive logic, N against M: {pos_nm}; M against N: {pos_mn}")
    sep_ok = full is not NotFound and c.computation(N, SEPARATOR) is TRUE and c.computation(M, SEPARATOR) is FALSE
    u = Universe([M, N], th, budget)
    sim = bounded_simulation(u, th, budget)
    log = logical_table(u, budget, positive=True)
    co = sim.pairs == log and (M, N) in log and (N, M) in log
    lines.append(f"similarity table equals positive logical table: {co} ({len(log)} pairs)")
    ok = six_ok and sep_ok and pos_nm is NotFound and pos_mn is NotFound and co
    return Reproduction("7.1", ok, lines, {"rows": rows, "full": full, "positive": (pos_nm, pos_mn)})


# ---------------------------------------------------------------- identity against its approximations


def phi_k(k: int):
    """dia (and over n <= k of [n |-> dia {n}])."""
    return Modal(Dia(), And(tuple(Maps(numeral(n), Modal(Dia(), nat_is(n))) for n in range(k + 1))))


def example_approximations(kmax: int = 5, budget: Budget = Budget(fuel=600), tree_fuel: int = 100) -> Reproduction:
    """Phi_k for k <= kmax on both terms, then refute each leaf of |M|_tree_fuel on its own index.

    Refuting leaf i runs apid i on i, which costs more steps than producing
    the leaf, so the leaf checks get the larger ``budget.fuel``.
    """
    p = load("ex72.efx")
    th = p.theory
    I, M = p.term("I"), p.term("M")
    c = Checker(th, budget)
    lines = []
    ok = True
    for k in range(kmax + 1):
        vi, vm = c.computation(I, phi_k(k)), c.computation(M, phi_k(k))
        ok &= vi is TRUE and vm is TRUE
        lines.append(f"Phi_{k}: return id {vi}, M {vm}")
    leaves = payloads(eval_tree(M, tree_fuel, budget.width))
    refuted = []
    for i, v in enumerate(leaves):
        r = c.value(v, Maps(numeral(i), Modal(Dia(), nat_is(i))))
        refuted.append(r)
    ok &= len(leaves) >= 6 and all(r is FALSE for r in refuted)
    lines.append(f"{len(leaves)} leaves of M at fuel {tree_fuel}; leaf i refuted on conjunct i: {[str(r) for r in refuted]}")
    lines.append("the infinite conjunction over all n is not finitely checkable")
    return Reproduction("7.2", ok, lines, {"leaves": len(leaves), "refuted": refuted})


# ---------------------------------------------------------------- global store

STORE_DUMP = """\
update_l[1]
  lookup_l
    0: leaf 1
    1: leaf 2
    2: leaf 3
    3: leaf 4
    ...
"""


def example_store(budget: Budget = Budget()) -> Reproduction:
    p = load("store.efx")
    th = p.theory
    t = eval_tree(p.term("V1"), budget.fuel, budget.width)
    text = dump(t)
    lines = text.rstrip("\n").split("\n")
    results = []
    ok = text == STORE_DUMP
    for s in th.states():
        r = exec_store(t, s, th.bound)
        expected = (numeral(2), s.set("l", 1))
        ok &= r == expected
        results.append((s, r))
        lines.append(f"exec from {s}: returns {r[0]}, final state {r[1]}")
    return Reproduction("store", ok, lines, {"tree": t, "exec": results})


# ---------------------------------------------------------------- equational laws


def update_lookup_pair(n: int, body, x="x"):
    """update_l(n; lookup_l(fun x. body)) and update_l(n; body[n/x])."""
    lhs = Op("update_l", numeral(n), (Op("lookup_l", cont=Lam(x, NAT, body)),))
    rhs = Op("update_l", numeral(n), (substitute(body, x, numeral(n)),))
    return lhs, rhs


def example_equations(seed: int = 0, bodies: int = 3, or_terms: int = 10, budget: Budget = Budget()) -> Reproduction:
    st = get_theory("store", locations=("l",), bound=3)
    gen = TermGenerator(st, seed=seed, max_depth=3)
    lines = []
    ok = True
    for i in range(bodies):
        body = gen.computation(UNIT if i % 2 == 0 else NAT, (("x", NAT),))
        n = i % 4
        lhs, rhs = update_lookup_pair(n, body)
        rep = check_equation(lhs, rhs, st, budget=budget)
        ok &= rep.verdict is TRUE
        lines.append(f"update/lookup, n={n}, body {body}: {rep.verdict} ({rep.compared} formulas, {rep.unresolved} unresolved)")
    nd = get_theory("nondet")
    gen = TermGenerator(nd, seed=seed, max_depth=3)
    for i in range(or_terms):
        m = gen.computation(UNIT if i % 2 == 0 else NAT)
        rep = check_equation(Op("or", args=(m, m)), m, nd, budget=budget)
        ok &= rep.verdict is TRUE
        lines.append(f"or-idempotence on {m}: {rep.verdict} ({rep.compared} formulas, {rep.unresolved} unresolved)")
    return Reproduction("equation", ok, lines)


EXAMPLES = {
    "7.1": example_full_vs_positive,
    "7.2": example_approximations,
    "store": example_store,
    "equation": example_equations,
}


# ---------------------------------------------------------------- shipped universes and pairs


def shipped_universes():
    """(theory, seed terms) for the example universes."""
    ex = load("ex71.efx")
    pure = get_theory("pure")
    sp = load("store_small.efx")
    return [
        (ex.theory, [ex.term("M"), ex.term("N")]),
        (pure, [Return(numeral(i)) for i in range(4)]),
        (sp.theory, sp.universes["U"]),
    ]


def congruence_pairs(count: int = 20, seed: int = 0):
    """Pairs of computations expected to be equivalent, grouped by theory."""
    ex = load("ex71.efx")
    sp = load("store_small.efx")
    nd = ex.theory
    out = {nd: [(ex.term("M"), ex.term("N")), (ex.term("N"), ex.term("M"))], sp.theory: []}
    U = sp.universes["U"]
    out[sp.theory] += [(U[0], U[1]), (U[1], U[0]), (U[1], U[2]), (U[2], U[1])]
    gen = TermGenerator(nd, seed=seed, max_depth=2, allow_fix=False)
    k = 0
    while sum(map(len, out.values())) < count:
        m = gen.computation(UNIT if k % 2 == 0 else NAT)
        out[nd].append((Op("or", args=(m, m)), m))
        k += 1
    return out


__all__ = [
    "EXAMPLES",
    "Reproduction",
    "example_full_vs_positive",
    "example_approximations",
    "example_store",
    "example_equations",
    "phi_k",
    "SIX",
    "SEPARATOR",
    "STORE_DUMP",
    "shipped_universes",
    "congruence_pairs",
    "update_lookup_pair",
]
