import pytest

from efx import (
    DIV,
    NAT,
    STAR,
    UNIT,
    Arrow,
    Op,
    Return,
    eval_tree,
    numeral,
    parse_formula,
    parse_program,
    parse_term,
    parse_type,
    show_formula,
    show_term,
    typecheck,
)
from efx.errors import ParseError, TheoryMismatch
from efx.metatheory import TermGenerator
from efx.parser import parse_trace
from efx.reproductions import load

from conftest import ALL_THEORIES, theory

HEADERS = {
    "pure": "theory pure",
    "error": "theory error e",
    "nondet": "theory nondet",
    "prob": "theory prob",
    "store": "theory store l bound 1",
    "io": "theory io",
}


def test_or_of_returns():
    p = parse_program("theory nondet")
    assert parse_term("or(return 0, return 1)", p) == Op("or", args=(Return(numeral(0)), Return(numeral(1))))


def test_example_terms_typecheck(ex71, nondet):
    for name in ("M", "N"):
        assert typecheck({}, ex71.term(name), nondet.signature) == Arrow(UNIT, UNIT)
    assert [str(t) for t in ex71.universes["U"]] == [str(ex71.term("M")), str(ex71.term("N"))]
    assert show_formula(ex71.formulas["dia_dia"]) == "dia [* |-> dia top]"


def test_prelude_any_nat():
    p = parse_program("theory nondet")
    m = parse_term("let ?N => x in return x", p)
    assert typecheck({}, m, p.theory.signature) == NAT


def test_numerals_and_sugar():
    p = parse_program("theory pure")
    assert parse_term("return 3", p) == Return(numeral(3))
    assert parse_term("return S(S(Z))", p) == Return(numeral(2))
    assert parse_term("omega", p) == parse_term("diverge", p)
    assert eval_tree(parse_term("let omega => x in return *", p), 10) is DIV


@pytest.mark.parametrize("key", ALL_THEORIES)
def test_print_parse_round_trip(key):
    th = theory(key)
    program = parse_program(HEADERS[key], use_prelude=False)
    gen = TermGenerator(th, seed=13, max_depth=4)
    n = 500 // len(ALL_THEORIES) + 1
    for i in range(n):
        ty = gen.type_(2)
        t = gen.computation(ty) if i % 3 else gen.value(ty)
        text = show_term(t)
        back = parse_term(text, program)
        assert back == t, text
        assert show_term(back) == text


def test_theory_mismatch_is_located():
    with pytest.raises(TheoryMismatch) as e:
        parse_program("theory pure\ndef M : N = or(return 0, return 1)\n")
    assert e.value.line == 2
    with pytest.raises(TheoryMismatch):
        parse_term("lookup_l(fun x:N. return x)", parse_program("theory store l2"))


def test_syntax_errors_carry_positions():
    with pytest.raises(ParseError) as e:
        parse_program("theory nondet\n\ndef M : 1 = or(return *,\n")
    assert e.value.line is not None and "3" in str(e.value)
    with pytest.raises(ParseError) as e:
        parse_program("theory pure\ndef M : 1 = return 0\n")
    assert "in M" in str(e.value)
    with pytest.raises(ParseError):
        parse_program("theory pure\ndef M : 1 = return *\ndef M : 1 = return *\n")
    with pytest.raises(ParseError):
        parse_program("theory pure\ndef M : 1 = nope\n")
    with pytest.raises(ParseError):
        parse_program("theory bogus\n")
    with pytest.raises(ParseError):
        parse_program("junk\ntheory pure\n")


def test_types_and_formulas():
    assert parse_type("N -> 1 -> N") == Arrow(NAT, Arrow(UNIT, NAT))
    nd = parse_program("theory nondet")
    for text in ("{3}", "{>=2}", "top", "bot", "and(dia top, box bot)", "not dia top", "[* |-> dia top]", "[{0} => box {0}]"):
        assert show_formula(parse_formula(text, nd)) == text
    st = parse_program("theory store l0 l1 bound 3")
    f = parse_formula("st{l0:3,l1:0}->{l0:1,l1:0} top", st)
    assert show_formula(f) == "st{l0:3,l1:0}->{l0:1,l1:0} top"
    io = parse_program("theory io")
    assert show_formula(parse_formula('io.done"?1!2" top', io)) == 'io.done"?1!2" top'
    assert show_formula(parse_formula('io.pref"?1" top', io)) == 'io.pref"?1" top'
    pr = parse_program("theory prob")
    assert show_formula(parse_formula("P>1/2 top", pr)) == "P>1/2 top"
    er = parse_program("theory error e")
    assert show_formula(parse_formula("err(e) top", er)) == "err(e) top"
    assert parse_trace("?1!2") == (("?", 1), ("!", 2))


def test_shipped_programs_parse():
    for name in ("ex71.efx", "ex72.efx", "fact.efx", "prelude.efx", "store.efx", "store_small.efx"):
        p = load(name)
        for d in p.definitions.values():
            assert typecheck({}, d.term, p.theory.signature) == d.type


def test_prelude_is_resolved_under_the_user_theory():
    # loop uses no effects, so it works in a pure program too
    p = parse_program("theory pure")
    assert typecheck({}, p.term("loop *"), p.theory.signature) == UNIT
    with pytest.raises(TheoryMismatch):
        p.term("?N")


def test_star_and_unit():
    assert parse_term("return *") == Return(STAR)
