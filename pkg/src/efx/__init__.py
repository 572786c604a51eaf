"""Effectful call-by-value programs, their effect trees, and behavioural logics over them.

The usual entry points:

    >>> from efx import parse_program, check_computation, parse_formula
    >>> p = parse_program("theory nondet\\ndef M : N = or(return 0, return 1)")
    >>> check_computation(p.term("M"), parse_formula("dia {1}", p), p.theory)
    <Verdict.TRUE: 1>
"""

from .errors import (
    AspectError,
    BoundsTooSmall,
    CarrierMismatch,
    EfxError,
    ExplosionGuard,
    ParseError,
    PolarityViolation,
    PreconditionViolation,
    SignatureMismatch,
    StuckState,
    TheoryMismatch,
    TypeMismatch,
    UnboundVariable,
    ValueBoundExceeded,
)
from .logic import (
    BOT,
    TOP,
    And,
    Budget,
    Checker,
    Formula,
    Maps,
    Modal,
    NatIs,
    Not,
    Or,
    PureMaps,
    check,
    check_computation,
    check_value,
    formula_size,
    is_positive,
    nat_is,
    show_formula,
    tree_preorder,
)
from .machine import eval_tree, step
from .parser import SourceProgram, parse_formula, parse_program, parse_term, parse_type
from .printer import show_term
from .proofs import (
    HoareTriple,
    LetRule,
    check_equation,
    check_hoare,
    check_let_rule,
    compile_hoare,
    operation_rules,
    parse_triple,
    synthesize_let_rule,
)
from .relations import (
    NotFound,
    Universe,
    bounded_simulation,
    distinguish,
    logical_table,
    relator_lift,
)
from .syntax import (
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
    as_nat,
    enumerate_values,
    numeral,
    substitute,
    typecheck,
)
from .theories import (
    Bounds,
    Box,
    Dia,
    Down,
    Err,
    IoDone,
    IoPref,
    ProbGt,
    State,
    Store,
    enumerate_modalities,
    exec_store,
    get_theory,
    modality_verdict,
)
from .trees import CUT, DIV, Leaf, Node, bind, dump, eta, mu_flatten, payloads, restrict, tmap
from .verdict import FALSE, TRUE, UNKNOWN, Verdict

__all__ = [name for name in dir() if not name.startswith("_")]
