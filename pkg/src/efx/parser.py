"""Concrete syntax: terms, types, formulas, and ``.efx`` programs.

A program is a theory header followed by items, each starting at column 0
with a keyword::

    theory store l l2 bound 6
    def V : N -> N = fun y:N. update_l(y; lookup_l(fun x:N. return S(x)))
    universe U = V, (fun y:N. return y)
    formula F = st{l:0,l2:0}->{l:1,l2:0} {2}

``#`` starts a comment. Names not defined in the file are looked up in the
bundled prelude and parsed on first use under the file's theory.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from .errors import EfxError, ParseError, TheoryMismatch
from .logic import (
    BOT,
    TOP,
    And,
    Formula,
    Maps,
    Modal,
    NatIs,
    Not,
    Or,
    PureMaps,
)
from .syntax import (
    NAT,
    STAR,
    UNIT,
    ZERO,
    App,
    Arrow,
    Case,
    Diverge,
    Fix,
    Lam,
    Let,
    Op,
    Return,
    Star,
    Succ,
    Type,
    Value,
    Var,
    Zero,
    numeral,
    typecheck,
)
from .theories import (
    Box,
    Dia,
    Down,
    EffectTheory,
    Err,
    IoDone,
    IoPref,
    ProbGt,
    State,
    Store,
    get_theory,
)

# ---------------------------------------------------------------- lexer

_SYMBOLS = ["|->", "=>", "->", ">=", "(", ")", "{", "}", "[", "]", ",", ";", ":", ".", "*", "=", ">", "/", "~", "\\"]
_IDENT = re.compile(r"\??[A-Za-z_][A-Za-z0-9_']*")
_NUMBER = re.compile(r"[0-9]+")
_STRING = re.compile(r'"[^"\n]*"')


@dataclass(frozen=True)
class Token:
    kind: str  # ident | num | str | sym | eof
    text: str
    line: int
    col: int


def tokenize(text: str, line0: int = 1) -> list:
    toks = []
    line, col, i = line0, 1, 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line, col, i = line + 1, 1, i + 1
            continue
        if ch.isspace():
            col, i = col + 1, i + 1
            continue
        if ch == "#":
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        for kw in ("io.done", "io.pref"):
            if text.startswith(kw, i):
                toks.append(Token("ident", kw, line, col))
                i += len(kw)
                col += len(kw)
                break
        else:
            m = _NUMBER.match(text, i) or None
            kind = "num"
            if m is None:
                m = _IDENT.match(text, i)
                kind = "ident"
            if m is None:
                m = _STRING.match(text, i)
                kind = "str"
            if m is not None:
                toks.append(Token(kind, m.group(0), line, col))
                col += len(m.group(0))
                i = m.end()
                continue
            for sym in _SYMBOLS:
                if text.startswith(sym, i):
                    toks.append(Token("sym", sym, line, col))
                    i += len(sym)
                    col += len(sym)
                    break
            else:
                raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


# ---------------------------------------------------------------- type inference for annotations


class _Meta(Type):
    _count = 0

    def __init__(self):
        _Meta._count += 1
        self.id = _Meta._count
        self.ref = None

    def __str__(self):
        return f"?{self.id}"

    def __eq__(self, other):
        return self is other

    def __hash__(self):
        return id(self)


def _prune(t):
    while isinstance(t, _Meta) and t.ref is not None:
        t = t.ref
    return t


def _occurs(m, t):
    t = _prune(t)
    if t is m:
        return True
    return isinstance(t, Arrow) and (_occurs(m, t.domain) or _occurs(m, t.codomain))


def _unify(a, b, where):
    a, b = _prune(a), _prune(b)
    if a is b:
        return
    if isinstance(a, _Meta):
        if _occurs(a, b):
            raise ParseError(f"infinite type at {where}")
        a.ref = b
        return
    if isinstance(b, _Meta):
        _unify(b, a, where)
        return
    if isinstance(a, Arrow) and isinstance(b, Arrow):
        _unify(a.domain, b.domain, where)
        _unify(a.codomain, b.codomain, where)
        return
    if type(a) is not type(b):
        raise ParseError(f"type error in {where}: cannot match {_zonk(a)} with {_zonk(b)}")


def _zonk(t):
    t = _prune(t)
    if isinstance(t, _Meta):
        return UNIT
    if isinstance(t, Arrow):
        return Arrow(_zonk(t.domain), _zonk(t.codomain))
    return t


def _infer(env, t, sig, metas):
    if isinstance(t, Var):
        if t.name not in env:
            raise ParseError(f"unbound variable {t.name!r}")
        return env[t.name]
    if isinstance(t, Star):
        return UNIT
    if isinstance(t, Zero):
        return NAT
    if isinstance(t, Succ):
        _unify(_infer(env, t.pred, sig, metas), NAT, "S(...)")
        return NAT
    if isinstance(t, Lam):
        return Arrow(t.ty, _infer({**env, t.var: t.ty}, t.body, sig, metas))
    if isinstance(t, Return):
        return _infer(env, t.value, sig, metas)
    if isinstance(t, App):
        f = _infer(env, t.fn, sig, metas)
        a = _infer(env, t.arg, sig, metas)
        r = _Meta()
        _unify(f, Arrow(a, r), f"application {t}")
        return r
    if isinstance(t, Let):
        rho = _infer(env, t.bound, sig, metas)
        return _infer({**env, t.var: rho}, t.body, sig, metas)
    if isinstance(t, Fix):
        f = _infer(env, t.fn, sig, metas)
        a, b = _Meta(), _Meta()
        _unify(f, Arrow(Arrow(a, b), Arrow(a, b)), "fix")
        return Arrow(a, b)
    if isinstance(t, Case):
        _unify(_infer(env, t.scrutinee, sig, metas), NAT, "case scrutinee")
        z = _infer(env, t.zero, sig, metas)
        s = _infer({**env, t.var: NAT}, t.succ, sig, metas)
        _unify(z, s, "case branches")
        return z
    if isinstance(t, Diverge):
        if t.ty is not None:
            return t.ty
        m = _Meta()
        metas[id(t)] = m
        return m
    if isinstance(t, Op):
        form = sig[t.name]
        if t.param is not None:
            _unify(_infer(env, t.param, sig, metas), NAT, f"{t.name} parameter")
        if form.infinite:
            c = _infer(env, t.cont, sig, metas)
            r = _Meta()
            _unify(c, Arrow(NAT, r), f"{t.name} continuation")
            return r
        if not t.args:
            if t.ty is not None:
                return t.ty
            m = _Meta()
            metas[id(t)] = m
            return m
        tys = [_infer(env, a, sig, metas) for a in t.args]
        for other in tys[1:]:
            _unify(tys[0], other, f"{t.name} branches")
        return tys[0]
    raise TypeError(f"not a term {t!r}")


def _rebuild(t, metas):
    if isinstance(t, Succ):
        return Succ(_rebuild(t.pred, metas))
    if isinstance(t, Lam):
        return Lam(t.var, t.ty, _rebuild(t.body, metas))
    if isinstance(t, Return):
        return Return(_rebuild(t.value, metas))
    if isinstance(t, App):
        return App(_rebuild(t.fn, metas), _rebuild(t.arg, metas))
    if isinstance(t, Let):
        return Let(_rebuild(t.bound, metas), t.var, _rebuild(t.body, metas))
    if isinstance(t, Fix):
        return Fix(_rebuild(t.fn, metas))
    if isinstance(t, Case):
        return Case(_rebuild(t.scrutinee, metas), _rebuild(t.zero, metas), t.var, _rebuild(t.succ, metas))
    if isinstance(t, Diverge):
        return Diverge(_zonk(metas[id(t)])) if id(t) in metas else t
    if isinstance(t, Op):
        ty = _zonk(metas[id(t)]) if id(t) in metas else t.ty
        return Op(
            t.name,
            None if t.param is None else _rebuild(t.param, metas),
            tuple(_rebuild(a, metas) for a in t.args),
            None if t.cont is None else _rebuild(t.cont, metas),
            ty,
        )
    return t


def elaborate(t, sig, expected: Type | None = None):
    """Fill in missing ``diverge`` and nullary-operation types, then typecheck."""
    metas = {}
    ty = _infer({}, t, sig, metas)
    if expected is not None:
        _unify(ty, expected, "definition")
    out = _rebuild(t, metas)
    return out, typecheck({}, out, sig)


# ---------------------------------------------------------------- parser

_OP_PATTERN = re.compile(r"(or|por|read|write|raise_\w+|lookup_\w+|update_\w+)$")
_FORMULA_START = {"top", "bot", "and", "or", "not", "down", "err", "dia", "box", "P", "st", "io.done", "io.pref"}
_KEYWORDS = {"fun", "return", "let", "in", "fix", "case", "of", "diverge", "omega", "Z", "S"}


class Parser:
    def __init__(self, tokens, program: "SourceProgram"):
        self.toks = tokens
        self.i = 0
        self.program = program

    # token helpers ---------------------------------------------------

    @property
    def tok(self):
        return self.toks[self.i]

    def peek(self, k=1):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def at(self, *texts):
        return self.tok.kind in ("sym", "ident") and self.tok.text in texts

    def eat(self, text):
        if not self.at(text):
            shown = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {shown!r}")
        tok = self.tok
        self.i += 1
        return tok

    def ident(self):
        if self.tok.kind != "ident":
            raise self.error(f"expected a name, found {self.tok.text or 'end of input'!r}")
        tok = self.tok
        self.i += 1
        return tok.text

    def number(self):
        if self.tok.kind != "num":
            raise self.error(f"expected a number, found {self.tok.text or 'end of input'!r}")
        tok = self.tok
        self.i += 1
        return int(tok.text)

    def expect_end(self):
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")

    # types -----------------------------------------------------------

    def type_(self) -> Type:
        left = self.type_atom()
        if self.at("->"):
            self.eat("->")
            return Arrow(left, self.type_())
        return left

    def type_atom(self) -> Type:
        if self.tok.kind == "num" and self.tok.text == "1":
            self.i += 1
            return UNIT
        if self.at("N"):
            self.i += 1
            return NAT
        if self.at("("):
            self.eat("(")
            t = self.type_()
            self.eat(")")
            return t
        raise self.error(f"expected a type, found {self.tok.text!r}")

    # terms -----------------------------------------------------------

    def term(self, bound=frozenset()):
        if self.at("fun", "\\"):
            self.i += 1
            x = self.ident()
            self.eat(":")
            ty = self.type_()
            self.eat(".")
            return Lam(x, ty, self.computation(bound | {x}))
        if self.at("return"):
            self.eat("return")
            return Return(self.value(bound))
        if self.at("let"):
            self.eat("let")
            m = self.computation(bound)
            self.eat("=>")
            x = self.ident()
            self.eat("in")
            return Let(m, x, self.computation(bound | {x}))
        if self.at("case"):
            self.eat("case")
            v = self.value(bound)
            self.eat("of")
            self.eat("{")
            self.eat("Z")
            self.eat("=>")
            z = self.computation(bound)
            self.eat(";")
            self.eat("S")
            self.eat("(")
            x = self.ident()
            self.eat(")")
            self.eat("=>")
            s = self.computation(bound | {x})
            self.eat("}")
            return Case(v, z, x, s)
        head = self.atom(bound)
        if self._starts_atom():
            start = self.tok
            arg = self.atom(bound)
            self._need_value(head, start)
            self._need_value(arg, start)
            return App(head, arg)
        return head

    def _starts_atom(self):
        t = self.tok
        if t.kind == "num":
            return True
        if t.kind == "ident":
            return t.text not in ("in", "of") and t.text not in _FORMULA_START - {"or"} or t.text == "or"
        return t.kind == "sym" and t.text in ("(", "*")

    def value(self, bound):
        start = self.tok
        t = self.term(bound)
        self._need_value(t, start)
        return t

    def computation(self, bound):
        start = self.tok
        t = self.term(bound)
        if isinstance(t, Value):
            raise ParseError(f"expected a computation, found value {t}", start.line, start.col)
        return t

    def _need_value(self, t, tok):
        if not isinstance(t, Value):
            raise ParseError(f"expected a value, found computation {t}", tok.line, tok.col)

    def atom(self, bound):
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return numeral(int(tok.text))
        if self.at("*"):
            self.i += 1
            return STAR
        if self.at("("):
            self.eat("(")
            t = self.term(bound)
            self.eat(")")
            return t
        if tok.kind != "ident":
            raise self.error(f"unexpected {tok.text or 'end of input'!r}")
        name = tok.text
        if name == "Z":
            self.i += 1
            return ZERO
        if name == "S":
            self.i += 1
            self.eat("(")
            v = self.value(bound)
            self.eat(")")
            return Succ(v)
        if name == "fix":
            self.i += 1
            self.eat("(")
            v = self.value(bound)
            self.eat(")")
            return Fix(v)
        if name in ("diverge", "omega"):
            self.i += 1
            ty = None
            if self.at("["):
                self.eat("[")
                ty = self.type_()
                self.eat("]")
            return Diverge(ty)
        if name in _KEYWORDS:
            raise self.error(f"unexpected keyword {name!r}")
        sig = self.program.theory.signature
        nxt = self.peek()
        if name not in bound and (nxt.text in ("(", "[")) and nxt.kind == "sym":
            if name in sig:
                return self.operation(bound)
            if _OP_PATTERN.match(name) and name not in self.program.names():
                raise TheoryMismatch(
                    f"operation {name!r} is not available in theory {self.program.theory.key}",
                    tok.line,
                    tok.col,
                )
        self.i += 1
        if name in bound:
            return Var(name)
        return self.program.resolve(name, tok)

    def operation(self, bound):
        tok = self.tok
        name = self.ident()
        form = self.program.theory.signature[name]
        ty = None
        if self.at("["):
            self.eat("[")
            ty = self.type_()
            self.eat("]")
        self.eat("(")
        param = None
        if form.param:
            param = self.value(bound)
            self.eat(";")
        if form.infinite:
            cont = self.value(bound)
            self.eat(")")
            return Op(name, param, (), cont)
        args = []
        if not self.at(")"):
            args.append(self.computation(bound))
            while self.at(","):
                self.eat(",")
                args.append(self.computation(bound))
        self.eat(")")
        if len(args) != form.n:
            raise ParseError(f"{name} takes {form.n} argument(s), got {len(args)}", tok.line, tok.col)
        return Op(name, param, tuple(args), None, ty if form.n == 0 else None)

    # formulas --------------------------------------------------------

    def formula(self) -> Formula:
        tok = self.tok
        if self.at("top"):
            self.i += 1
            return TOP
        if self.at("bot"):
            self.i += 1
            return BOT
        if self.at("and", "or") and self.peek().text == "(":
            ctor = And if tok.text == "and" else Or
            self.i += 1
            self.eat("(")
            items = [self.formula()]
            while self.at(","):
                self.eat(",")
                items.append(self.formula())
            self.eat(")")
            return ctor(tuple(items))
        if self.at("not"):
            self.i += 1
            return Not(self.formula())
        if self.at("{"):
            return self.natset()
        if self.at("["):
            self.eat("[")
            if self.tok.text in _FORMULA_START or self.at("{", "["):
                pre = self.formula()
                self.eat("=>")
                body = self.formula()
                self.eat("]")
                return PureMaps(pre, body)
            v = self.value(frozenset())
            self.eat("|->")
            body = self.formula()
            self.eat("]")
            v, _ = elaborate(v, self.program.theory.signature)
            return Maps(v, body)
        o = self.modality()
        if o is None:
            if tok.kind == "ident" and tok.text in self.program.formulas:
                self.i += 1
                return self.program.formulas[tok.text]
            raise self.error(f"expected a formula, found {tok.text or 'end of input'!r}")
        if self.tok.kind == "eof" or self.at(",", ")", "]", "=>"):
            return Modal(o, TOP)
        return Modal(o, self.formula())

    def natset(self) -> NatIs:
        self.eat("{")
        if self.at(">="):
            self.eat(">=")
            k = self.number()
            self.eat("}")
            return NatIs(frozenset(range(k)), cofinite=True)
        cofinite = False
        if self.at("~"):
            self.eat("~")
            cofinite = True
        vals = []
        if not self.at("}"):
            vals.append(self.number())
            while self.at(","):
                self.eat(",")
                vals.append(self.number())
        self.eat("}")
        return NatIs(frozenset(vals), cofinite)

    def modality(self):
        tok = self.tok
        if tok.kind != "ident":
            return None
        name = tok.text
        if name == "down":
            self.i += 1
            return Down()
        if name == "dia":
            self.i += 1
            return Dia()
        if name == "box":
            self.i += 1
            return Box()
        if name == "err":
            self.i += 1
            self.eat("(")
            label = self.ident()
            self.eat(")")
            return Err(label)
        if name == "P":
            self.i += 1
            self.eat(">")
            num = self.number()
            den = 1
            if self.at("/"):
                self.eat("/")
                den = self.number()
            return ProbGt(Fraction(num, den))
        if name == "st":
            self.i += 1
            pre = self.state()
            self.eat("->")
            return Store(pre, self.state())
        if name in ("io.done", "io.pref"):
            self.i += 1
            if self.tok.kind != "str":
                raise self.error("expected a quoted trace")
            w = parse_trace(self.tok.text[1:-1], self.tok)
            self.i += 1
            return IoDone(w) if name == "io.done" else IoPref(w)
        return None

    def state(self) -> State:
        self.eat("{")
        items = {}
        while not self.at("}"):
            loc = self.ident()
            self.eat(":")
            items[loc] = self.number()
            if self.at(","):
                self.eat(",")
        self.eat("}")
        return State.of(items)


def parse_trace(text, tok=None) -> tuple:
    out = []
    pos = 0
    for m in re.finditer(r"([?!])([0-9]+)", text):
        if m.start() != pos:
            break
        out.append((m.group(1), int(m.group(2))))
        pos = m.end()
    if pos != len(text):
        line, col = (tok.line, tok.col) if tok else (None, None)
        raise ParseError(f"bad i/o trace {text!r}", line, col)
    return tuple(out)


# ---------------------------------------------------------------- programs


@dataclass
class Definition:
    name: str
    term: object
    type: Type


@dataclass
class SourceProgram:
    theory: EffectTheory
    definitions: dict = field(default_factory=dict)
    universes: dict = field(default_factory=dict)
    formulas: dict = field(default_factory=dict)
    prelude: dict = field(default_factory=dict)
    _resolving: set = field(default_factory=set)

    def names(self):
        return set(self.definitions) | set(self.prelude)

    def resolve(self, name, tok=None):
        if name in self.definitions:
            return self.definitions[name].term
        if name in self.prelude:
            if name in self._resolving:
                raise ParseError(f"definition {name!r} refers to itself")
            self._resolving.add(name)
            try:
                text, line = self.prelude[name]
                _parse_def(self, text, line)
            finally:
                self._resolving.discard(name)
            return self.definitions[name].term
        line, col = (tok.line, tok.col) if tok else (None, None)
        raise ParseError(f"unknown name {name!r}", line, col)

    def term(self, name_or_text: str):
        """A definition by name if it exists, otherwise parse the text as a term."""
        if name_or_text in self.definitions or name_or_text in self.prelude:
            return self.resolve(name_or_text)
        return parse_term(name_or_text, self)


_ITEM_KEYWORDS = ("theory", "def", "universe", "formula")


def _split_items(text):
    items = []
    cur, start = [], 1
    for n, line in enumerate(text.splitlines(), 1):
        word = line.split("#", 1)[0].split(maxsplit=1)
        if line[:1].strip() and word and word[0] in _ITEM_KEYWORDS:
            if cur:
                items.append(("\n".join(cur), start))
            cur, start = [line], n
        elif cur:
            cur.append(line)
        elif line.split("#", 1)[0].strip():
            raise ParseError("text before the first item", n, 1)
    if cur:
        items.append(("\n".join(cur), start))
    return items


def _parse_theory(text, line):
    toks = tokenize(text, line)
    p = Parser(toks, None)
    p.eat("theory")
    key = p.ident()
    opts = {}
    if key == "store":
        locs = []
        while p.tok.kind == "ident" and p.tok.text != "bound":
            locs.append(p.ident())
        if p.at("bound"):
            p.eat("bound")
            opts["bound"] = p.number()
        opts["locations"] = tuple(locs) or ("l",)
    elif key == "error":
        labels = []
        while p.tok.kind == "ident":
            labels.append(p.ident())
        opts["labels"] = tuple(labels) or ("e",)
    p.expect_end()
    try:
        return get_theory(key, **opts)
    except ValueError as e:
        raise ParseError(str(e), line, 1) from None


def _parse_def(program, text, line):
    p = Parser(tokenize(text, line), program)
    p.eat("def")
    tok = p.tok
    name = p.ident()
    if name in program.definitions:
        raise ParseError(f"duplicate definition {name!r}", tok.line, tok.col)
    ascribed = None
    if p.at(":"):
        p.eat(":")
        ascribed = p.type_()
    p.eat("=")
    t = p.term()
    p.expect_end()
    try:
        t, ty = elaborate(t, program.theory.signature, ascribed)
    except ParseError as e:
        raise ParseError(f"in {name}: {e.message}", tok.line, tok.col) from None
    except EfxError as e:
        raise ParseError(f"in {name}: {e}", tok.line, tok.col) from None
    program.definitions[name] = Definition(name, t, ty)


def _parse_universe(program, text, line):
    p = Parser(tokenize(text, line), program)
    p.eat("universe")
    name = p.ident()
    p.eat("=")
    terms = [p.term()]
    while p.at(","):
        p.eat(",")
        terms.append(p.term())
    p.expect_end()
    program.universes[name] = [elaborate(t, program.theory.signature)[0] for t in terms]


def _parse_formula_item(program, text, line):
    p = Parser(tokenize(text, line), program)
    p.eat("formula")
    name = p.ident()
    p.eat("=")
    f = p.formula()
    p.expect_end()
    program.formulas[name] = f


def prelude_source() -> str:
    return resources.files("efx").joinpath("programs/prelude.efx").read_text()


def _prelude_index():
    """Prelude definition texts by name, parsed lazily under the user's theory."""
    out = {}
    for text, line in _split_items(prelude_source()):
        toks = tokenize(text, line)
        if toks[0].text == "def":
            out[toks[1].text] = (text, line)
    return out


def parse_program(text: str, use_prelude: bool = True) -> SourceProgram:
    items = _split_items(text)
    if not items or not items[0][0].lstrip().startswith("theory"):
        theory = get_theory("pure")
    else:
        theory = _parse_theory(*items[0])
        items = items[1:]
    program = SourceProgram(theory, prelude=_prelude_index() if use_prelude else {})
    for body, line in items:
        kw = body.split(maxsplit=1)[0]
        if kw == "theory":
            raise ParseError("only one theory header is allowed", line, 1)
        if kw == "def":
            _parse_def(program, body, line)
        elif kw == "universe":
            _parse_universe(program, body, line)
        else:
            _parse_formula_item(program, body, line)
    return program


def parse_term(text: str, program: SourceProgram | None = None):
    program = program or parse_program("theory pure", use_prelude=True)
    p = Parser(tokenize(text), program)
    t = p.term()
    p.expect_end()
    return elaborate(t, program.theory.signature)[0]


def parse_formula(text: str, program: SourceProgram | None = None) -> Formula:
    program = program or parse_program("theory pure")
    p = Parser(tokenize(text), program)
    f = p.formula()
    p.expect_end()
    return f


def parse_type(text: str) -> Type:
    p = Parser(tokenize(text), None)
    t = p.type_()
    p.expect_end()
    return t
