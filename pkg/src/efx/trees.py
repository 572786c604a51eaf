"""Finite effect trees, their order, the tree monad, and the debug dump.

Two bottoms are kept apart: ``CUT`` marks where evaluation ran out of fuel
(or an infinite-arity node was not materialised) and ``DIV`` marks certified
divergence. Consumers treat ``CUT`` as "no information" and ``DIV`` as the
definite bottom of the full tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .verdict import Verdict


class Tree:
    pass


@dataclass(frozen=True)
class _Cut(Tree):
    def __repr__(self):
        return "CUT"


@dataclass(frozen=True)
class _Div(Tree):
    def __repr__(self):
        return "DIV"


CUT = _Cut()
DIV = _Div()


@dataclass(frozen=True)
class Leaf(Tree):
    value: object


@dataclass(frozen=True)
class Node(Tree):
    """An operation node.

    For infinite-arity operations ``children`` holds the materialised prefix
    and every index past it reads as ``CUT``.
    """

    op: str
    children: tuple = ()
    param: int | None = None
    infinite: bool = False

    def child(self, i: int) -> Tree:
        if i < len(self.children):
            return self.children[i]
        if self.infinite:
            return CUT
        raise IndexError(f"{self.op} has {len(self.children)} children")


def is_bottom(t) -> bool:
    return t is CUT or t is DIV


# ---------------------------------------------------------------- structural helpers


def tree_leq(t1: Tree, t2: Tree) -> bool:
    """``t1`` arises from ``t2`` by cutting subtrees; DIV is only below DIV."""
    if t1 is CUT:
        return True
    if t1 is DIV or t2 is DIV:
        return t1 is t2
    if isinstance(t1, Leaf):
        return isinstance(t2, Leaf) and t1.value == t2.value
    if not isinstance(t2, Node):
        return False
    if (t1.op, t1.param, t1.infinite) != (t2.op, t2.param, t2.infinite):
        return False
    if not t1.infinite and len(t1.children) != len(t2.children):
        return False
    width = max(len(t1.children), len(t2.children))
    return all(tree_leq(t1.child(i), t2.child(i)) for i in range(width))


def tmap(t: Tree, f: Callable) -> Tree:
    """Functorial action: apply ``f`` to every leaf payload."""
    if isinstance(t, Leaf):
        return Leaf(f(t.value))
    if isinstance(t, Node):
        return Node(t.op, tuple(tmap(c, f) for c in t.children), t.param, t.infinite)
    return t


def mu_flatten(r: Tree) -> Tree:
    """Monad multiplication: graft each payload tree in place of its leaf."""
    if isinstance(r, Leaf):
        if not isinstance(r.value, Tree):
            raise TypeError("mu_flatten needs a tree whose payloads are trees")
        return r.value
    if isinstance(r, Node):
        return Node(r.op, tuple(mu_flatten(c) for c in r.children), r.param, r.infinite)
    return r


def eta(x) -> Tree:
    return Leaf(x)


def bind(t: Tree, f: Callable) -> Tree:
    return mu_flatten(tmap(t, f))


def restrict(t: Tree, pred: Callable) -> Tree:
    """Unit tree marking which leaves satisfy ``pred``.

    Passing leaves become ``Leaf(*)``, failing leaves ``DIV`` and leaves with
    an Unknown verdict ``CUT``. ``pred`` may return a bool or a Verdict.
    """
    from .syntax import STAR

    def go(s):
        if isinstance(s, Leaf):
            v = pred(s.value)
            if v is True or v is Verdict.TRUE:
                return UNIT_LEAF
            if v is False or v is Verdict.FALSE:
                return DIV
            if v is Verdict.UNKNOWN:
                return CUT
            raise TypeError(f"predicate returned {v!r}")
        if isinstance(s, Node):
            return Node(s.op, tuple(go(c) for c in s.children), s.param, s.infinite)
        return s

    UNIT_LEAF = Leaf(STAR)
    return go(t)


def payloads(t: Tree) -> list:
    """Distinct leaf payloads in first-occurrence order."""
    seen = {}

    def go(s):
        if isinstance(s, Leaf):
            seen.setdefault(s.value, None)
        elif isinstance(s, Node):
            for c in s.children:
                go(c)

    go(t)
    return list(seen)


def has_cut(t: Tree) -> bool:
    if t is CUT:
        return True
    if isinstance(t, Node):
        return t.infinite or any(has_cut(c) for c in t.children)
    return False


def count_cuts(t: Tree) -> int:
    """Number of explicit ``CUT`` subtrees (implicit infinite-arity tails excluded)."""
    if t is CUT:
        return 1
    if isinstance(t, Node):
        return sum(count_cuts(c) for c in t.children)
    return 0


def size(t: Tree) -> int:
    if isinstance(t, Node):
        return 1 + sum(size(c) for c in t.children)
    return 1


def depth(t: Tree) -> int:
    if isinstance(t, Node) and t.children:
        return 1 + max(depth(c) for c in t.children)
    return 0


def truncate(t: Tree, d: int) -> Tree:
    """Replace every subtree at depth ``d`` by ``CUT``."""
    if d <= 0:
        return CUT
    if isinstance(t, Node):
        return Node(t.op, tuple(truncate(c, d - 1) for c in t.children), t.param, t.infinite)
    return t


def ops_used(t: Tree) -> set:
    out = set()

    def go(s):
        if isinstance(s, Node):
            out.add(s.op)
            for c in s.children:
                go(c)

    go(t)
    return out


# ---------------------------------------------------------------- dump


def dump(t: Tree, show: Callable = str) -> str:
    """Indented text, one node per line.

    ``op`` or ``op[k]`` for nodes (k the nat parameter), ``leaf <payload>``,
    ``cut`` and ``div``. Children of infinite-arity nodes are prefixed with
    their index and followed by a ``...`` line for the omitted tail.
    """
    lines = []

    def go(s, indent, prefix):
        pad = "  " * indent + prefix
        if s is CUT:
            lines.append(pad + "cut")
        elif s is DIV:
            lines.append(pad + "div")
        elif isinstance(s, Leaf):
            lines.append(pad + "leaf " + (dump_inline(s.value, show)))
        else:
            head = s.op if s.param is None else f"{s.op}[{s.param}]"
            lines.append(pad + head)
            for i, c in enumerate(s.children):
                go(c, indent + 1, f"{i}: " if s.infinite else "")
            if s.infinite:
                lines.append("  " * (indent + 1) + "...")

    go(t, 0, "")
    return "\n".join(lines) + "\n"


def dump_inline(x, show: Callable = str) -> str:
    """One-line rendering, used for payloads that are themselves trees."""
    if x is CUT:
        return "cut"
    if x is DIV:
        return "div"
    if isinstance(x, Leaf):
        return f"leaf({dump_inline(x.value, show)})"
    if isinstance(x, Node):
        head = x.op if x.param is None else f"{x.op}[{x.param}]"
        kids = ", ".join(dump_inline(c, show) for c in x.children)
        tail = ", ..." if x.infinite else ""
        return f"{head}({kids}{tail})"
    return show(x)
