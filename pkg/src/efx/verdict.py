"""Kleene three-valued verdicts."""

from __future__ import annotations

from enum import Enum


class Verdict(Enum):
    FALSE = 0
    TRUE = 1
    UNKNOWN = 2

    @staticmethod
    def of(b) -> "Verdict":
        if isinstance(b, Verdict):
            return b
        return Verdict.TRUE if b else Verdict.FALSE

    @property
    def definite(self) -> bool:
        return self is not Verdict.UNKNOWN

    def __and__(self, other):
        other = Verdict.of(other)
        if self is Verdict.FALSE or other is Verdict.FALSE:
            return Verdict.FALSE
        if self is Verdict.TRUE and other is Verdict.TRUE:
            return Verdict.TRUE
        return Verdict.UNKNOWN

    def __or__(self, other):
        other = Verdict.of(other)
        if self is Verdict.TRUE or other is Verdict.TRUE:
            return Verdict.TRUE
        if self is Verdict.FALSE and other is Verdict.FALSE:
            return Verdict.FALSE
        return Verdict.UNKNOWN

    __rand__ = __and__
    __ror__ = __or__

    def __invert__(self):
        if self is Verdict.UNKNOWN:
            return self
        return Verdict.FALSE if self is Verdict.TRUE else Verdict.TRUE

    def implies(self, other):
        return ~self | other

    def __bool__(self):
        # Truthiness of an Unknown is exactly the bug this type exists to stop.
        raise TypeError("Verdict has no truth value; compare with Verdict.TRUE")

    @staticmethod
    def all(items) -> "Verdict":
        acc = Verdict.TRUE
        for v in items:
            acc = acc & v
            if acc is Verdict.FALSE:
                return acc
        return acc

    @staticmethod
    def any(items) -> "Verdict":
        acc = Verdict.FALSE
        for v in items:
            acc = acc | v
            if acc is Verdict.TRUE:
                return acc
        return acc

    def __str__(self):
        return {0: "False", 1: "True", 2: "Unknown"}[self.value]


TRUE = Verdict.TRUE
FALSE = Verdict.FALSE
UNKNOWN = Verdict.UNKNOWN
