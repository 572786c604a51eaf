"""Exception hierarchy shared by every module."""


class EfxError(Exception):
    pass


class UnboundVariable(EfxError):
    pass


class TypeMismatch(EfxError):
    pass


class ArityMismatch(EfxError):
    pass


class AspectError(EfxError):
    """A value was expected where a computation was given, or vice versa."""


class StuckState(EfxError):
    """The machine reached a configuration no rule applies to.

    Closed well-typed terms never get here, so seeing this means the input
    was ill-formed or the evaluator has a bug.
    """


class SignatureMismatch(EfxError):
    pass


class ValueBoundExceeded(EfxError):
    pass


class PolarityViolation(EfxError):
    pass


class ExplosionGuard(EfxError):
    pass


class CarrierMismatch(EfxError):
    pass


class BoundsTooSmall(EfxError):
    pass


class PreconditionViolation(EfxError):
    pass


class ParseError(EfxError):
    def __init__(self, message, line=None, col=None):
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(where + message)


class TheoryMismatch(ParseError):
    pass
