"""Exception hierarchy shared by all setkr modules."""


class SetKRError(Exception):
    """Base class for every error raised by setkr."""


class NonSetOperand(SetKRError, TypeError):
    pass


class SizeLimitExceeded(SetKRError):
    pass


class MissingExtent(SetKRError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class UnboundName(SetKRError, NameError):
    pass


class PartialOperator(SetKRError):
    """An operator was applied to a tuple outside its table and no
    definition or built-in covers it."""


class UndefinedOperatorApplication(PartialOperator):
    pass


class DuplicateDefinition(SetKRError):
    pass


class RecursiveDefinition(SetKRError):
    def __init__(self, message, cycle=()):
        super().__init__(message)
        self.cycle = tuple(cycle)


class BodyMentionsForeignConcept(SetKRError):
    pass


class FragmentViolation(SetKRError):
    pass


class UndeclaredRole(SetKRError):
    pass


class ParseError(SetKRError):
    """Raised by the parsers; carries every collected diagnostic."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        first = self.diagnostics[0] if self.diagnostics else None
        super().__init__(str(first) if first else "parse error")
