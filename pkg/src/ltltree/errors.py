"""Exception types shared across the package."""


class PlannerError(Exception):
    """Base class for all errors raised by ltltree."""


class LtlSyntaxError(PlannerError):
    """Malformed formula text.

    ``offset`` is a byte offset into the UTF-8 encoded input and ``expected``
    the set of token kinds that would have been accepted there.
    """

    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = frozenset(expected)
        exp = ", ".join(sorted(self.expected))
        detail = f" (expected one of: {exp})" if exp else ""
        super().__init__(f"{message} at byte {offset}{detail}")


class UnknownOperator(LtlSyntaxError):
    pass


class FormatError(PlannerError):
    """Malformed automaton or model file."""

    def __init__(self, message, line=None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class UnknownAtom(PlannerError):
    pass


class CapacityExceeded(PlannerError):
    def __init__(self, count, limit):
        self.count = count
        self.limit = limit
        super().__init__(f"state count {count} exceeds limit {limit}")


class BudgetExceeded(PlannerError):
    def __init__(self, expansions):
        self.expansions = expansions
        super().__init__(f"search stopped after {expansions} expansions")


class NegativeWeight(FormatError):
    pass


class DanglingEdge(FormatError):
    pass


class MissingInitial(FormatError):
    pass


class InvalidTransition(PlannerError):
    pass


class DuplicateNode(PlannerError):
    pass
