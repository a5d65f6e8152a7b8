"""Exception types shared across the toolkit.

Every error carries a ``category`` string; the CLI prints it as
``error[<category>]: <message>``.
"""


class HwFuzzError(Exception):
    kind = "error"

    def __init__(self, category, message, line=None, col=None):
        self.category = category
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class ParseError(HwFuzzError):
    """Raised by the Verilog front end. ``expected`` lists acceptable tokens."""

    def __init__(self, category, message, line=None, col=None, expected=()):
        super().__init__(category, message, line, col)
        self.expected = frozenset(expected)


class SpecError(HwFuzzError):
    pass


class ElaborationError(HwFuzzError):
    pass


class ConfigError(HwFuzzError):
    pass


class GenError(HwFuzzError):
    pass


class MergeError(HwFuzzError):
    pass


class SimTrap(HwFuzzError):
    """Runtime trap inside the simulated design (division by zero, bad select)."""

    def __init__(self, category, message, span=None, cycle=None):
        line, col = span if span else (None, None)
        super().__init__(category, message, line, col)
        self.span = span
        self.cycle = cycle
