"""Exception hierarchy shared by the market, HE and protocol layers."""


class PfetError(Exception):
    pass


class InputError(PfetError, ValueError):
    """Shape or domain violation in an argument."""


class SimplexDriftError(PfetError, ArithmeticError):
    pass


class NonConvergence(PfetError, RuntimeError):
    """Iteration cap reached. The partial trace is kept on ``.trace``."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class KeyMismatch(PfetError):
    pass


class DepthExhausted(PfetError):
    pass


class EmptyInput(PfetError, ValueError):
    pass


class FixedPointOverflow(PfetError, OverflowError):
    pass


class DecryptionError(PfetError):
    pass


class ProtocolError(PfetError):
    """Provider failure inside the protocol, tagged with the protocol block."""

    def __init__(self, block, cause):
        super().__init__(f"block {block}: {cause!r}")
        self.block = block
        self.cause = cause


class ParseError(PfetError):
    def __init__(self, message, line=None, field=None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field is not None:
            loc.append(f"field {field}")
        super().__init__(f"{message} ({', '.join(loc)})" if loc else message)
        self.line = line
        self.field = field


class ValidationError(PfetError, ValueError):
    """Carries every violated invariant as ``(field_path, message)`` pairs."""

    def __init__(self, problems):
        self.problems = list(problems)
        lines = "\n".join(f"  {path}: {msg}" for path, msg in self.problems)
        super().__init__(f"{len(self.problems)} invalid field(s):\n{lines}")
