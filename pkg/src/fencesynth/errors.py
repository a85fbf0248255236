"""Exception types shared across the toolkit."""


class LitmusError(Exception):
    """Malformed input program: syntax error or a violated static invariant."""

    def __init__(self, message, line=None):
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
        self.line = line


class ResourceLimitError(Exception):
    """A configured limit (traces, cycles, wall clock, iterations) was hit.

    Reported distinctly from "no traces" / "no fix": the analysis did not
    finish, so nothing can be concluded about the program.
    """

    def __init__(self, phase, detail=""):
        message = "resource limit exceeded during %s" % phase
        if detail:
            message += " (%s)" % detail
        super().__init__(message)
        self.phase = phase
        self.detail = detail


class InternalCheckError(Exception):
    """An internal consistency check failed (a bug in the tool, not the input)."""
