"""Exception types shared across the package."""


class KsatError(Exception):
    """Base class for all package errors."""


class InvalidParameters(KsatError, ValueError):
    """An operation was called with out-of-range or inconsistent parameters."""


class InvalidAssignment(KsatError, ValueError):
    """An assignment is incompatible with the formula (wrong length or values)."""


class UnsupportedFormula(KsatError, ValueError):
    """The formula is outside the supported model (e.g. mixed clause widths)."""


class DimacsParseError(KsatError, ValueError):
    """Malformed DIMACS CNF input."""


class InstanceTooLarge(KsatError, ValueError):
    """The instance exceeds the hard cap of the exhaustive oracle."""


class UndefinedConditional(KsatError, ValueError):
    """A conditional Gibbs quantity was requested on an empty event
    (at infinite inverse temperature with no satisfying extension)."""
