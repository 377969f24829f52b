"""
Error Definitions

Every error raised by the parabolic package derives from ParabolicError, so
that the command-line layer can map failures onto exit codes.
"""

__all__ = [
    'ParabolicError',
    'PreconditionError',
]


class ParabolicError(Exception):
    """
    Base class of all errors raised by this package
    """


class PreconditionError(ParabolicError):
    """
    The map does not satisfy the hypotheses a command requires (critical
    points on the Julia set, no rationally indifferent cycle within scope)
    """
