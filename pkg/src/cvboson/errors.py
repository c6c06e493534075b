"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so guard violations and
invariant failures must stay distinguishable from ordinary usage errors.
"""


class InvalidPatternError(ValueError):
    """An occupation or click pattern violates its contract."""


class GuardLimitError(ValueError):
    """A size guard was exceeded (problem too large for exact desk-scale evaluation)."""


class InvariantViolation(RuntimeError):
    """A mathematical invariant that should hold by construction failed numerically."""
