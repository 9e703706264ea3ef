"""Exception types for groenewold_lab.

Every failure mode that callers are expected to handle has its own class so
the CLI can map them onto distinct exit codes.
"""


class GroenewoldLabError(Exception):
    """Base class for all groenewold_lab errors."""


class ConfigError(GroenewoldLabError):
    """Experiment configuration is malformed.

    Raised for unknown keys, missing required keys, type mismatches, or
    out-of-range values. The message carries the dotted path of the
    offending key so the CLI can report it precisely.
    """


class ValidationFailed(GroenewoldLabError):
    """A structural self-check (residual) exceeded its tolerance."""


class TailMassExceeded(GroenewoldLabError):
    """Truncated state carries too much weight near the basis edge.

    The occupation of the last few number states exceeds the configured
    tail tolerance, so results at this truncation are untrustworthy.
    """


class GuardInsufficient(GroenewoldLabError):
    """Operator construction did not converge in the guard band.

    Growing the construction padding changed the interior matrix elements
    by more than the stability tolerance, so the requested truncation
    cannot be certified.
    """


class QuadratureNotConverged(GroenewoldLabError):
    """A numerical integral failed its refinement convergence check."""
