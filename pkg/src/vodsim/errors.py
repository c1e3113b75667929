"""Exception types shared across the package.

Plain ``ValueError`` is used for bad arguments to library functions; the
classes here mark conditions that callers handle differently: broken user
configuration, metrics with no defined value, and states that can only be
reached through a bug in the simulator itself.
"""


class ConfigurationError(Exception):
    """A scenario configuration is malformed or violates an invariant."""


class UndefinedMetricError(Exception):
    """A derived metric has a zero denominator and therefore no value.

    Callers report the metric as absent; it is never silently coerced to 0.
    """


class InternalConsistencyError(Exception):
    """An internal invariant was violated (a simulator bug, not user error)."""
