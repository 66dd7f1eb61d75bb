"""Exceptions raised by metric_dcov.

Both classes subclass ``ValueError`` so callers that only catch ``ValueError``
keep working. The command-line front end maps them to distinct exit codes.
"""


class InputError(ValueError):
    """Malformed or inconsistent input data (parse errors, shape mismatches)."""

    exit_code = 2


class PreconditionError(ValueError):
    """A mathematical precondition of an operation does not hold."""

    exit_code = 3
