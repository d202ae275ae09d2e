"""Exception hierarchy shared across the package.

Three broad families map onto the CLI exit codes: validation problems
(malformed input, out-of-range values) exit 2, state-machine and tamper
violations exit 3, missing references exit 4.
"""


class SysmartError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ValidationError(SysmartError):
    """Malformed or out-of-range input."""

    exit_code = 2


class StateError(SysmartError):
    """Operation not legal in the current state (tamper, auth, transitions)."""

    exit_code = 3


class NotFoundError(SysmartError):
    """A referenced entity does not exist."""

    exit_code = 4
