"""Exception hierarchy shared by the protocol modules and the CLI."""


class RSPError(Exception):
    """Base class for all errors raised by qudit_rsp."""


class ConfigError(RSPError, ValueError):
    """Invalid experiment configuration or target description."""


class NotPreparableError(RSPError):
    """The target is not separable under any grouping the policy allows."""


class InvariantViolation(RSPError):
    """A postcondition that should hold by construction was found broken."""
