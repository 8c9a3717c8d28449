"""
Error definitions for dppi.

Every failure raised by the package carries a short machine-readable code and
a human-readable message.
"""


class DPPIError(Exception):
    """Base exception for dppi failures.

    Args:
        code: Error code identifying the type of failure
        msg: Human-readable error message
    """

    def __init__(self, code: str, msg: str):
        self.code = code
        self.msg = msg
        super().__init__(f"{code}: {msg}")

    def __str__(self) -> str:
        return f"{self.code}: {self.msg}"

    def __reduce__(self):
        return self.__class__, (self.code, self.msg)


class DomainError(DPPIError):
    """An argument lies outside the domain of a closed-form expression."""


class BreakpointError(DPPIError):
    """The interaction continuity system has no solution for the parameters."""


class TrackFormatError(DPPIError):
    """A track file cannot be turned into a rectangular observation panel."""


class ChainError(DPPIError):
    """An MCMC run or diagnostic cannot proceed."""


class SimulationError(DPPIError):
    """A forward simulation could not produce a valid configuration."""
