"""Exception types raised by the simulator."""


class SimError(Exception):
    """Base class for all simulator errors."""


class RegisterMismatch(SimError):
    """A mode or state was used with a register it does not belong to."""


class InvalidCoupler(SimError):
    """A two-mode coupler matrix failed the unitarity check."""


class DelayOverflow(SimError):
    """A delay would push an occupied time bin past the declared window."""


class EncodingError(SimError):
    """A qubit descriptor or encoded state violates its encoding contract."""


class ContractViolation(SimError):
    """An operation precondition (uniform spread, Bell ancilla, ...) failed."""


class ScenarioError(SimError):
    """A scenario configuration is unknown or infeasible."""
