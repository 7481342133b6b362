"""
Exception hierarchy for the central configurations toolkit.
Library code raises these; the CLI maps them to exit codes.
"""

from typing import List, Optional


class CentralConfigError(Exception):
    """Base class for all toolkit errors"""


class InvalidMassError(CentralConfigError, ValueError):
    """Mass vector is empty, non-finite or non-positive"""


class CollisionError(CentralConfigError, ValueError):
    """Two bodies coincide (distance below the collision threshold)"""

    def __init__(self, message: str, pair: Optional[tuple] = None):
        super().__init__(message)
        self.pair = pair


class DomainError(CentralConfigError, ValueError):
    """Family parameters outside their admissible region"""

    def __init__(self, message: str, violations: Optional[List[str]] = None):
        super().__init__(message)
        self.violations = list(violations or [])


class RealizabilityError(CentralConfigError, ValueError):
    """Distance set has no embedding in the requested dimension"""


class RootNotBracketedError(CentralConfigError, RuntimeError):
    """Bisection interval without a sign change"""


class NotCentralError(CentralConfigError, RuntimeError):
    """Configuration rejected by the acceleration oracle"""

    def __init__(self, message: str, deviation: float = float("nan")):
        super().__init__(message)
        self.deviation = deviation


class IntegrationError(CentralConfigError, RuntimeError):
    """Integrator failure such as step-size underflow"""


class InputFormatError(CentralConfigError, ValueError):
    """Malformed configuration JSON or distance CSV"""
