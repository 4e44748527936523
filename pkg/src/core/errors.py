"""Exception hierarchy for the cocycle workbench

Every error carries the process exit code the CLI maps it to:
2 for configuration problems, 3 for construction failures and 4 when a
re-checked certificate does not hold.
"""

from typing import Any, Dict, Optional


class WorkbenchError(Exception):
    """Base class for all workbench errors"""

    exit_code: int = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details or {}

    def to_dict(self) -> Dict[str, Any]:
        """Serializable view used in run reports"""
        return {
            "error": type(self).__name__,
            "message": self.message,
            "exit_code": self.exit_code,
            "details": {key: str(value) for key, value in self.details.items()},
        }


class ConfigError(WorkbenchError):
    """Invalid experiment document, parameter range or output format"""

    exit_code = 2


class IntervalError(ConfigError, ValueError):
    """Malformed interval data (endpoint outside [0,1] or hi < lo)"""


class ConstructionError(WorkbenchError):
    """A construction could not be carried out"""

    exit_code = 3


class ExactArithmeticError(ConstructionError, ArithmeticError):
    """Division by zero, unparsable number or unsupported exact operation"""


class UndefinedPointError(ConstructionError):
    """A partial map was evaluated outside its domain of definition"""

    def __init__(self, message: str, point: Any = None):
        super().__init__(message, {"point": point} if point is not None else None)
        self.point = point


class MachineTooShallowError(ConstructionError):
    """The machine must be cut and stacked further before this request"""


class InsufficientResidualError(ConstructionError):
    """Not enough residual mass to carve the requested spacers"""


class PreconditionError(ConstructionError):
    """Inputs violate the stated preconditions of an operation"""


class ApproximationNotFoundError(ConstructionError):
    """No simultaneous approximation exists below the search bound"""

    def __init__(self, message: str, q_max: int, suggested_q_max: int):
        super().__init__(message, {"q_max": q_max, "suggested_q_max": suggested_q_max})
        self.q_max = q_max
        self.suggested_q_max = suggested_q_max


class VerificationError(WorkbenchError):
    """A certificate inequality failed when recomputed"""

    exit_code = 4


class BalanceNotFoundError(ConstructionError):
    """No exceptional set restores the integral balance at the current denominator"""


class GapNotFoundError(ConstructionError):
    """No level carries two value ranges a positive gap apart at this refinement"""


class CrossTermError(ConstructionError):
    """Earlier series terms are not yet averaged out at the requested sum length"""
