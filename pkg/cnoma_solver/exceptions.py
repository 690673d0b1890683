"""
Exception hierarchy for cnoma-solver.
"""

from typing import Optional, Sequence


class CnomaError(Exception):
    """Base class for all solver errors."""


class DomainError(CnomaError, ValueError):
    """Input outside the domain where the rate model is defined."""


class DegenerateChannelError(CnomaError, ValueError):
    """FD breakpoint formulas are undefined for this channel (no SI or no D2D link)."""

    def __init__(self, kind: str, message: Optional[str] = None):
        self.kind = kind
        super().__init__(message or f"Degenerate FD channel: {kind}")


class InfeasiblePairError(CnomaError):
    """No power decision satisfies both users' QoS constraints."""

    def __init__(self, failed: Sequence[str], message: Optional[str] = None):
        self.failed = list(failed)
        super().__init__(message or f"Infeasible pair, failed: {', '.join(self.failed)}")


class InfeasibleNetworkError(CnomaError):
    """The cost matrix admits no perfect matching over finite entries."""

    def __init__(self, unmatched_rows: Sequence[int]):
        self.unmatched_rows = list(unmatched_rows)
        super().__init__(
            f"Infeasible network: no feasible partner for strong users {self.unmatched_rows}"
        )


class InfeasibleScenarioError(CnomaError):
    """Every trial at some swept axis value was infeasible."""

    def __init__(self, axis: str, infeasible: dict[float, int], trials: int):
        self.axis = axis
        self.infeasible = dict(infeasible)
        self.trials = trials
        values = ", ".join(f"{v:g}" for v in self.infeasible)
        super().__init__(
            f"All {trials} trials infeasible for {axis} = {values}; "
            "relax r_th or raise the power budgets"
        )


class PairingTooLargeError(CnomaError, ValueError):
    """Exhaustive pairing enumeration refused for too many pairs."""


class ConfigError(CnomaError, ValueError):
    """Malformed or invalid configuration text."""

    def __init__(self, message: str, line_numbers: Sequence[int] = ()):
        self.line_numbers = list(line_numbers)
        if self.line_numbers:
            where = ", ".join(str(n) for n in self.line_numbers)
            message = f"line {where}: {message}"
        super().__init__(message)
