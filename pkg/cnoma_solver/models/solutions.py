"""
Result models: per-pair solutions, pairing assignments and experiment outputs.
"""

import math
from typing import Any, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from cnoma_solver.models.channels import PowerDecision, RatePair
from cnoma_solver.models.config import Mode


class FdFeasParams(BaseModel):
    """Discriminants and relay-power breakpoints of the FD feasible region."""

    delta1: float = Field(..., description="Discriminant of B^F(p) = C^F(p)")
    delta2: float = Field(..., description="Discriminant of A^F(p) = B^F(p)")
    b1: Optional[float] = Field(None, description="Lower root of B^F = C^F, absent if delta1 < 0")
    b2: float = Field(..., description="Relay power where A^F meets B^F")
    b3: Optional[float] = Field(None, description="Upper root of B^F = C^F, absent if delta1 < 0")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_roots(self) -> "FdFeasParams":
        if (self.b1 is None) != (self.b3 is None):
            raise ValueError("b1 and b3 are either both present or both absent")
        if self.b1 is not None and self.b3 is not None and self.b1 > self.b3:
            raise ValueError("b1 must not exceed b3")
        return self


class FeasibilityReport(BaseModel):
    """Outcome of a feasibility test with the names of the failed conditions."""

    feasible: bool
    failed: List[str] = Field(default_factory=list)
    condition: Optional[int] = Field(
        None, description="Matched FD case (1, 2 or 3); None for HD or when infeasible"
    )
    detail: str = ""

    def __bool__(self) -> bool:
        return self.feasible


class PairSolution(BaseModel):
    """Optimal (or infeasible) power control outcome for one pair."""

    feasible: bool
    decision: Optional[PowerDecision] = None
    rates: RatePair = Field(default_factory=lambda: RatePair(r_strong=0.0, r_weak=0.0))
    sum_rate: float = 0.0
    mode: Optional[Mode] = None
    reason: Optional[str] = None

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_consistency(self) -> "PairSolution":
        if self.feasible and self.decision is None:
            raise ValueError("feasible solution requires a decision")
        if self.mode is Mode.MODE_SELECT:
            raise ValueError("solution mode must be the mode actually used")
        return self

    @classmethod
    def solved(cls, decision: PowerDecision, rates: RatePair, mode: Mode) -> "PairSolution":
        return cls(
            feasible=True, decision=decision, rates=rates, sum_rate=rates.sum_rate, mode=mode
        )

    @classmethod
    def infeasible(cls, mode: Optional[Mode], reason: str) -> "PairSolution":
        return cls(feasible=False, mode=mode, reason=reason)


class CostMatrix(BaseModel):
    """Square matching cost: negated pair sum rates, +inf for infeasible pairs."""

    entries: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("entries", mode="before")
    @classmethod
    def as_square(cls, v: Any) -> np.ndarray:
        arr = np.array(v, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise ValueError(f"cost matrix must be square and nonempty, got shape {arr.shape}")
        if np.any(np.isnan(arr)) or np.any(arr == -np.inf):
            raise ValueError("cost entries must be finite or +inf")
        arr.setflags(write=False)
        return arr

    @property
    def k(self) -> int:
        return int(self.entries.shape[0])

    @classmethod
    def from_rates(cls, rates: np.ndarray) -> "CostMatrix":
        """Negate a pair-rate matrix; -inf (infeasible) rates become +inf costs."""
        rates = np.asarray(rates, dtype=float)
        return cls(entries=np.where(np.isfinite(rates), -rates, np.inf))


class Assignment(BaseModel):
    """A perfect matching of strong users (index) to weak users (value), 0-based."""

    pairing: List[int]
    total_rate: float

    model_config = ConfigDict(frozen=True)

    @field_validator("pairing")
    @classmethod
    def is_permutation(cls, v: List[int]) -> List[int]:
        if sorted(v) != list(range(len(v))):
            raise ValueError(f"pairing is not a permutation: {v}")
        return v


class NetworkSolution(BaseModel):
    """Optimal pairing together with the power control of each matched pair."""

    assignment: Assignment
    pairs: List[PairSolution] = Field(..., description="Solution of pair (m, pairing[m])")

    @property
    def total_rate(self) -> float:
        return self.assignment.total_rate


class SweepResult(BaseModel):
    """Monte-Carlo averages per swept axis value."""

    axis: str = Field(..., description="Swept config key, including its unit suffix")
    values: List[float] = Field(..., description="Axis values in config units")
    mean_sum_rate: List[float] = Field(..., description="Mean network sum rate per value")
    mean_pair_rate: List[float] = Field(..., description="Mean sum rate per pair per value")
    stderr: List[float]
    infeasible: List[int] = Field(..., description="Excluded infeasible trials per value")
    trials: int = Field(..., ge=1)

    @model_validator(mode="after")
    def check_lengths(self) -> "SweepResult":
        n = len(self.values)
        columns = (self.mean_sum_rate, self.mean_pair_rate, self.stderr, self.infeasible)
        if n == 0 or any(len(c) != n for c in columns):
            raise ValueError("sweep columns must be nonempty and of equal length")
        if not all(math.isfinite(x) for x in self.mean_sum_rate):
            raise ValueError("mean sum rates must be finite")
        return self

    @property
    def infeasible_frac(self) -> List[float]:
        return [count / self.trials for count in self.infeasible]


class BenchRow(BaseModel):
    """Median wall-clock timings of one benchmark size."""

    k: int
    users: int
    fill_seconds: float
    hungarian_seconds: float

    @property
    def total_seconds(self) -> float:
        return self.fill_seconds + self.hungarian_seconds


class VerificationReport(BaseModel):
    """Summary of a randomized closed-form versus oracle comparison."""

    instances: int = 0
    both_feasible: int = 0
    flag_disagreements: int = 0
    boundary_exempt: int = 0
    max_gap: float = 0.0
    qos_violations: int = 0
    networks: int = 0
    pairing_mismatches: int = 0
    tolerance: float = 1e-4
    max_disagreement_rate: float = 1e-3

    @property
    def disagreement_rate(self) -> float:
        return self.flag_disagreements / self.instances if self.instances else 0.0

    @property
    def passed(self) -> bool:
        return (
            self.max_gap <= self.tolerance
            and self.qos_violations == 0
            and self.pairing_mismatches == 0
            and self.disagreement_rate <= self.max_disagreement_rate
        )
