"""
Models for channels, configurations and solver results.
"""

from cnoma_solver.models.channels import (
    PairChannels,
    PowerDecision,
    RatePair,
    ChannelStats,
    NetworkRealization,
)
from cnoma_solver.models.config import (
    Mode,
    Pairing,
    RelayPower,
    SweepAxis,
    QosSpec,
    SystemConfig,
    GridSpec,
    Scenario,
    PairProblem,
    RunConfig,
)
from cnoma_solver.models.solutions import (
    FdFeasParams,
    FeasibilityReport,
    PairSolution,
    CostMatrix,
    Assignment,
    NetworkSolution,
    SweepResult,
    BenchRow,
    VerificationReport,
)

__all__ = [
    'PairChannels',
    'PowerDecision',
    'RatePair',
    'ChannelStats',
    'NetworkRealization',
    'Mode',
    'Pairing',
    'RelayPower',
    'SweepAxis',
    'QosSpec',
    'SystemConfig',
    'GridSpec',
    'Scenario',
    'PairProblem',
    'RunConfig',
    'FdFeasParams',
    'FeasibilityReport',
    'PairSolution',
    'CostMatrix',
    'Assignment',
    'NetworkSolution',
    'SweepResult',
    'BenchRow',
    'VerificationReport',
]
