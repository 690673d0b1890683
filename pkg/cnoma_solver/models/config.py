"""
Configuration models for cnoma-solver: system budgets, scenarios, oracle grids and CLI runs.
"""

from enum import Enum
from pathlib import Path
from typing import List, Literal, Optional, Tuple

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    computed_field,
    field_validator,
    model_validator,
)

from cnoma_solver.models.channels import ChannelStats, PairChannels


class Mode(str, Enum):
    """Transmission scheme of a pair."""

    HD = "hd"
    FD = "fd"
    MODE_SELECT = "mode_select"
    NOMA = "noma"


class Pairing(str, Enum):
    """Strong/weak pairing rule."""

    HUNGARIAN = "hungarian"
    BASELINE1 = "baseline1"
    BASELINE2 = "baseline2"
    RANDOM = "random"


class RelayPower(str, Enum):
    """Whether the relay adapts its power or always transmits at full budget."""

    ADAPTIVE = "adaptive"
    FIXED = "fixed"


class SweepAxis(str, Enum):
    """Config keys that may carry a list of values."""

    P_BS = "p_bs_dbm"
    P_D_MAX = "p_d_max_dbm"
    LAMBDA_S = "lambda_s_db"
    LAMBDA_W = "lambda_w_db"
    LAMBDA_D = "lambda_d_db"
    LAMBDA_SI = "lambda_si_db"
    R_TH = "r_th_bpshz"


class QosSpec(BaseModel):
    """Minimum per-user rate and the SINR thresholds it induces."""

    r_th: float = Field(..., ge=0.0, allow_inf_nan=False, description="Minimum rate in bits/s/Hz")

    model_config = ConfigDict(frozen=True)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def delta_h(self) -> float:
        """HD threshold over two slots, 2^(2 r_th) - 1."""
        return 2.0 ** (2.0 * self.r_th) - 1.0

    @computed_field  # type: ignore[prop-decorator]
    @property
    def delta_f(self) -> float:
        """FD threshold, 2^r_th - 1."""
        return 2.0**self.r_th - 1.0


class SystemConfig(BaseModel):
    """Budgets and scheme used to solve every pair of a cell."""

    p_bs: float = Field(..., gt=0.0, allow_inf_nan=False, description="BS power budget, linear")
    p_d_max: float = Field(
        ..., ge=0.0, allow_inf_nan=False, description="Relay power budget, linear"
    )
    r_th: float = Field(1.0, ge=0.0, allow_inf_nan=False, description="QoS rate threshold")
    mode: Mode = Field(Mode.FD, description="Transmission scheme")
    relay_power: RelayPower = Field(RelayPower.ADAPTIVE, description="Relay power policy")

    model_config = ConfigDict(frozen=True)

    @property
    def qos(self) -> QosSpec:
        return QosSpec(r_th=self.r_th)


class GridSpec(BaseModel):
    """Resolution of the brute-force (alpha, p_d) oracle."""

    alpha_points: int = Field(2001, ge=2, description="Grid points along alpha")
    pd_points: int = Field(2001, ge=2, description="Grid points along the relay power")
    refine_rounds: int = Field(3, ge=0, description="Local refinement rounds")
    refine_shrink: float = Field(
        0.05, gt=0.0, lt=1.0, description="Window shrink factor per refinement round"
    )
    pd_floor: float = Field(
        1e-6, gt=0.0, lt=1.0, description="Smallest geometric relay power, relative to p_d_max"
    )
    seeds: int = Field(4, ge=1, description="Relay-power columns refined independently")
    chunk_rows: int = Field(64, ge=1, description="Alpha rows evaluated per vectorized block")

    model_config = ConfigDict(frozen=True)


class Scenario(BaseModel):
    """A Monte-Carlo experiment: channel statistics, budgets and one swept axis.

    Scalar budgets are linear and noise-normalized. ``sweep_values`` holds the swept
    axis in linear units, ``sweep_labels`` the same values in config units for output.
    """

    stats: ChannelStats
    k: int = Field(1, ge=1, description="Number of pairs (2K users)")
    p_bs: float = Field(..., gt=0.0, description="BS budget, linear")
    p_d_max: float = Field(..., ge=0.0, description="Relay budget, linear")
    r_th: float = Field(1.0, ge=0.0)
    trials: int = Field(10_000, ge=1)
    mode: Mode = Mode.FD
    pairing: Pairing = Pairing.HUNGARIAN
    relay_power: RelayPower = RelayPower.ADAPTIVE
    noise_floor_dbm: float = 0.0
    sweep_axis: SweepAxis = SweepAxis.P_BS
    sweep_values: List[float] = Field(..., min_length=1)
    sweep_labels: List[float] = Field(default_factory=list)
    user_gains: Optional[List[float]] = Field(
        None, description="Explicit direct-link gains for solve-network, linear"
    )

    @model_validator(mode="after")
    def check_sweep(self) -> "Scenario":
        if not self.sweep_labels:
            self.sweep_labels = list(self.sweep_values)
        if len(self.sweep_labels) != len(self.sweep_values):
            raise ValueError("sweep labels and values differ in length")
        axis = self.sweep_axis
        for value in self.sweep_values:
            if axis is SweepAxis.P_BS and value <= 0.0:
                raise ValueError("swept p_bs must be positive")
            if axis is SweepAxis.R_TH and value < 0.0:
                raise ValueError("swept r_th must be nonnegative")
        return self

    def at(self, value: float) -> Tuple[ChannelStats, SystemConfig]:
        """Statistics and system config with the swept axis set to ``value`` (linear)."""
        stats = self.stats
        budgets = {"p_bs": self.p_bs, "p_d_max": self.p_d_max, "r_th": self.r_th}
        axis = self.sweep_axis
        if axis is SweepAxis.P_BS:
            budgets["p_bs"] = value
        elif axis is SweepAxis.P_D_MAX:
            budgets["p_d_max"] = value
        elif axis is SweepAxis.R_TH:
            budgets["r_th"] = value
        else:
            field = axis.value.removesuffix("_db")
            stats = stats.model_copy(update={field: value})
        config = SystemConfig(mode=self.mode, relay_power=self.relay_power, **budgets)
        return stats, config


class PairProblem(BaseModel):
    """A single pair to solve, as read from a config with realized gains."""

    channels: PairChannels
    system: SystemConfig


class RunConfig(BaseModel):
    """Validated command-line arguments of one subcommand run."""

    subcommand: Literal["solve-pair", "solve-network", "sweep", "verify", "bench"]
    config_path: Optional[Path] = Field(None, description="Input config file")
    output_path: Optional[Path] = Field(None, description="CSV output file")
    seed: int = Field(0, ge=0, description="Root seed of all random streams")
    overrides: List[str] = Field(default_factory=list, description="key=value overrides")
    threads: int = Field(1, ge=1, description="Worker threads for trials and cost fill")

    model_config = ConfigDict(validate_assignment=True)

    @field_validator("config_path")
    @classmethod
    def validate_config_path(cls, v: Optional[Path]) -> Optional[Path]:
        """Validate that the config file exists."""
        if v is None:
            return v
        if not v.exists():
            raise ValueError(f"Config file does not exist: {v}")
        if not v.is_file():
            raise ValueError(f"Config path is not a file: {v}")
        return v

    @field_validator("overrides")
    @classmethod
    def validate_overrides(cls, v: List[str]) -> List[str]:
        for item in v:
            if "=" not in item:
                raise ValueError(f"Override must have the form key=value: {item!r}")
        return v
