"""
Channel and decision models shared by the rate, power-control and assignment layers.

All gains and powers are linear and noise-normalized (unit-variance AWGN).
"""

from typing import Any, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def _db(x: float) -> float:
    return float(10.0 ** (x / 10.0))


class PairChannels(BaseModel):
    """Realized gains of one candidate (strong, weak) pair.

    The strong/weak labeling is enforced at construction: if ``gamma_n`` exceeds
    ``gamma_m`` the two direct-link gains are swapped.
    """

    gamma_m: float = Field(
        ..., ge=0.0, allow_inf_nan=False, description="BS to strong user power gain"
    )
    gamma_n: float = Field(
        ..., ge=0.0, allow_inf_nan=False, description="BS to weak user power gain"
    )
    gamma_d: float = Field(
        ..., ge=0.0, allow_inf_nan=False, description="D2D gain from strong to weak user"
    )
    gamma_si: float = Field(
        ..., ge=0.0, allow_inf_nan=False, description="Self-interference gain at strong user"
    )

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="before")
    @classmethod
    def order_users(cls, data: Any) -> Any:
        """Swap the direct-link gains so that gamma_m >= gamma_n."""
        if isinstance(data, dict):
            m, n = data.get("gamma_m"), data.get("gamma_n")
            if m is not None and n is not None and float(n) > float(m):
                data = {**data, "gamma_m": n, "gamma_n": m}
        return data

    @classmethod
    def from_db(
        cls, gamma_m_db: float, gamma_n_db: float, gamma_d_db: float, gamma_si_db: float
    ) -> "PairChannels":
        """Build a pair from gains given in dB."""
        return cls(
            gamma_m=_db(gamma_m_db),
            gamma_n=_db(gamma_n_db),
            gamma_d=_db(gamma_d_db),
            gamma_si=_db(gamma_si_db),
        )


class PowerDecision(BaseModel):
    """Power split at the BS and relay power at the strong user."""

    alpha: float = Field(
        ..., ge=0.0, le=1.0, description="Fraction of BS power carrying the weak user's message"
    )
    p_d: float = Field(
        ..., ge=0.0, allow_inf_nan=False, description="D2D relay transmit power"
    )

    model_config = ConfigDict(frozen=True)


class RatePair(BaseModel):
    """Achievable rates of the two users of a pair, in bits/s/Hz."""

    r_strong: float = Field(..., ge=0.0, allow_inf_nan=False)
    r_weak: float = Field(..., ge=0.0, allow_inf_nan=False)

    model_config = ConfigDict(frozen=True)

    @property
    def sum_rate(self) -> float:
        return self.r_strong + self.r_weak

    def meets(self, r_th: float, tolerance: float = 1e-9) -> bool:
        """Check both rates against a QoS threshold with an absolute tolerance."""
        return self.r_strong >= r_th - tolerance and self.r_weak >= r_th - tolerance


class ChannelStats(BaseModel):
    """Mean linear power gains of the four link families."""

    lambda_s: float = Field(..., gt=0.0, allow_inf_nan=False, description="Strong-user link mean")
    lambda_w: float = Field(..., gt=0.0, allow_inf_nan=False, description="Weak-user link mean")
    lambda_d: float = Field(..., gt=0.0, allow_inf_nan=False, description="D2D link mean")
    lambda_si: float = Field(
        ..., gt=0.0, allow_inf_nan=False, description="Self-interference link mean"
    )

    model_config = ConfigDict(frozen=True)

    @classmethod
    def from_db(
        cls, lambda_s_db: float, lambda_w_db: float, lambda_d_db: float, lambda_si_db: float
    ) -> "ChannelStats":
        return cls(
            lambda_s=_db(lambda_s_db),
            lambda_w=_db(lambda_w_db),
            lambda_d=_db(lambda_d_db),
            lambda_si=_db(lambda_si_db),
        )


class NetworkRealization(BaseModel):
    """One realization of all gains in a cell of 2K users.

    ``g`` holds the 2K direct-link gains sorted ascending: the first K entries are
    the weak half, the last K the strong half. ``d[m, n]`` is the D2D gain from
    strong user ``m`` to weak user ``n`` and ``s[m]`` the SI gain of strong user ``m``.
    """

    g: np.ndarray = Field(..., description="Sorted direct-link gains, length 2K")
    d: np.ndarray = Field(..., description="K x K D2D gains, rows strong, columns weak")
    s: np.ndarray = Field(..., description="Self-interference gains of the strong half")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("g", "d", "s", mode="before")
    @classmethod
    def as_gain_array(cls, v: Any) -> np.ndarray:
        arr = np.array(v, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise ValueError("gains must be finite")
        if np.any(arr < 0.0):
            raise ValueError("gains must be nonnegative")
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def check_dimensions(self) -> "NetworkRealization":
        k = self.s.shape[0] if self.s.ndim == 1 else -1
        if k < 1:
            raise ValueError("s must be a nonempty vector")
        if self.g.shape != (2 * k,):
            raise ValueError(f"g must hold {2 * k} gains, got shape {self.g.shape}")
        if self.d.shape != (k, k):
            raise ValueError(f"d must be {k}x{k}, got shape {self.d.shape}")
        if np.any(np.diff(self.g) < 0.0):
            raise ValueError("g must be sorted ascending")
        return self

    @property
    def k(self) -> int:
        return int(self.s.shape[0])

    @property
    def weak_gains(self) -> np.ndarray:
        return self.g[: self.k]

    @property
    def strong_gains(self) -> np.ndarray:
        return self.g[self.k :]

    def pair_channels(self, m: int, n: int) -> PairChannels:
        """Channels of the candidate pair (strong user m, weak user n), 0-based."""
        k = self.k
        return PairChannels(
            gamma_m=float(self.g[k + m]),
            gamma_n=float(self.g[n]),
            gamma_d=float(self.d[m, n]),
            gamma_si=float(self.s[m]),
        )

    @classmethod
    def from_user_gains(
        cls, gains: Sequence[float], d: Any, s: Sequence[float]
    ) -> "NetworkRealization":
        """Sort arbitrary user gains into halves.

        An odd user count is padded with a virtual user of zero gain, which always
        lands in the weak half.
        """
        ordered = sorted(float(x) for x in gains)
        if len(ordered) < 2:
            raise ValueError("at least two users are required")
        if len(ordered) % 2:
            ordered.insert(0, 0.0)
        return cls(g=ordered, d=d, s=s)
