"""
Shared fixtures for testing.
"""

from pathlib import Path

import pytest

from cnoma_solver.models.channels import ChannelStats, PairChannels
from cnoma_solver.models.config import GridSpec, QosSpec


@pytest.fixture
def hd_pair():
    """Pair with p_bs*gamma_m = 10 and p_bs*gamma_n = 1 at p_bs = 1."""
    return PairChannels(gamma_m=10.0, gamma_n=1.0, gamma_d=1.0, gamma_si=0.1)


@pytest.fixture
def half_bit():
    """QoS of 0.5 bits/s/Hz, so that delta_h = 1."""
    return QosSpec(r_th=0.5)


@pytest.fixture
def one_bit():
    """QoS of 1 bit/s/Hz, so that delta_h = 3 and delta_f = 1."""
    return QosSpec(r_th=1.0)


@pytest.fixture
def coarse_grid():
    """Oracle grid small enough for unit tests."""
    return GridSpec(alpha_points=401, pd_points=401)


@pytest.fixture
def default_stats():
    """Mean gains of 10, 0, 6 and 0 dB."""
    return ChannelStats.from_db(
        lambda_s_db=10.0, lambda_w_db=0.0, lambda_d_db=6.0, lambda_si_db=0.0
    )


@pytest.fixture
def write_config(tmp_path):
    """Write config text to a temporary file and return its path."""

    def write(text: str, name: str = "scenario.cfg") -> Path:
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        return path

    return write


@pytest.fixture
def rich_stats():
    """Strong links and weak self-interference, so sampled cells are almost surely feasible."""
    return ChannelStats(lambda_s=100.0, lambda_w=10.0, lambda_d=10.0, lambda_si=0.01)
