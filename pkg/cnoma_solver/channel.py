"""
Random channel generation for Monte-Carlo trials and dB conversions.

Rayleigh fading makes every power gain exponential. Each trial draws from
independent Philox4x64-10 streams keyed by ``(seed, trial, stream)``, so a trial's
realization does not depend on which worker runs it or in what order. Gains are
drawn as unit-mean exponentials and then scaled by their means, which keeps the
underlying draws common across swept channel statistics.
"""

import logging
import math
from enum import IntEnum
from typing import Sequence

import numpy as np

from cnoma_solver.models.channels import ChannelStats, NetworkRealization


logger = logging.getLogger(__name__)


class Stream(IntEnum):
    """Stream identifiers of the keyed generator."""

    WEAK = 0
    STRONG = 1
    D2D = 2
    SI = 3
    PAIRING = 4
    VERIFY = 5


def stream_rng(seed: int, trial: int, stream: Stream) -> np.random.Generator:
    """
    Counter-based generator for one (seed, trial, stream) key.

    Args:
        seed: Root seed of the run
        trial: Trial index
        stream: Which quantity the stream feeds

    Returns:
        A numpy Generator over Philox4x64-10
    """
    if seed < 0 or trial < 0:
        raise ValueError("seed and trial must be nonnegative")
    key = np.random.SeedSequence(entropy=seed, spawn_key=(trial, int(stream)))
    return np.random.Generator(np.random.Philox(key))


def db_to_linear(x: float) -> float:
    return float(10.0 ** (x / 10.0))


def dbm_to_linear_normalized(x: float, noise_floor_dbm: float = 0.0) -> float:
    """Convert a power in dBm to a linear SNR-like value relative to the noise floor."""
    return float(10.0 ** ((x - noise_floor_dbm) / 10.0))


def linear_to_db(x: float) -> float:
    if x < 0.0:
        raise ValueError(f"cannot express a negative power in dB: {x}")
    return -math.inf if x == 0.0 else 10.0 * math.log10(x)


def _draw_links(
    stats: ChannelStats, k: int, seed: int, trial: int
) -> tuple[np.ndarray, np.ndarray]:
    d = stream_rng(seed, trial, Stream.D2D).standard_exponential((k, k)) * stats.lambda_d
    s = stream_rng(seed, trial, Stream.SI).standard_exponential(k) * stats.lambda_si
    return d, s


def sample_network(stats: ChannelStats, k: int, seed: int, trial: int = 0) -> NetworkRealization:
    """
    Draw one realization of a cell with K weak and K strong users.

    The two populations are drawn with their own means and the 2K gains are then
    sorted together, so the halves of ``g`` follow the sorted-gain convention.

    Args:
        stats: Mean gains of the four link families
        k: Number of pairs
        seed: Root seed
        trial: Trial index

    Returns:
        The realization of direct, D2D and self-interference gains
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    weak = stream_rng(seed, trial, Stream.WEAK).standard_exponential(k) * stats.lambda_w
    strong = stream_rng(seed, trial, Stream.STRONG).standard_exponential(k) * stats.lambda_s
    g = np.sort(np.concatenate([weak, strong]))
    d, s = _draw_links(stats, k, seed, trial)
    return NetworkRealization(g=g, d=d, s=s)


def realization_from_gains(
    gains: Sequence[float], stats: ChannelStats, seed: int, trial: int = 0
) -> NetworkRealization:
    """Realization with given direct-link gains and sampled D2D and SI gains."""
    k = (len(gains) + 1) // 2
    d, s = _draw_links(stats, k, seed, trial)
    logger.debug(f"Building a {2 * k}-user cell from {len(gains)} explicit gains")
    return NetworkRealization.from_user_gains(gains, d, s)
