"""
Achievable-rate expressions for HD and FD cooperative NOMA and for plain NOMA.

Noise is normalized to one, so every power times a gain is an SNR. The ``*_arrays``
variants broadcast over numpy arrays of ``alpha`` and ``p_d`` and are what the grid
oracle evaluates; the scalar functions wrap them into a ``RatePair``.
"""

import math
from typing import Callable, Tuple

import numpy as np
from numpy.typing import ArrayLike

from cnoma_solver.models.channels import PairChannels, PowerDecision, RatePair
from cnoma_solver.models.config import Mode

_LN2 = math.log(2.0)

RateArrays = Tuple[np.ndarray, np.ndarray]


def _log2_1p(x: ArrayLike) -> np.ndarray:
    """log2(1 + x) as a natural-log ratio."""
    return np.log1p(x) / _LN2


def _sic_sinr(alpha: np.ndarray, snr: float, extra: ArrayLike = 1.0) -> np.ndarray:
    """SINR of the weak user's message with the strong message as interference."""
    return alpha * snr / ((1.0 - alpha) * snr + extra)


def hd_rate_arrays(
    ch: PairChannels, alpha: ArrayLike, p_d: ArrayLike, p_bs: float
) -> RateArrays:
    """Strong and weak user rates of HD C-NOMA (two slots, factor 1/2)."""
    alpha = np.asarray(alpha, dtype=float)
    p_d = np.asarray(p_d, dtype=float)
    strong = p_bs * ch.gamma_m
    weak = p_bs * ch.gamma_n

    r_strong = 0.5 * _log2_1p((1.0 - alpha) * strong)
    r_decode = 0.5 * _log2_1p(_sic_sinr(alpha, strong))
    r_repetition = 0.5 * _log2_1p(p_d * ch.gamma_d + _sic_sinr(alpha, weak))
    return r_strong, np.minimum(r_repetition, r_decode)


def fd_rate_arrays(
    ch: PairChannels, alpha: ArrayLike, p_d: ArrayLike, p_bs: float
) -> RateArrays:
    """Strong and weak user rates of FD C-NOMA (single slot, relay self-interference)."""
    alpha = np.asarray(alpha, dtype=float)
    p_d = np.asarray(p_d, dtype=float)
    strong = p_bs * ch.gamma_m
    weak = p_bs * ch.gamma_n
    residual = p_d * ch.gamma_si + 1.0

    r_strong = _log2_1p((1.0 - alpha) * strong / residual)
    r_decode = _log2_1p(_sic_sinr(alpha, strong, residual))
    r_mrc = _log2_1p(p_d * ch.gamma_d + _sic_sinr(alpha, weak))
    return r_strong, np.minimum(r_decode, r_mrc)


def noma_rate_arrays(
    ch: PairChannels, alpha: ArrayLike, p_d: ArrayLike, p_bs: float
) -> RateArrays:
    """Rates of non-cooperative two-user NOMA; ``p_d`` is ignored."""
    alpha = np.asarray(alpha, dtype=float)
    strong = p_bs * ch.gamma_m
    weak = p_bs * ch.gamma_n

    r_strong = _log2_1p((1.0 - alpha) * strong)
    r_direct = _log2_1p(_sic_sinr(alpha, weak))
    # the strong user must decode the weak message before SIC
    r_cap = _log2_1p(_sic_sinr(alpha, strong))
    r_weak = np.minimum(r_direct, r_cap)
    shape = np.broadcast(alpha, np.asarray(p_d, dtype=float)).shape
    return np.broadcast_to(r_strong, shape), np.broadcast_to(r_weak, shape)


RateFunction = Callable[[PairChannels, ArrayLike, ArrayLike, float], RateArrays]


def rate_arrays_for(mode: Mode) -> RateFunction:
    """Vectorized rate function of a concrete transmission mode."""
    table = {Mode.HD: hd_rate_arrays, Mode.FD: fd_rate_arrays, Mode.NOMA: noma_rate_arrays}
    try:
        return table[mode]
    except KeyError:
        raise ValueError(f"No single rate model for mode {mode.value!r}") from None


def _as_pair(rates: RateArrays) -> RatePair:
    r_strong, r_weak = rates
    return RatePair(r_strong=float(r_strong), r_weak=float(r_weak))


def hd_rates(ch: PairChannels, dec: PowerDecision, p_bs: float) -> RatePair:
    """
    Evaluate HD C-NOMA rates.

    Args:
        ch: Channels of the pair
        dec: Power split and relay power
        p_bs: BS power budget (linear)

    Returns:
        Strong-user rate and the weak-user rate min(repetition decoding, SIC decoding)
    """
    return _as_pair(hd_rate_arrays(ch, dec.alpha, dec.p_d, p_bs))


def fd_rates(ch: PairChannels, dec: PowerDecision, p_bs: float) -> RatePair:
    """
    Evaluate FD C-NOMA rates.

    Args:
        ch: Channels of the pair
        dec: Power split and relay power
        p_bs: BS power budget (linear)

    Returns:
        Strong-user rate under self-interference and the weak-user rate min(SIC, MRC)
    """
    return _as_pair(fd_rate_arrays(ch, dec.alpha, dec.p_d, p_bs))


def noma_rates(ch: PairChannels, alpha: float, p_bs: float) -> RatePair:
    """Evaluate conventional NOMA rates, weak rate capped by SIC decodability at the strong user."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return _as_pair(noma_rate_arrays(ch, alpha, 0.0, p_bs))


def mode_rates(mode: Mode, ch: PairChannels, dec: PowerDecision, p_bs: float) -> RatePair:
    """Rates of ``dec`` under a concrete transmission mode."""
    if mode is Mode.HD:
        return hd_rates(ch, dec, p_bs)
    if mode is Mode.FD:
        return fd_rates(ch, dec, p_bs)
    if mode is Mode.NOMA:
        return noma_rates(ch, dec.alpha, p_bs)
    raise ValueError(f"No single rate model for mode {mode.value!r}")
