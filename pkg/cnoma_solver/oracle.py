"""
Brute-force references for the closed-form solvers.

``grid_optimal`` scans a dense (alpha, p_d) grid and refines around its best columns;
``exhaustive_pairing`` enumerates every permutation of a small rate matrix. Both are
slow on purpose and only serve to check the fast paths, which ``run_verification``
does over randomized instances.
"""

import itertools
import logging
import math
from functools import partial
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from cnoma_solver.assignment import fill_cost_matrix, hungarian
from cnoma_solver.channel import Stream, sample_network, stream_rng
from cnoma_solver.exceptions import InfeasibleNetworkError, PairingTooLargeError
from cnoma_solver.models.channels import ChannelStats, PairChannels, PowerDecision
from cnoma_solver.models.config import GridSpec, Mode, QosSpec, SystemConfig
from cnoma_solver.models.solutions import Assignment, PairSolution, VerificationReport
from cnoma_solver.power_control import QOS_TOLERANCE, solve_pair
from cnoma_solver.rates import RateFunction, mode_rates, rate_arrays_for


logger = logging.getLogger(__name__)

MAX_EXHAUSTIVE_K = 9
BOUNDARY_BAND = 1e-6
POWER_RESOLUTION = 1e-9
MAX_POWER_ROUNDS = 60
# grid points must clear the threshold by this relative margin
_QOS_MARGIN = 1e-12

Totals = Callable[[np.ndarray, np.ndarray], np.ndarray]


class _GridPoint(BaseModel):
    sum_rate: float
    alpha: float
    p_d: float

    model_config = ConfigDict(frozen=True)

    def beats(self, other: Optional["_GridPoint"]) -> bool:
        """Higher sum rate, then lowest (alpha, p_d) on ties."""
        if other is None:
            return True
        if self.sum_rate != other.sum_rate:
            return self.sum_rate > other.sum_rate
        return (self.alpha, self.p_d) < (other.alpha, other.p_d)


def _totals(
    rate_fn: RateFunction,
    ch: PairChannels,
    p_bs: float,
    floor: float,
    alphas: np.ndarray,
    powers: np.ndarray,
) -> np.ndarray:
    """Sum rates over broadcast (alpha, p_d) arrays, -inf where QoS fails."""
    r_strong, r_weak = rate_fn(ch, alphas, powers, p_bs)
    ok = (r_strong >= floor) & (r_weak >= floor)
    return np.where(ok, r_strong + r_weak, -np.inf)


def _power_axis(pd_hi: float, spec: GridSpec) -> np.ndarray:
    """Zero plus the union of a linear and a geometric relay-power grid."""
    if pd_hi <= 0.0:
        return np.zeros(1)
    linear = np.linspace(0.0, pd_hi, spec.pd_points)
    geometric = np.geomspace(spec.pd_floor * pd_hi, pd_hi, spec.pd_points)
    return np.unique(np.concatenate((linear, geometric)))


def _window_points(shrink: float) -> int:
    return int(round(2.0 / shrink)) + 1


def _scan_columns(
    totals: Totals, alphas: np.ndarray, powers: np.ndarray, chunk_rows: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Best sum rate of every relay-power column and the first alpha reaching it."""
    best = np.full(powers.size, -np.inf)
    best_alpha = np.zeros(powers.size)
    columns = np.arange(powers.size)
    for start in range(0, alphas.size, chunk_rows):
        block = alphas[start : start + chunk_rows]
        total = totals(block[:, np.newaxis], powers[np.newaxis, :])
        rows = np.argmax(total, axis=0)
        value = total[rows, columns]
        better = value > best
        best = np.where(better, value, best)
        best_alpha = np.where(better, block[rows], best_alpha)
    return best, best_alpha


def _refine_alpha(
    totals: Totals,
    powers: np.ndarray,
    best: np.ndarray,
    best_alpha: np.ndarray,
    step: float,
    spec: GridSpec,
) -> Tuple[np.ndarray, np.ndarray]:
    """Zoom every feasible column onto its best alpha for ``refine_rounds`` rounds."""
    best, best_alpha = best.copy(), best_alpha.copy()
    live = np.flatnonzero(np.isfinite(best))
    if live.size == 0:
        return best, best_alpha

    offsets = np.linspace(-1.0, 1.0, _window_points(spec.refine_shrink))
    columns = np.arange(live.size)
    for _ in range(spec.refine_rounds):
        alphas = np.clip(best_alpha[live] + step * offsets[:, np.newaxis], 0.0, 1.0)
        total = totals(alphas, powers[live][np.newaxis, :])
        rows = np.argmax(total, axis=0)
        value = total[rows, columns]
        better = value > best[live]
        best[live] = np.where(better, value, best[live])
        best_alpha[live] = np.where(better, alphas[rows, columns], best_alpha[live])
        step *= 2.0 / (offsets.size - 1)
    return best, best_alpha


def _solve_columns(
    totals: Totals, powers: np.ndarray, spec: GridSpec
) -> Tuple[np.ndarray, np.ndarray]:
    alphas = np.linspace(0.0, 1.0, spec.alpha_points)
    best, best_alpha = _scan_columns(totals, alphas, powers, spec.chunk_rows)
    step = 1.0 / (spec.alpha_points - 1)
    return _refine_alpha(totals, powers, best, best_alpha, step, spec)


def _column_point(best: np.ndarray, best_alpha: np.ndarray, powers: np.ndarray) -> _GridPoint:
    top = np.flatnonzero(best == best.max())
    j = top[np.lexsort((powers[top], best_alpha[top]))[0]]
    return _GridPoint(sum_rate=float(best[j]), alpha=float(best_alpha[j]), p_d=float(powers[j]))


def _seed_columns(best: np.ndarray, count: int) -> List[int]:
    """Indices of the ``count`` highest local maxima along the relay-power axis."""
    padded = np.concatenate(([-np.inf], best, [-np.inf]))
    peaks = np.flatnonzero(np.isfinite(best) & (best >= padded[:-2]) & (best >= padded[2:]))
    order = np.argsort(-best[peaks], kind="stable")
    return [int(j) for j in peaks[order[:count]]]


def _refine_power(
    totals: Totals, powers: np.ndarray, seed: int, spec: GridSpec
) -> Optional[_GridPoint]:
    """Zoom the relay power between the neighbours of a seed column until it resolves."""
    lo = float(powers[max(seed - 1, 0)])
    hi = float(powers[min(seed + 1, powers.size - 1)])
    points = _window_points(spec.refine_shrink)
    best: Optional[_GridPoint] = None
    rounds = 0
    while hi - lo > POWER_RESOLUTION * max(1.0, hi) and rounds < MAX_POWER_ROUNDS:
        window = np.linspace(lo, hi, points)
        value, alpha = _solve_columns(totals, window, spec)
        i = int(np.argmax(value))
        if not np.isfinite(value[i]):
            break
        candidate = _GridPoint(
            sum_rate=float(value[i]), alpha=float(alpha[i]), p_d=float(window[i])
        )
        if candidate.beats(best):
            best = candidate
        lo, hi = float(window[max(i - 1, 0)]), float(window[min(i + 1, points - 1)])
        rounds += 1
    return best


def grid_optimal(
    ch: PairChannels,
    p_bs: float,
    p_d_max: float,
    qos: QosSpec,
    mode: Mode,
    spec: GridSpec = GridSpec(),
) -> PairSolution:
    """
    Grid search for the best QoS-feasible (alpha, p_d) of a concrete mode.

    The relay-power axis joins ``pd_points`` linear and ``pd_points`` geometric values
    down to ``pd_floor * p_d_max``, so narrow feasible bands near zero are sampled.
    Every column is scanned over ``alpha_points`` values of alpha. Refinement then
    zooms each feasible column onto its best alpha for ``refine_rounds`` rounds,
    shrinking the window by ``refine_shrink`` each time, and zooms the relay power
    around the ``seeds`` best local maxima until the bracket is below
    ``POWER_RESOLUTION``. A point counts only if it meets the rate threshold.

    Args:
        ch: Channels of the pair
        p_bs: BS power budget
        p_d_max: Relay power budget; NOMA always uses zero
        qos: Rate threshold
        mode: HD, FD or NOMA
        spec: Grid resolution

    Returns:
        Best grid point found, or an infeasible solution if no point meets QoS
    """
    rate_fn = rate_arrays_for(mode)
    pd_hi = 0.0 if mode is Mode.NOMA else p_d_max
    floor = qos.r_th * (1.0 + _QOS_MARGIN)
    totals: Totals = partial(_totals, rate_fn, ch, p_bs, floor)

    powers = _power_axis(pd_hi, spec)
    alphas = np.linspace(0.0, 1.0, spec.alpha_points)
    best, best_alpha = _scan_columns(totals, alphas, powers, spec.chunk_rows)
    if not np.isfinite(best).any():
        return PairSolution.infeasible(mode, "no grid point meets QoS")
    incumbent = _column_point(best, best_alpha, powers)

    if spec.refine_rounds > 0:
        step = 1.0 / (spec.alpha_points - 1)
        best, best_alpha = _refine_alpha(totals, powers, best, best_alpha, step, spec)
        candidates: List[Optional[_GridPoint]] = [_column_point(best, best_alpha, powers)]
        if powers.size > 1:
            for seed in _seed_columns(best, spec.seeds):
                candidates.append(_refine_power(totals, powers, seed, spec))
        for candidate in candidates:
            if candidate is not None and candidate.beats(incumbent):
                incumbent = candidate
        logger.debug(f"{mode.value} grid optimum {incumbent.sum_rate:.9g} at {incumbent}")

    decision = PowerDecision(alpha=incumbent.alpha, p_d=incumbent.p_d)
    return PairSolution.solved(decision, mode_rates(mode, ch, decision, p_bs), mode)


def exhaustive_pairing(rates: np.ndarray) -> Assignment:
    """
    Maximum-sum pairing by enumerating every permutation.

    Args:
        rates: K x K pair sum rates, -inf for infeasible pairs

    Returns:
        The best assignment; lexicographically first permutation on ties

    Raises:
        PairingTooLargeError: If K exceeds ``MAX_EXHAUSTIVE_K``
        InfeasibleNetworkError: If every permutation uses an infeasible pair
    """
    rates = np.asarray(rates, dtype=float)
    if rates.ndim != 2 or rates.shape[0] != rates.shape[1]:
        raise ValueError(f"rate matrix must be square, got shape {rates.shape}")
    k = rates.shape[0]
    if k > MAX_EXHAUSTIVE_K:
        raise PairingTooLargeError(f"exhaustive pairing is limited to K <= {MAX_EXHAUSTIVE_K}")

    perms = np.array(list(itertools.permutations(range(k))), dtype=np.intp)
    totals = rates[np.arange(k), perms].sum(axis=1)
    best = int(np.argmax(totals))
    if not np.isfinite(totals[best]):
        dead = [m for m in range(k) if not np.isfinite(rates[m]).any()]
        raise InfeasibleNetworkError(dead or list(range(k)))

    pairing = [int(n) for n in perms[best]]
    total = math.fsum(float(rates[m, n]) for m, n in enumerate(pairing))
    return Assignment(pairing=pairing, total_rate=total)


class _Instance(BaseModel):
    channels: PairChannels
    p_bs: float
    p_d_max: float
    r_th: float

    model_config = ConfigDict(frozen=True)


def _draw_instance(rng: np.random.Generator) -> _Instance:
    gains_db = rng.uniform(-20.0, 20.0, size=4)
    channels = PairChannels.from_db(
        gamma_m_db=gains_db[0],
        gamma_n_db=gains_db[1],
        gamma_d_db=gains_db[2],
        gamma_si_db=gains_db[3],
    )
    p_bs = 10.0 ** (rng.uniform(0.0, 50.0) / 10.0)
    p_d_max = 10.0 ** (rng.uniform(0.0, 40.0) / 10.0)
    r_th = float(rng.choice([0.5, 1.0, 2.0]))
    return _Instance(channels=channels, p_bs=float(p_bs), p_d_max=float(p_d_max), r_th=r_th)


def _closed_form(instance: _Instance, mode: Mode, scale: float = 1.0) -> PairSolution:
    config = SystemConfig(
        p_bs=instance.p_bs * scale,
        p_d_max=instance.p_d_max * scale,
        r_th=instance.r_th,
        mode=mode,
    )
    return solve_pair(instance.channels, config)


def _near_boundary(instance: _Instance, mode: Mode, feasible: bool) -> bool:
    """Whether a relative budget perturbation of ``BOUNDARY_BAND`` flips feasibility."""
    for scale in (1.0 - BOUNDARY_BAND, 1.0 + BOUNDARY_BAND):
        if _closed_form(instance, mode, scale).feasible != feasible:
            return True
    return False


def _compare_pairings(
    rng: np.random.Generator, k: int, stats: ChannelStats, config: SystemConfig, seed: int
) -> bool:
    """Whether the matching and the enumeration agree on one sampled cell."""
    realization = sample_network(stats, k, seed, trial=int(rng.integers(0, 2**31)))
    cost, _ = fill_cost_matrix(realization, partial(solve_pair, config=config))
    rates = np.where(np.isfinite(cost.entries), -cost.entries, -np.inf)

    outcomes: List[Optional[float]] = []
    for solve in (partial(hungarian, cost), partial(exhaustive_pairing, rates)):
        try:
            outcomes.append(solve().total_rate)
        except InfeasibleNetworkError:
            outcomes.append(None)
    fast, slow = outcomes
    if fast is None or slow is None:
        return fast is None and slow is None
    return abs(fast - slow) <= 1e-9 * max(1.0, abs(slow))


def run_verification(
    instances: int,
    seed: int,
    grid: GridSpec = GridSpec(),
    tolerance: float = 1e-4,
    networks: int = 0,
    max_k: int = 7,
    modes: Sequence[Mode] = (Mode.HD, Mode.FD),
    progress: Optional[Callable[[int], None]] = None,
) -> VerificationReport:
    """
    Compare closed-form pair solutions against the grid oracle on random instances.

    Each instance draws direct, D2D and SI gains uniformly in dB together with random
    budgets and rate threshold, then solves every mode in ``modes`` both ways. A
    feasibility disagreement is exempt when the instance sits within a relative
    ``BOUNDARY_BAND`` of the feasibility boundary. When ``networks`` is positive the
    matching is also checked against full enumeration on that many sampled cells of
    each size 2..max_k.

    Args:
        instances: Number of random pair instances
        seed: Root seed
        grid: Oracle grid resolution
        tolerance: Largest allowed sum-rate gap when both sides are feasible
        networks: Sampled cells per size for the pairing check
        max_k: Largest cell size for the pairing check
        modes: Concrete modes to verify
        progress: Called with the index of each finished instance

    Returns:
        Aggregated counts and gaps
    """
    report = VerificationReport(tolerance=tolerance)
    rng = stream_rng(seed, 0, Stream.VERIFY)

    for index in range(instances):
        instance = _draw_instance(rng)
        qos = QosSpec(r_th=instance.r_th)
        for mode in modes:
            closed = _closed_form(instance, mode)
            brute = grid_optimal(
                instance.channels, instance.p_bs, instance.p_d_max, qos, mode, grid
            )
            report.instances += 1
            if closed.feasible and not closed.rates.meets(instance.r_th, QOS_TOLERANCE):
                report.qos_violations += 1
            if closed.feasible != brute.feasible:
                if _near_boundary(instance, mode, closed.feasible):
                    report.boundary_exempt += 1
                else:
                    report.flag_disagreements += 1
                    logger.debug(
                        f"{mode.value} feasibility disagreement: closed={closed.feasible} "
                        f"grid={brute.feasible} for {instance}"
                    )
                continue
            if closed.feasible:
                report.both_feasible += 1
                gap = abs(closed.sum_rate - brute.sum_rate)
                if gap > tolerance:
                    logger.info(f"{mode.value} gap {gap:.3g} for {instance}")
                report.max_gap = max(report.max_gap, gap)
        if progress is not None:
            progress(index)

    if networks > 0:
        stats = ChannelStats.from_db(
            lambda_s_db=10.0, lambda_w_db=0.0, lambda_d_db=6.0, lambda_si_db=0.0
        )
        config = SystemConfig(p_bs=1e3, p_d_max=1e3, r_th=1.0, mode=Mode.FD)
        for k in _pairing_sizes(max_k):
            for _ in range(networks):
                report.networks += 1
                if not _compare_pairings(rng, k, stats, config, seed):
                    report.pairing_mismatches += 1

    logger.info(
        f"Verified {report.instances} instances: max gap {report.max_gap:.3g}, "
        f"{report.flag_disagreements} disagreements, {report.boundary_exempt} boundary-exempt, "
        f"{report.pairing_mismatches}/{report.networks} pairing mismatches"
    )
    return report


def _pairing_sizes(max_k: int) -> Iterable[int]:
    if max_k > MAX_EXHAUSTIVE_K:
        raise PairingTooLargeError(f"exhaustive pairing is limited to K <= {MAX_EXHAUSTIVE_K}")
    return range(2, max_k + 1)

