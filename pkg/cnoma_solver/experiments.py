"""
Monte-Carlo scenarios: baseline pairings, the fixed-relay-power variant and sweeps.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from functools import partial
from typing import Callable, List, Optional, Sequence

import numpy as np

from cnoma_solver.assignment import PairSolver, solve_network
from cnoma_solver.channel import Stream, sample_network, stream_rng
from cnoma_solver.exceptions import (
    DomainError,
    InfeasibleNetworkError,
    InfeasibleScenarioError,
)
from cnoma_solver.models.channels import (
    ChannelStats,
    NetworkRealization,
    PairChannels,
    PowerDecision,
)
from cnoma_solver.models.config import Mode, Pairing, QosSpec, RelayPower, Scenario, SystemConfig
from cnoma_solver.models.solutions import Assignment, NetworkSolution, PairSolution, SweepResult
from cnoma_solver.power_control import (
    fd_bound_a,
    fd_bound_b,
    fd_bound_c,
    hd_bound_a,
    hd_bound_b,
    hd_bound_c,
    solve_pair,
)
from cnoma_solver.rates import mode_rates


logger = logging.getLogger(__name__)


def baseline_pairing(kind: Pairing, k: int, seed: int, trial: int = 0) -> List[int]:
    """
    Pairing of a non-optimizing rule, as ``pairing[m]`` = weak partner of strong user m.

    Args:
        kind: BASELINE1 pairs the weakest with the strongest user, BASELINE2 pairs
            the i-th weakest with the i-th weakest strong user, RANDOM draws a
            permutation from the trial's pairing stream
        k: Number of pairs
        seed: Root seed
        trial: Trial index

    Returns:
        A permutation of range(k)
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if kind is Pairing.BASELINE1:
        return [k - 1 - m for m in range(k)]
    if kind is Pairing.BASELINE2:
        return list(range(k))
    if kind is Pairing.RANDOM:
        return [int(n) for n in stream_rng(seed, trial, Stream.PAIRING).permutation(k)]
    raise ValueError(f"{kind.value} is not a baseline pairing")


def fixed_relay_variant(
    ch: PairChannels, p_bs: float, p_d_max: float, qos: QosSpec, mode: Mode
) -> PairSolution:
    """
    Best power split when the relay always transmits at its full budget.

    Alpha is the smallest split meeting both rates at ``p_d = p_d_max``. Mode
    selection takes the better of HD and FD, FD on ties.
    """
    if mode is Mode.MODE_SELECT:
        options = [
            fixed_relay_variant(ch, p_bs, p_d_max, qos, concrete)
            for concrete in (Mode.FD, Mode.HD)
        ]
        feasible = [s for s in options if s.feasible]
        if not feasible:
            return PairSolution.infeasible(None, "; ".join(str(s.reason) for s in options))
        return max(feasible, key=lambda s: s.sum_rate)

    try:
        if mode is Mode.HD:
            lower = max(hd_bound_a(ch, p_bs, qos), hd_bound_b(ch, p_bs, qos, p_d_max))
            upper = hd_bound_c(ch, p_bs, qos)
        elif mode is Mode.FD:
            lower = max(fd_bound_a(ch, p_bs, qos, p_d_max), fd_bound_b(ch, p_bs, qos, p_d_max))
            upper = fd_bound_c(ch, p_bs, qos, p_d_max)
        else:
            raise ValueError("full relay power applies to HD and FD only")
    except DomainError as e:
        return PairSolution.infeasible(mode, str(e))

    alpha = max(lower, 0.0)
    if alpha > upper:
        return PairSolution.infeasible(mode, f"no split meets QoS at p_d = {p_d_max:.6g}")
    decision = PowerDecision(alpha=min(alpha, 1.0), p_d=p_d_max)
    return PairSolution.solved(decision, mode_rates(mode, ch, decision, p_bs), mode)


def pair_solver_for(config: SystemConfig) -> PairSolver:
    """Per-pair solver matching ``config.relay_power``."""
    if config.relay_power is RelayPower.FIXED and config.mode is not Mode.NOMA:
        return partial(
            fixed_relay_variant,
            p_bs=config.p_bs,
            p_d_max=config.p_d_max,
            qos=config.qos,
            mode=config.mode,
        )
    return partial(solve_pair, config=config)


def evaluate_pairing(
    realization: NetworkRealization, pairing: Sequence[int], solver: PairSolver
) -> NetworkSolution:
    """
    Solve the pairs of a given pairing.

    Raises:
        InfeasibleNetworkError: If any pair of the pairing is infeasible
    """
    pairs = [solver(realization.pair_channels(m, n)) for m, n in enumerate(pairing)]
    failed = [m for m, solution in enumerate(pairs) if not solution.feasible]
    if failed:
        raise InfeasibleNetworkError(failed)
    total = math.fsum(solution.sum_rate for solution in pairs)
    assignment = Assignment(pairing=list(pairing), total_rate=total)
    return NetworkSolution(assignment=assignment, pairs=pairs)


def _run_trial(
    trial: int,
    scenario: Scenario,
    stats: ChannelStats,
    config: SystemConfig,
    solver: PairSolver,
    seed: int,
) -> Optional[float]:
    """Network sum rate of one trial, or None when the trial is infeasible."""
    realization = sample_network(stats, scenario.k, seed, trial)
    try:
        if scenario.pairing is Pairing.HUNGARIAN:
            return solve_network(realization, config, pair_solver=solver).total_rate
        pairing = baseline_pairing(scenario.pairing, scenario.k, seed, trial)
        return evaluate_pairing(realization, pairing, solver).total_rate
    except InfeasibleNetworkError:
        return None


def run_scenario(
    scenario: Scenario,
    seed: int,
    threads: int = 1,
    progress: Optional[Callable[[int], None]] = None,
) -> SweepResult:
    """
    Average the network sum rate over Monte-Carlo trials at each swept value.

    Trial t always uses the channel streams keyed by ``(seed, t)``, and results are
    gathered in trial order, so the output does not depend on ``threads``. Infeasible
    trials are excluded from the mean and counted.

    Args:
        scenario: Statistics, budgets, scheme and swept axis
        seed: Root seed
        threads: Worker threads for the trials of one axis value
        progress: Called with the index of each finished axis value

    Returns:
        Mean sum rate, its standard error and the infeasible count per axis value

    Raises:
        InfeasibleScenarioError: If every trial at some axis value is infeasible
    """
    means: List[float] = []
    pair_means: List[float] = []
    errors: List[float] = []
    infeasible: List[int] = []
    dead = {}

    for index, (value, label) in enumerate(zip(scenario.sweep_values, scenario.sweep_labels)):
        stats, config = scenario.at(value)
        run = partial(
            _run_trial,
            scenario=scenario,
            stats=stats,
            config=config,
            solver=pair_solver_for(config),
            seed=seed,
        )
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                totals = list(pool.map(run, range(scenario.trials)))
        else:
            totals = [run(trial) for trial in range(scenario.trials)]

        feasible = np.array([t for t in totals if t is not None], dtype=float)
        infeasible.append(scenario.trials - feasible.size)
        if feasible.size == 0:
            dead[label] = scenario.trials
            means.append(0.0)
            pair_means.append(0.0)
            errors.append(0.0)
        else:
            mean = float(np.mean(feasible))
            means.append(mean)
            pair_means.append(mean / scenario.k)
            errors.append(
                float(np.std(feasible, ddof=1) / np.sqrt(feasible.size))
                if feasible.size > 1
                else 0.0
            )
        logger.info(
            f"{scenario.sweep_axis.value} = {label:g}: mean sum rate {means[-1]:.6g} "
            f"over {feasible.size}/{scenario.trials} feasible trials"
        )
        if progress is not None:
            progress(index)

    if dead:
        raise InfeasibleScenarioError(scenario.sweep_axis.value, dead, scenario.trials)

    return SweepResult(
        axis=scenario.sweep_axis.value,
        values=list(scenario.sweep_labels),
        mean_sum_rate=means,
        mean_pair_rate=pair_means,
        stderr=errors,
        infeasible=infeasible,
        trials=scenario.trials,
    )
