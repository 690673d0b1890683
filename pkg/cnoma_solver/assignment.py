"""
Optimal strong/weak pairing by minimum-cost perfect matching.

The cost of pairing strong user m with weak user n is the negated optimal sum rate
of that pair, +inf when the pair cannot meet QoS. Infinite entries are handed to
``scipy.optimize.linear_sum_assignment`` as forbidden edges.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from functools import partial
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from cnoma_solver.exceptions import InfeasibleNetworkError
from cnoma_solver.models.channels import NetworkRealization, PairChannels
from cnoma_solver.models.config import SystemConfig
from cnoma_solver.models.solutions import Assignment, CostMatrix, NetworkSolution, PairSolution
from cnoma_solver.power_control import solve_pair


logger = logging.getLogger(__name__)

PairSolver = Callable[[PairChannels], PairSolution]


def _unmatched_rows(entries: np.ndarray) -> List[int]:
    """Strong users left without a partner by a maximum matching over finite entries."""
    graph = csr_matrix(np.isfinite(entries).astype(np.int8))
    matching = maximum_bipartite_matching(graph, perm_type="column")
    return [int(m) for m in np.flatnonzero(matching < 0)]


def hungarian(cost: CostMatrix) -> Assignment:
    """
    Minimum-cost perfect matching of strong users to weak users.

    Args:
        cost: Negated pair sum rates, +inf for infeasible pairs

    Returns:
        Assignment whose ``total_rate`` is the sum of the matched pairs' rates

    Raises:
        InfeasibleNetworkError: If no perfect matching avoids every +inf entry
    """
    entries = cost.entries
    try:
        rows, cols = linear_sum_assignment(entries)
    except ValueError:
        raise InfeasibleNetworkError(_unmatched_rows(entries)) from None
    total = -math.fsum(float(entries[r, c]) for r, c in zip(rows, cols))
    return Assignment(pairing=[int(c) for c in cols], total_rate=total)


def fill_cost_matrix(
    realization: NetworkRealization, solver: PairSolver, threads: int = 1
) -> Tuple[CostMatrix, List[List[PairSolution]]]:
    """
    Solve every candidate pair of a realization.

    Args:
        realization: Gains of the cell
        solver: Per-pair power control
        threads: Worker threads for the K x K solves

    Returns:
        The cost matrix and the K x K grid of pair solutions (rows strong, columns weak)
    """
    k = realization.k
    cells = [(m, n) for m in range(k) for n in range(k)]

    def solve_cell(cell: Tuple[int, int]) -> PairSolution:
        return solver(realization.pair_channels(*cell))

    if threads > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            flat = list(pool.map(solve_cell, cells))
    else:
        flat = [solve_cell(cell) for cell in cells]

    grid = [flat[m * k : (m + 1) * k] for m in range(k)]
    rates = np.array(
        [[s.sum_rate if s.feasible else -np.inf for s in row] for row in grid], dtype=float
    )
    return CostMatrix.from_rates(rates), grid


def solve_network(
    realization: NetworkRealization,
    config: SystemConfig,
    pair_solver: Optional[PairSolver] = None,
    threads: int = 1,
) -> NetworkSolution:
    """
    Jointly pair users and control power for one cell realization.

    Args:
        realization: Gains of the cell, already split into weak and strong halves
        config: Budgets, QoS and transmission mode
        pair_solver: Replacement per-pair solver, e.g. fixed relay power
        threads: Worker threads for the cost-matrix fill

    Returns:
        Optimal assignment with the solution of each matched pair

    Raises:
        InfeasibleNetworkError: If the users cannot all be paired feasibly
    """
    solver = pair_solver or partial(solve_pair, config=config)
    cost, grid = fill_cost_matrix(realization, solver, threads)
    assignment = hungarian(cost)
    logger.debug(
        f"Paired {realization.k} strong users as {assignment.pairing}, "
        f"total rate {assignment.total_rate:.6g}"
    )
    pairs = [grid[m][n] for m, n in enumerate(assignment.pairing)]
    return NetworkSolution(assignment=assignment, pairs=pairs)
