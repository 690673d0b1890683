"""
Tests for the brute-force oracles and the verification harness.
"""

import math

import numpy as np
import pytest

from cnoma_solver.exceptions import InfeasibleNetworkError, PairingTooLargeError
from cnoma_solver.models.channels import PairChannels
from cnoma_solver.models.config import GridSpec, Mode, SystemConfig
from cnoma_solver.oracle import _power_axis, exhaustive_pairing, grid_optimal, run_verification
from cnoma_solver.power_control import solve_pair


@pytest.fixture
def narrow_band_pair():
    """FD pair whose feasible relay powers lie in roughly [0.5, 0.9] out of a budget of 1e4."""
    return PairChannels(gamma_m=30.0, gamma_n=0.01, gamma_d=2.0, gamma_si=10.0)


class TestGridOptimal:
    """Tests for the grid search oracle."""

    def test_noma_optimum(self, one_bit, coarse_grid):
        """The grid finds the NOMA optimum log2(4.75) + 1."""
        ch = PairChannels(gamma_m=10.0, gamma_n=4.0, gamma_d=1.0, gamma_si=1.0)
        solution = grid_optimal(ch, 1.0, 5.0, one_bit, Mode.NOMA, coarse_grid)
        assert solution.feasible
        assert solution.decision.p_d == 0.0
        assert solution.sum_rate == pytest.approx(math.log2(4.75) + 1.0, abs=1e-4)

    def test_points_meet_qos_exactly(self, hd_pair, half_bit, coarse_grid):
        """The returned point meets the threshold without tolerance."""
        solution = grid_optimal(hd_pair, 1.0, 10.0, half_bit, Mode.HD, coarse_grid)
        assert solution.rates.r_strong >= half_bit.r_th
        assert solution.rates.r_weak >= half_bit.r_th

    def test_infeasible(self, hd_pair, half_bit, coarse_grid):
        """A BS-limited pair has no feasible grid point."""
        solution = grid_optimal(hd_pair, 0.25, 10.0, half_bit, Mode.HD, coarse_grid)
        assert not solution.feasible
        assert solution.mode is Mode.HD

    def test_zero_relay_budget(self, one_bit, coarse_grid):
        """A zero budget collapses the relay-power axis to a single point."""
        ch = PairChannels(gamma_m=10.0, gamma_n=4.0, gamma_d=1.0, gamma_si=1.0)
        fd = grid_optimal(ch, 1.0, 0.0, one_bit, Mode.FD, coarse_grid)
        noma = grid_optimal(ch, 1.0, 0.0, one_bit, Mode.NOMA, coarse_grid)
        assert fd.decision.p_d == 0.0
        assert fd.sum_rate == pytest.approx(noma.sum_rate)

    def test_refinement_improves(self, hd_pair, half_bit):
        """Refinement rounds never lose the incumbent."""
        rough = GridSpec(alpha_points=51, pd_points=51, refine_rounds=0)
        refined = GridSpec(alpha_points=51, pd_points=51, refine_rounds=3)
        a = grid_optimal(hd_pair, 1.0, 10.0, half_bit, Mode.HD, rough)
        b = grid_optimal(hd_pair, 1.0, 10.0, half_bit, Mode.HD, refined)
        assert b.sum_rate >= a.sum_rate

    def test_narrow_relay_band_found(self, narrow_band_pair, one_bit, coarse_grid):
        """A feasible band far below a large relay budget is found and resolved."""
        config = SystemConfig(p_bs=1.0, p_d_max=1e4, r_th=1.0, mode=Mode.FD)
        closed = solve_pair(narrow_band_pair, config)
        brute = grid_optimal(narrow_band_pair, 1.0, 1e4, one_bit, Mode.FD, coarse_grid)
        assert closed.feasible
        assert brute.feasible
        assert 0.49 < brute.decision.p_d < 0.9
        assert brute.sum_rate == pytest.approx(closed.sum_rate, abs=1e-4)

    def test_coarse_alpha_axis_reaches_optimum(self, narrow_band_pair, one_bit):
        """Column refinement climbs the ridge where alpha and p_d move together."""
        grid = GridSpec(alpha_points=51, pd_points=101)
        config = SystemConfig(p_bs=1.0, p_d_max=1e4, r_th=1.0, mode=Mode.FD)
        closed = solve_pair(narrow_band_pair, config)
        brute = grid_optimal(narrow_band_pair, 1.0, 1e4, one_bit, Mode.FD, grid)
        assert brute.sum_rate <= closed.sum_rate + 1e-9
        assert brute.sum_rate == pytest.approx(closed.sum_rate, abs=1e-4)

    def test_power_axis_has_geometric_points(self):
        """Small relay powers are sampled even when the linear step is large."""
        axis = _power_axis(1e4, GridSpec(alpha_points=11, pd_points=11, pd_floor=1e-4))
        assert axis[0] == 0.0
        assert axis[-1] == 1e4
        assert 1.0 in axis
        assert np.all(np.diff(axis) > 0.0)

    def test_mode_select_rejected(self, hd_pair, half_bit):
        """The grid works on concrete modes only."""
        with pytest.raises(ValueError):
            grid_optimal(hd_pair, 1.0, 10.0, half_bit, Mode.MODE_SELECT)


class TestExhaustivePairing:
    """Tests for full permutation enumeration."""

    def test_cross_pairing(self):
        """Off-diagonal pairs win."""
        assignment = exhaustive_pairing(np.array([[1.0, 5.0], [5.0, 1.0]]))
        assert assignment.pairing == [1, 0]
        assert assignment.total_rate == 10.0

    def test_ties_take_first_permutation(self):
        """Equal totals resolve to the identity."""
        assert exhaustive_pairing(np.ones((3, 3))).pairing == [0, 1, 2]

    def test_skips_infeasible_pairs(self):
        """Permutations through -inf entries are never chosen."""
        rates = np.array([[-np.inf, 3.0], [2.0, 100.0]])
        assignment = exhaustive_pairing(rates)
        assert assignment.pairing == [1, 0]
        assert assignment.total_rate == 5.0

    def test_infeasible_network(self):
        """A strong user without any feasible partner is reported."""
        rates = np.array([[-np.inf, -np.inf], [1.0, 2.0]])
        with pytest.raises(InfeasibleNetworkError) as excinfo:
            exhaustive_pairing(rates)
        assert excinfo.value.unmatched_rows == [0]

    def test_size_limit(self):
        """More than nine pairs are refused."""
        with pytest.raises(PairingTooLargeError):
            exhaustive_pairing(np.zeros((10, 10)))


class TestRunVerification:
    """Tests for the randomized verification harness."""

    def test_small_run(self):
        """A short run checks both modes and every sampled cell."""
        grid = GridSpec(alpha_points=101, pd_points=101)
        report = run_verification(3, seed=7, grid=grid, networks=2, max_k=3)
        assert report.instances == 6
        assert report.networks == 4
        assert report.pairing_mismatches == 0
        assert report.qos_violations == 0

    def test_deterministic(self):
        """The same seed reproduces the same report."""
        grid = GridSpec(alpha_points=51, pd_points=51, refine_rounds=1)
        first = run_verification(2, seed=3, grid=grid)
        second = run_verification(2, seed=3, grid=grid)
        assert first == second

    def test_pairing_sizes_limited(self):
        """Enumeration checks refuse cells larger than nine pairs."""
        with pytest.raises(PairingTooLargeError):
            run_verification(0, seed=0, networks=1, max_k=10)

    def test_seeded_batch_passes(self):
        """A seeded batch agrees with the oracle within 1e-4 and without feasibility flips."""
        grid = GridSpec(alpha_points=1001, pd_points=1001)
        report = run_verification(40, seed=0, grid=grid)
        assert report.instances == 80
        assert report.flag_disagreements == 0
        assert report.qos_violations == 0
        assert report.max_gap <= 1e-4
        assert report.passed
