"""
Tests for baseline pairings, the fixed relay power variant and Monte-Carlo scenarios.
"""

import math
from typing import List

import pytest

from cnoma_solver.assignment import solve_network
from cnoma_solver.channel import db_to_linear, sample_network
from cnoma_solver.exceptions import InfeasibleNetworkError, InfeasibleScenarioError
from cnoma_solver.experiments import (
    baseline_pairing,
    evaluate_pairing,
    fixed_relay_variant,
    pair_solver_for,
    run_scenario,
)
from cnoma_solver.models.channels import ChannelStats, NetworkRealization, PairChannels
from cnoma_solver.models.config import (
    Mode,
    Pairing,
    RelayPower,
    Scenario,
    SweepAxis,
    SystemConfig,
)
from cnoma_solver.power_control import solve_pair


@pytest.fixture
def small_cell():
    return NetworkRealization(
        g=[0.1, 0.2, 3.0, 4.0], d=[[1.0, 2.0], [3.0, 4.0]], s=[0.5, 0.6]
    )


def _scenario(stats, **overrides) -> Scenario:
    fields = dict(
        stats=stats,
        k=2,
        p_bs=1e5,
        p_d_max=1e3,
        r_th=0.25,
        trials=8,
        mode=Mode.FD,
        sweep_axis=SweepAxis.P_BS,
        sweep_values=[1e5],
    )
    fields.update(overrides)
    return Scenario(**fields)


class TestBaselinePairing:
    """Tests for the non-optimizing pairing rules."""

    def test_baseline1_reverses(self):
        """The weakest strong user gets the strongest weak user."""
        assert baseline_pairing(Pairing.BASELINE1, 3, seed=0) == [2, 1, 0]

    def test_baseline2_identity(self):
        """Users are paired in order."""
        assert baseline_pairing(Pairing.BASELINE2, 3, seed=0) == [0, 1, 2]

    def test_random_is_reproducible_permutation(self):
        """A trial's random pairing is a permutation fixed by its key."""
        first = baseline_pairing(Pairing.RANDOM, 6, seed=2, trial=5)
        assert sorted(first) == list(range(6))
        assert baseline_pairing(Pairing.RANDOM, 6, seed=2, trial=5) == first

    def test_hungarian_is_not_a_baseline(self):
        """The optimal rule is rejected."""
        with pytest.raises(ValueError):
            baseline_pairing(Pairing.HUNGARIAN, 3, seed=0)


class TestFixedRelayVariant:
    """Tests for full relay power."""

    def test_hd_matches_adaptive_below_intersection(self, hd_pair, half_bit):
        """Below P_int the adaptive optimum already uses the full budget."""
        fixed = fixed_relay_variant(hd_pair, 1.0, 0.5, half_bit, Mode.HD)
        assert fixed.decision.p_d == 0.5
        assert fixed.decision.alpha == pytest.approx(2.0 / 3.0)
        assert fixed.sum_rate == pytest.approx(0.5 * math.log2(13.0 / 3.0) + 0.5)

    def test_fd_full_power_can_be_infeasible(self, one_bit):
        """Self-interference at full relay power breaks a pair adaptive control serves."""
        ch = PairChannels(gamma_m=10.0, gamma_n=1.0, gamma_d=1.0, gamma_si=1.0)
        fixed = fixed_relay_variant(ch, 1.0, 10.0, one_bit, Mode.FD)
        config = SystemConfig(p_bs=1.0, p_d_max=10.0, r_th=1.0, mode=Mode.FD)
        assert not fixed.feasible
        assert solve_pair(ch, config).feasible

    def test_mode_select_takes_best(self, hd_pair, half_bit):
        """Mode selection returns the better of the two fixed variants."""
        hd = fixed_relay_variant(hd_pair, 1.0, 0.5, half_bit, Mode.HD)
        fd = fixed_relay_variant(hd_pair, 1.0, 0.5, half_bit, Mode.FD)
        both = fixed_relay_variant(hd_pair, 1.0, 0.5, half_bit, Mode.MODE_SELECT)
        best = max((s for s in (hd, fd) if s.feasible), key=lambda s: s.sum_rate)
        assert both.sum_rate == best.sum_rate

    def test_noma_rejected(self, hd_pair, half_bit):
        """NOMA has no relay."""
        with pytest.raises(ValueError):
            fixed_relay_variant(hd_pair, 1.0, 0.5, half_bit, Mode.NOMA)


class TestPairSolverFor:
    """Tests for selecting the per-pair solver."""

    def test_fixed_policy(self):
        """Fixed relay power selects the full-power variant."""
        config = SystemConfig(p_bs=1.0, p_d_max=1.0, relay_power=RelayPower.FIXED)
        assert pair_solver_for(config).func is fixed_relay_variant

    def test_noma_ignores_policy(self):
        """NOMA always uses the optimal solver."""
        config = SystemConfig(
            p_bs=1.0, p_d_max=1.0, mode=Mode.NOMA, relay_power=RelayPower.FIXED
        )
        assert pair_solver_for(config).func is solve_pair


class TestEvaluatePairing:
    """Tests for solving a given pairing."""

    def test_total(self, small_cell):
        """The total is the sum of the pairs in the given order."""
        config = SystemConfig(p_bs=1e5, p_d_max=1e3, r_th=0.25, mode=Mode.NOMA)
        solution = evaluate_pairing(small_cell, [1, 0], pair_solver_for(config))
        assert solution.assignment.pairing == [1, 0]
        assert solution.total_rate == pytest.approx(
            math.fsum(pair.sum_rate for pair in solution.pairs)
        )

    def test_infeasible_pairs_reported(self, small_cell):
        """Every infeasible pair of the pairing is named."""
        config = SystemConfig(p_bs=1e-6, p_d_max=1e-6, r_th=2.0, mode=Mode.HD)
        with pytest.raises(InfeasibleNetworkError) as excinfo:
            evaluate_pairing(small_cell, [0, 1], pair_solver_for(config))
        assert excinfo.value.unmatched_rows == [0, 1]


class TestRunScenario:
    """Tests for Monte-Carlo sweeps."""

    def test_threads_do_not_change_result(self, rich_stats):
        """Trial results are keyed by trial index, not by worker."""
        scenario = _scenario(rich_stats, sweep_values=[1e4, 1e5])
        assert run_scenario(scenario, seed=3) == run_scenario(scenario, seed=3, threads=3)

    def test_single_trial_is_one_network(self, rich_stats):
        """With one trial the mean is the solved network total."""
        scenario = _scenario(rich_stats, trials=1)
        result = run_scenario(scenario, seed=5)
        config = SystemConfig(p_bs=1e5, p_d_max=1e3, r_th=0.25, mode=Mode.FD)
        network = solve_network(sample_network(rich_stats, 2, seed=5, trial=0), config)
        assert result.mean_sum_rate == [pytest.approx(network.total_rate)]
        assert result.mean_pair_rate == [pytest.approx(network.total_rate / 2)]
        assert result.stderr == [0.0]

    def test_self_interference_lowers_fd_rate(self, rich_stats):
        """Stronger self-interference never raises the FD sum rate."""
        scenario = _scenario(
            rich_stats,
            k=1,
            trials=20,
            sweep_axis=SweepAxis.LAMBDA_SI,
            sweep_values=[0.01, 1.0, 100.0],
        )
        result = run_scenario(scenario, seed=1)
        assert result.infeasible == [0, 0, 0]
        rates = result.mean_sum_rate
        assert rates[0] >= rates[1] - 1e-6
        assert rates[1] >= rates[2] - 1e-6

    def test_mode_select_beats_noma(self, rich_stats):
        """Relaying with mode selection is never worse than plain NOMA."""
        noma = run_scenario(_scenario(rich_stats, mode=Mode.NOMA), seed=2)
        selected = run_scenario(_scenario(rich_stats, mode=Mode.MODE_SELECT), seed=2)
        assert noma.infeasible == [0]
        assert selected.mean_sum_rate[0] >= noma.mean_sum_rate[0] - 1e-6

    @pytest.mark.parametrize("rule", [Pairing.BASELINE1, Pairing.BASELINE2, Pairing.RANDOM])
    def test_baseline_pairing_not_better(self, rich_stats, rule):
        """A fixed pairing rule never beats the optimal matching."""
        optimal = run_scenario(_scenario(rich_stats), seed=4)
        baseline = run_scenario(_scenario(rich_stats, pairing=rule), seed=4)
        assert optimal.infeasible == baseline.infeasible == [0]
        assert baseline.mean_sum_rate[0] <= optimal.mean_sum_rate[0] + 1e-6

    def test_all_trials_infeasible(self, default_stats):
        """A value with no feasible trial makes the scenario infeasible."""
        scenario = _scenario(
            default_stats, p_bs=1e-6, p_d_max=1e-6, r_th=2.0, mode=Mode.HD, sweep_values=[1e-6]
        )
        with pytest.raises(InfeasibleScenarioError) as excinfo:
            run_scenario(scenario, seed=0)
        assert excinfo.value.trials == 8


class TestSweepTrends:
    """Seeded small-scale checks of the trends the experiment configs are meant to show."""

    def test_d2d_advantage_fades_under_self_interference(self):
        """A stronger D2D link helps under weak SI and stops mattering under strong SI."""
        sweep = dict(
            k=1,
            p_bs=30.0,
            p_d_max=1e3,
            r_th=1.0,
            trials=60,
            sweep_axis=SweepAxis.LAMBDA_SI,
            sweep_values=[db_to_linear(-5.0), db_to_linear(60.0)],
        )
        results = [
            run_scenario(
                _scenario(
                    ChannelStats.from_db(
                        lambda_s_db=12.0,
                        lambda_w_db=3.0,
                        lambda_d_db=lambda_d_db,
                        lambda_si_db=-5.0,
                    ),
                    **sweep,
                ),
                seed=11,
            )
            for lambda_d_db in (12.0, 3.0)
        ]
        strong, weak = (r.mean_sum_rate for r in results)
        low_si_gap = strong[0] - weak[0]
        high_si_gap = strong[1] - weak[1]
        assert low_si_gap > 0.0
        assert high_si_gap < low_si_gap

    def test_cooperation_beats_noma_under_every_rule(self, rich_stats):
        """For a given pairing rule FD relaying never loses to plain NOMA."""
        for rule in Pairing:
            noma = run_scenario(_scenario(rich_stats, mode=Mode.NOMA, pairing=rule), seed=6)
            fd = run_scenario(_scenario(rich_stats, pairing=rule), seed=6)
            assert noma.infeasible == fd.infeasible == [0]
            assert fd.mean_sum_rate[0] >= noma.mean_sum_rate[0] - 1e-6

    def test_reversed_pairing_serves_every_servable_cell(self, default_stats):
        """In NOMA mode the reversed pairing fails only when every pairing fails."""
        counts = {
            rule: run_scenario(
                _scenario(
                    default_stats,
                    k=4,
                    r_th=1.0,
                    trials=30,
                    mode=Mode.NOMA,
                    pairing=rule,
                    sweep_values=[10.0, 100.0],
                ),
                seed=9,
            ).infeasible
            for rule in Pairing
        }
        assert counts[Pairing.BASELINE1] == counts[Pairing.HUNGARIAN]
        for rule in (Pairing.BASELINE2, Pairing.RANDOM):
            assert all(
                b1 <= other for b1, other in zip(counts[Pairing.BASELINE1], counts[rule])
            )

    def test_fixed_relay_power_favours_hd_then_fd(self):
        """With the relay at full power HD wins at a low BS budget and FD at a high one."""
        stats = ChannelStats.from_db(
            lambda_s_db=10.0, lambda_w_db=6.0, lambda_d_db=6.0, lambda_si_db=6.0
        )
        hd, fd = (
            run_scenario(
                _scenario(
                    stats,
                    k=1,
                    p_d_max=1e4,
                    r_th=1.0,
                    trials=40,
                    mode=mode,
                    relay_power=RelayPower.FIXED,
                    sweep_values=[1e6, 1e12],
                ),
                seed=12,
            ).mean_sum_rate
            for mode in (Mode.HD, Mode.FD)
        )
        assert hd[0] > fd[0]
        assert fd[1] > hd[1]

    def test_adaptive_fd_ignores_surplus_relay_budget(self):
        """Once the budget exceeds every trial's optimal relay power the FD rate is flat."""
        stats = ChannelStats.from_db(
            lambda_s_db=10.0, lambda_w_db=6.0, lambda_d_db=6.0, lambda_si_db=0.0
        )
        result = run_scenario(
            _scenario(
                stats,
                k=1,
                p_bs=db_to_linear(42.0),
                r_th=1.0,
                trials=30,
                sweep_axis=SweepAxis.P_D_MAX,
                sweep_values=[1e6, 1e9],
            ),
            seed=13,
        )
        assert result.infeasible[0] == result.infeasible[1]
        assert result.mean_sum_rate[1] == pytest.approx(result.mean_sum_rate[0], rel=1e-9)

    def test_fixed_mode_select_moves_from_fd_to_hd(self):
        """At full relay power selection follows FD for a tiny budget and HD for a huge one."""
        stats = ChannelStats.from_db(
            lambda_s_db=10.0, lambda_w_db=6.0, lambda_d_db=6.0, lambda_si_db=0.0
        )
        def mean_rates(mode: Mode, budgets: List[float]) -> List[float]:
            scenario = _scenario(
                stats,
                k=1,
                p_bs=db_to_linear(42.0),
                r_th=1.0,
                trials=30,
                mode=mode,
                relay_power=RelayPower.FIXED,
                sweep_axis=SweepAxis.P_D_MAX,
                sweep_values=budgets,
            )
            return run_scenario(scenario, seed=14).mean_sum_rate

        # full-power FD cannot meet QoS at the huge budget
        fd = mean_rates(Mode.FD, [1e-6])
        hd = mean_rates(Mode.HD, [1e-6, 1e8])
        selected = mean_rates(Mode.MODE_SELECT, [1e-6, 1e8])
        assert fd[0] > hd[0]
        assert selected[0] == pytest.approx(fd[0], rel=1e-12)
        assert selected[1] == pytest.approx(hd[1], rel=1e-12)

    def test_adaptive_never_below_fixed(self, default_stats):
        """On sampled pairs the adaptive optimum is at least the full-power variant."""
        for mode in (Mode.HD, Mode.FD, Mode.MODE_SELECT):
            config = SystemConfig(p_bs=1e3, p_d_max=10.0, r_th=1.0, mode=mode)
            for trial in range(10):
                cell = sample_network(default_stats, 2, seed=15, trial=trial)
                for m in range(2):
                    for n in range(2):
                        ch = cell.pair_channels(m, n)
                        fixed = fixed_relay_variant(ch, 1e3, 10.0, config.qos, mode)
                        if not fixed.feasible:
                            continue
                        adaptive = solve_pair(ch, config)
                        assert adaptive.feasible
                        assert adaptive.sum_rate >= fixed.sum_rate - 1e-7
