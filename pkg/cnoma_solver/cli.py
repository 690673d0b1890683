"""
Command-line interface for cnoma-solver.
"""

import logging
import sys
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, List, Optional, Sequence

import numpy as np
import typer
from pydantic import ValidationError
from rich.console import Console
from rich.progress import Progress
from rich.table import Table

from cnoma_solver import __version__
from cnoma_solver.assignment import fill_cost_matrix, hungarian, solve_network
from cnoma_solver.channel import realization_from_gains, sample_network
from cnoma_solver.exceptions import (
    CnomaError,
    ConfigError,
    InfeasibleNetworkError,
    InfeasiblePairError,
    InfeasibleScenarioError,
)
from cnoma_solver.experiments import (
    baseline_pairing,
    evaluate_pairing,
    pair_solver_for,
    run_scenario,
)
from cnoma_solver.models.channels import ChannelStats
from cnoma_solver.models.config import (
    GridSpec,
    Mode,
    Pairing,
    PairProblem,
    RunConfig,
    Scenario,
    SystemConfig,
)
from cnoma_solver.models.solutions import BenchRow, NetworkSolution, PairSolution
from cnoma_solver.oracle import run_verification
from cnoma_solver.tools.config_parser import load_config
from cnoma_solver.tools.utils import (
    bench_frame,
    network_frame,
    pair_frame,
    sweep_frame,
    verification_frame,
    write_csv,
)


logger = logging.getLogger(__name__)

EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_VERIFICATION = 4

MAX_BENCH_K = 500

# Create the Typer app
app = typer.Typer(
    name="cnoma-solver",
    help="Joint user pairing and power control for cooperative NOMA cells",
)

console = Console()
# banners and progress; stdout carries results only
status = Console(stderr=True)

CONFIG_OPTION = typer.Option(..., "--config", "-c", help="Path to the key = value config file")
OUT_OPTION = typer.Option(None, "--out", "-o", help="Write the result as CSV to this path")
SEED_OPTION = typer.Option(0, "--seed", "-s", help="Root seed of every random stream")
SET_OPTION = typer.Option(None, "--set", help="Override a config key, as key=value (repeatable)")
THREADS_OPTION = typer.Option(1, "--threads", "-t", help="Worker threads")
VERBOSE_OPTION = typer.Option(False, "--verbose", "-v", help="Enable verbose logging")


def configure_logging() -> None:
    """Configure logging for the application."""
    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )


@app.callback()
def main() -> None:
    """Solve single pairs, whole cells and Monte-Carlo sweeps of C-NOMA cells."""
    configure_logging()


def _set_verbose(verbose: bool) -> None:
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)


def _error(e: Exception, verbose: bool, label: str = "Error") -> None:
    console.print(f"[bold red]{label}:[/bold red] {str(e)}")
    if verbose:
        console.print_exception()


@contextmanager
def _exit_codes(verbose: bool) -> Iterator[None]:
    """Translate library errors into the documented exit codes."""
    try:
        yield
    except (ConfigError, ValidationError) as e:
        _error(e, verbose, "Config error")
        raise typer.Exit(EXIT_CONFIG)
    except (InfeasiblePairError, InfeasibleNetworkError, InfeasibleScenarioError) as e:
        _error(e, verbose, "Infeasible")
        raise typer.Exit(EXIT_INFEASIBLE)
    except CnomaError as e:
        _error(e, verbose)
        raise typer.Exit(EXIT_FAILURE)


def _run_config(
    subcommand: str,
    config: Optional[Path],
    out: Optional[Path],
    seed: int,
    overrides: Optional[List[str]],
    threads: int,
) -> RunConfig:
    return RunConfig(
        subcommand=subcommand,
        config_path=config,
        output_path=out,
        seed=seed,
        overrides=overrides or [],
        threads=threads,
    )


def _load_scenario(run: RunConfig) -> Scenario:
    assert run.config_path is not None
    parsed = load_config(run.config_path, run.overrides)
    if not isinstance(parsed, Scenario):
        raise ConfigError(f"{run.subcommand} needs a scenario config, not pair gains")
    return parsed


def _report_saved(out: Optional[Path]) -> None:
    if out is not None:
        status.print(f"[bold green]Results saved to:[/bold green] {out}")


def _pair_table(solution: PairSolution) -> Table:
    table = Table(title=f"Pair solution ({solution.mode.value if solution.mode else '-'})")
    for column in ("alpha", "p_d", "r_strong", "r_weak", "sum_rate"):
        table.add_column(column, justify="right")
    decision = solution.decision
    assert decision is not None
    table.add_row(
        f"{decision.alpha:.9g}",
        f"{decision.p_d:.9g}",
        f"{solution.rates.r_strong:.9g}",
        f"{solution.rates.r_weak:.9g}",
        f"{solution.sum_rate:.9g}",
    )
    return table


def _network_table(solution: NetworkSolution) -> Table:
    table = Table(title=f"Network solution, total rate {solution.total_rate:.9g} bits/s/Hz")
    for column in ("strong", "weak", "mode", "alpha", "p_d", "sum_rate"):
        table.add_column(column, justify="right")
    for m, (n, pair) in enumerate(zip(solution.assignment.pairing, solution.pairs)):
        decision = pair.decision
        assert decision is not None and pair.mode is not None
        table.add_row(
            str(m + 1),
            str(n + 1),
            pair.mode.value,
            f"{decision.alpha:.6g}",
            f"{decision.p_d:.6g}",
            f"{pair.sum_rate:.6g}",
        )
    return table


@app.command("solve-pair")
def solve_pair_command(
    config: Path = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
    overrides: Optional[List[str]] = SET_OPTION,
    verbose: bool = VERBOSE_OPTION,
) -> None:
    """
    Solve the power control of a single pair given its realized gains.
    """
    _set_verbose(verbose)
    with _exit_codes(verbose):
        run = _run_config("solve-pair", config, out, 0, overrides, 1)
        problem = load_config(config, run.overrides)
        if not isinstance(problem, PairProblem):
            raise ConfigError(
                "solve-pair needs gamma_m_db, gamma_n_db, gamma_d_db and gamma_si_db"
            )
        solution = pair_solver_for(problem.system)(problem.channels)
        if not solution.feasible:
            raise InfeasiblePairError([], f"no feasible power control: {solution.reason}")

        console.print(_pair_table(solution))
        write_csv(pair_frame(solution), run.output_path)
        _report_saved(run.output_path)


@app.command("solve-network")
def solve_network_command(
    config: Path = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
    seed: int = SEED_OPTION,
    overrides: Optional[List[str]] = SET_OPTION,
    threads: int = THREADS_OPTION,
    verbose: bool = VERBOSE_OPTION,
) -> None:
    """
    Pair the users of one cell and solve each pair's power control.

    Direct-link gains come from ``user_gains_db`` when present, otherwise the cell
    is drawn from the configured statistics with trial index 0.
    """
    _set_verbose(verbose)
    with _exit_codes(verbose):
        run = _run_config("solve-network", config, out, seed, overrides, threads)
        scenario = _load_scenario(run)
        stats, system = scenario.at(scenario.sweep_values[0])
        if scenario.user_gains is not None:
            realization = realization_from_gains(scenario.user_gains, stats, run.seed)
        else:
            realization = sample_network(stats, scenario.k, run.seed)

        solver = pair_solver_for(system)
        if scenario.pairing is Pairing.HUNGARIAN:
            solution = solve_network(realization, system, solver, run.threads)
        else:
            pairing = baseline_pairing(scenario.pairing, realization.k, run.seed)
            solution = evaluate_pairing(realization, pairing, solver)

        console.print(_network_table(solution))
        write_csv(network_frame(solution), run.output_path)
        _report_saved(run.output_path)


@app.command("sweep")
def sweep_command(
    config: Path = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
    seed: int = SEED_OPTION,
    overrides: Optional[List[str]] = SET_OPTION,
    threads: int = THREADS_OPTION,
    verbose: bool = VERBOSE_OPTION,
) -> None:
    """
    Run a Monte-Carlo scenario and report the mean sum rate per swept value.
    """
    _set_verbose(verbose)
    with _exit_codes(verbose):
        run = _run_config("sweep", config, out, seed, overrides, threads)
        scenario = _load_scenario(run)
        status.print(
            f"Sweeping [bold]{scenario.sweep_axis.value}[/bold] over "
            f"{len(scenario.sweep_values)} values, {scenario.trials} trials each"
        )
        with Progress(console=status, transient=True) as progress:
            task = progress.add_task("Simulating", total=len(scenario.sweep_values))
            result = run_scenario(
                scenario,
                run.seed,
                threads=run.threads,
                progress=lambda _: progress.advance(task),
            )

        text = write_csv(sweep_frame(result), run.output_path)
        if run.output_path is None:
            typer.echo(text, nl=False)
        _report_saved(run.output_path)


@app.command("verify")
def verify_command(
    instances: int = typer.Option(200, "--instances", "-n", help="Random pair instances"),
    networks: int = typer.Option(
        20, "--networks", help="Sampled cells per size for pairing checks"
    ),
    max_k: int = typer.Option(7, "--max-k", help="Largest cell size checked by enumeration"),
    grid_points: int = typer.Option(2001, "--grid-points", help="Oracle grid points per axis"),
    tolerance: float = typer.Option(1e-4, "--tolerance", help="Allowed sum-rate gap"),
    out: Optional[Path] = OUT_OPTION,
    seed: int = SEED_OPTION,
    verbose: bool = VERBOSE_OPTION,
) -> None:
    """
    Check the closed-form solvers against the brute-force oracles.
    """
    _set_verbose(verbose)
    with _exit_codes(verbose):
        run = _run_config("verify", None, out, seed, None, 1)
        grid = GridSpec(alpha_points=grid_points, pd_points=grid_points)
        with Progress(console=status, transient=True) as progress:
            task = progress.add_task("Verifying", total=instances)
            report = run_verification(
                instances,
                run.seed,
                grid=grid,
                tolerance=tolerance,
                networks=networks,
                max_k=max_k,
                progress=lambda _: progress.advance(task),
            )

        table = Table(title="Verification")
        table.add_column("check")
        table.add_column("result", justify="right")
        table.add_row("instances (per mode)", str(report.instances))
        table.add_row("both feasible", str(report.both_feasible))
        table.add_row("max sum-rate gap", f"{report.max_gap:.3g}")
        table.add_row("feasibility disagreements", str(report.flag_disagreements))
        table.add_row("boundary-exempt", str(report.boundary_exempt))
        table.add_row("QoS violations", str(report.qos_violations))
        table.add_row("pairing mismatches", f"{report.pairing_mismatches}/{report.networks}")
        console.print(table)
        write_csv(verification_frame(report), run.output_path)

    if not report.passed:
        console.print("[bold red]Verification failed[/bold red]")
        raise typer.Exit(EXIT_VERIFICATION)
    console.print("[bold green]Verification passed[/bold green]")


def run_bench(
    k_values: Sequence[int],
    seed: int,
    repetitions: int = 5,
    system: Optional[SystemConfig] = None,
    stats: Optional[ChannelStats] = None,
    threads: int = 1,
) -> List[BenchRow]:
    """
    Time the cost-matrix fill and the matching for each cell size.

    Args:
        k_values: Pair counts to time
        seed: Root seed; repetition r uses trial index r
        repetitions: Timed runs per size, the median is reported
        system: Budgets and scheme, FD at 40 dBm / 30 dBm and 1 bit/s/Hz by default
        stats: Channel statistics
        threads: Worker threads for the fill

    Returns:
        One row of median timings per size
    """
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    system = system or SystemConfig(p_bs=1e4, p_d_max=1e3, r_th=1.0, mode=Mode.FD)
    stats = stats or ChannelStats.from_db(
        lambda_s_db=10.0, lambda_w_db=6.0, lambda_d_db=6.0, lambda_si_db=6.0
    )
    solver = pair_solver_for(system)

    rows = []
    for k in k_values:
        if not 1 <= k <= MAX_BENCH_K:
            raise ValueError(f"k must lie in [1, {MAX_BENCH_K}], got {k}")
        fills, matches = [], []
        for rep in range(repetitions):
            realization = sample_network(stats, k, seed, rep)
            start = time.perf_counter()
            cost, _ = fill_cost_matrix(realization, solver, threads)
            filled = time.perf_counter()
            try:
                hungarian(cost)
            except InfeasibleNetworkError as e:
                logger.debug(f"k={k} repetition {rep}: {e}")
            matched = time.perf_counter()
            fills.append(filled - start)
            matches.append(matched - filled)
        row = BenchRow(
            k=k,
            users=2 * k,
            fill_seconds=float(np.median(fills)),
            hungarian_seconds=float(np.median(matches)),
        )
        logger.info(f"k={k}: fill {row.fill_seconds:.4g}s, matching {row.hungarian_seconds:.4g}s")
        rows.append(row)
    return rows


def scaling_exponent(rows: Sequence[BenchRow], min_k: int = 10) -> Optional[float]:
    """Slope of log(matching time) against log(k) over sizes from ``min_k`` up."""
    points = [(row.k, row.hungarian_seconds) for row in rows if row.k >= min_k]
    points = [(k, t) for k, t in points if t > 0.0]
    if len({k for k, _ in points}) < 2:
        return None
    k, t = np.array(points, dtype=float).T
    return float(np.polyfit(np.log(k), np.log(t), 1)[0])


def _parse_k_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",")]
    except ValueError:
        raise typer.BadParameter(f"expected a comma list of integers, got {text!r}") from None


@app.command("bench")
def bench_command(
    k_list: str = typer.Option("1,10,25,50,100", "--k", "-k", help="Comma list of pair counts"),
    repetitions: int = typer.Option(5, "--repetitions", "-r", help="Timed runs per size"),
    config: Optional[Path] = typer.Option(
        None, "--config", "-c", help="Optional scenario config for budgets and statistics"
    ),
    out: Optional[Path] = OUT_OPTION,
    seed: int = SEED_OPTION,
    overrides: Optional[List[str]] = SET_OPTION,
    threads: int = THREADS_OPTION,
    verbose: bool = VERBOSE_OPTION,
) -> None:
    """
    Time the cost-matrix fill and the matching for growing cell sizes.
    """
    _set_verbose(verbose)
    k_values = _parse_k_list(k_list)
    if any(not 1 <= k <= MAX_BENCH_K for k in k_values):
        raise typer.BadParameter(f"every k must lie in [1, {MAX_BENCH_K}]", param_hint="--k")
    with _exit_codes(verbose):
        run = _run_config("bench", config, out, seed, overrides, threads)
        system = stats = None
        if run.config_path is not None:
            scenario = _load_scenario(run)
            stats, system = scenario.at(scenario.sweep_values[0])
        rows = run_bench(k_values, run.seed, repetitions, system, stats, run.threads)

        table = Table(title="Benchmark (median seconds)")
        for column in ("k", "users", "fill", "matching", "total"):
            table.add_column(column, justify="right")
        for row in rows:
            table.add_row(
                str(row.k),
                str(row.users),
                f"{row.fill_seconds:.4g}",
                f"{row.hungarian_seconds:.4g}",
                f"{row.total_seconds:.4g}",
            )
        console.print(table)
        exponent = scaling_exponent(rows)
        if exponent is not None:
            console.print(f"Matching time scales as k^[bold]{exponent:.2f}[/bold]")
        write_csv(bench_frame(rows), run.output_path)
        _report_saved(run.output_path)


@app.command("version")
def version() -> None:
    """Display the version of cnoma-solver."""
    console.print(f"cnoma-solver version: [bold]{__version__}[/bold]")


if __name__ == "__main__":
    app()
