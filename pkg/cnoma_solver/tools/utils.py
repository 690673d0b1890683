"""
Tabular output helpers for cnoma-solver.

Every CSV goes through pandas with a fixed float format and ``\\n`` line endings, so
identical results give byte-identical files.
"""

from pathlib import Path
from typing import Optional, Sequence, Union

import pandas as pd

from cnoma_solver.models.solutions import (
    BenchRow,
    NetworkSolution,
    PairSolution,
    SweepResult,
    VerificationReport,
)

FLOAT_FORMAT = "%.9g"


def sweep_frame(result: SweepResult) -> pd.DataFrame:
    """One row per swept value; ``axis`` holds the value in config units."""
    return pd.DataFrame(
        {
            "axis": result.values,
            "mean_sum_rate": result.mean_sum_rate,
            "stderr": result.stderr,
            "infeasible_frac": result.infeasible_frac,
            "trials": [result.trials] * len(result.values),
            "mean_pair_rate": result.mean_pair_rate,
        }
    )


def _pair_row(solution: PairSolution) -> dict:
    decision = solution.decision
    return {
        "feasible": solution.feasible,
        "mode": solution.mode.value if solution.mode else "",
        "alpha": decision.alpha if decision else float("nan"),
        "p_d": decision.p_d if decision else float("nan"),
        "r_strong": solution.rates.r_strong,
        "r_weak": solution.rates.r_weak,
        "sum_rate": solution.sum_rate,
    }


def pair_frame(solution: PairSolution) -> pd.DataFrame:
    return pd.DataFrame([_pair_row(solution)])


def network_frame(solution: NetworkSolution) -> pd.DataFrame:
    """One row per matched pair, users numbered from 1 within their half."""
    rows = []
    for m, (n, pair) in enumerate(zip(solution.assignment.pairing, solution.pairs)):
        rows.append({"strong_user": m + 1, "weak_user": n + 1, **_pair_row(pair)})
    return pd.DataFrame(rows)


def bench_frame(rows: Sequence[BenchRow]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "k": row.k,
                "users": row.users,
                "fill_seconds": row.fill_seconds,
                "hungarian_seconds": row.hungarian_seconds,
                "total_seconds": row.total_seconds,
            }
            for row in rows
        ]
    )


def verification_frame(report: VerificationReport) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "instances": report.instances,
                "both_feasible": report.both_feasible,
                "flag_disagreements": report.flag_disagreements,
                "boundary_exempt": report.boundary_exempt,
                "max_gap": report.max_gap,
                "qos_violations": report.qos_violations,
                "networks": report.networks,
                "pairing_mismatches": report.pairing_mismatches,
                "passed": report.passed,
            }
        ]
    )


def write_csv(frame: pd.DataFrame, path: Optional[Union[str, Path]] = None) -> str:
    """
    Render a frame as CSV, writing it to ``path`` when given.

    Args:
        frame: Table to render
        path: Optional output file

    Returns:
        The CSV text
    """
    text = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    return text
