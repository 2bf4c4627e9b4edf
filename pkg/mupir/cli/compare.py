"""Compare multi-access and dedicated-cache per-user rates."""

from __future__ import annotations

from pathlib import Path

import click
from rich import box
from rich.table import Table

from mupir.analysis.rates import SCENARIO_HEADER, compare_scenarios
from mupir.managers.report_manager import ReportManager
from mupir.utils.logging import log, log_call

from .utils import console, handle_errors, out_dir_option, run_config


@click.command("compare")
@click.option(
    "--scenario",
    "scenarios",
    type=click.IntRange(1, 4),
    multiple=True,
    help="Scenario number (repeatable; default: all four)",
)
@click.option("--caches", type=int, default=8, show_default=True, help="Cache nodes C")
@click.option("--servers", type=int, default=2, show_default=True, help="Replicated servers S")
@click.option("--files", type=int, default=3, show_default=True, help="Files N")
@out_dir_option
@handle_errors
@log_call
def cli_compare(scenarios: tuple[int, ...], caches: int, servers: int, files: int, out: Path | None) -> None:
    """Per-user rate of the multi-access scheme against the product design.

    \b
    1  same caches, same cache size
    2  same caches, same memory per user
    3  same users, same total memory
    4  cyclic wraparound access, same caches and cache size
    """

    tables = compare_scenarios(caches, servers, files, scenarios or (1, 2, 3, 4))
    reports = ReportManager(out) if out is not None else None

    for number, scenario in tables.items():
        table = Table(title=f"Scenario {number}: {scenario.title}", box=box.SIMPLE_HEAVY)
        for col in ("L", "t_ma", "t_dc", "per_user_ma_dec", "per_user_dc_dec", "ratio", "interpolated"):
            table.add_column(col, justify="right")
        for row in scenario.rows:
            csv = row.as_csv_row()
            table.add_row(
                csv["L"], csv["t_ma"], csv["t_dc"], csv["per_user_ma_dec"], csv["per_user_dc_dec"],
                csv["ratio"] or "-", csv["interpolated"],
            )
        console.print(table)
        for note in scenario.notes:
            log.verbose(f"scenario {number}: {note}")
        if reports is not None:
            reports.write_csv(
                f"scenario_{number}.csv", SCENARIO_HEADER, (row.as_csv_row() for row in scenario.rows)
            )

    if reports is not None:
        reports.write_run_config(run_config("compare", None, dir=out))
