"""Count k-subsets of a circle that hold a run of m consecutive positions."""

from __future__ import annotations

from pathlib import Path

import click

from mupir.errors import DomainError
from mupir.managers.report_manager import ReportManager
from mupir.utils.combinatorics import DEFAULT_ORACLE_CAP, cyc_closed_form, cyc_oracle
from mupir.utils.logging import log_call

from .utils import console, handle_errors, out_dir_option, run_config

CSV_HEADER = ["n", "k", "m", "K1", "K2", "K3", "K41", "K42", "total", "oracle"]


@click.command("cyc")
@click.option("--n", "n", type=int, required=True, help="Positions on the circle")
@click.option("--k", "k", type=int, required=True, help="Subset size")
@click.option("--m", "m", type=int, required=True, help="Required run length")
@click.option("--breakdown", is_flag=True, help="Print the component counts")
@click.option("--oracle", is_flag=True, help="Cross-check by enumeration")
@click.option("--cap", type=int, default=DEFAULT_ORACLE_CAP, show_default=True, help="Largest n the oracle enumerates")
@out_dir_option
@handle_errors
@log_call
def cli_cyc(n: int, k: int, m: int, breakdown: bool, oracle: bool, cap: int, out: Path | None) -> None:
    """cyc(n, k, m): subsets of cyclic cache indices that serve a wraparound user.

    With ``--out`` the counts are also written to ``cyc.csv``.
    """

    result = cyc_closed_form(n, k, m)
    console.print(f"cyc({n},{k},{m}) = {result.total}")
    if breakdown:
        for key, value in result.as_dict().items():
            if key != "total":
                console.print(f"{key} = {value}")
    counted = None
    if oracle:
        counted = cyc_oracle(n, k, m, cap=cap)
        console.print(f"oracle = {counted}")

    if out is not None:
        reports = ReportManager(out)
        row = {"n": n, "k": k, "m": m, **result.as_dict(), "oracle": counted if counted is not None else ""}
        reports.write_csv("cyc.csv", CSV_HEADER, [row])
        reports.write_run_config(run_config("cyc", None, dir=out))

    if counted is not None and counted != result.total:
        raise DomainError(f"closed form {result.total} disagrees with enumeration {counted}")
