"""Evaluate the closed-form rates over the memory points."""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import click
from rich import box
from rich.table import Table

from mupir.analysis.rates import (
    RatePoint,
    decimal,
    format_rate,
    memory_sharing_envelope,
    optimality_ratio,
    rate_dedicated_cyclic_sweep,
    rate_nopir,
    rate_product_design,
    rate_theorem1,
    rate_theorem3,
)
from mupir.errors import ParameterError
from mupir.managers.report_manager import ReportManager
from mupir.utils.combinatorics import binom
from mupir.utils.logging import log, log_call

from .utils import console, handle_errors, out_dir_option, run_config

MODES = ["theorem1", "nopir", "product", "theorem3", "ratio", "envelope", "cyclic"]
SWEEP_COLUMNS = ["cyclic", "dedicated", "theorem3", "envelope"]


def _points(mode: str, caches: int, access_degree: int, users: int, servers: int, files: int, ts) -> list[RatePoint]:
    points = []
    for t in ts:
        if mode == "theorem1":
            rate, k = rate_theorem1(caches, access_degree, t, servers, files), binom(caches, access_degree)
        elif mode == "nopir":
            rate, k = rate_nopir(caches, access_degree, t), binom(caches, access_degree)
        elif mode == "ratio":
            rate, k = optimality_ratio(caches, access_degree, t, servers, files), 1
        elif mode == "product":
            rate, k = rate_product_design(users, t, servers, files), users
        else:
            rate, k = rate_theorem3(caches, access_degree, t, servers, files), caches
        points.append(RatePoint(Fraction(t), rate, k, mode))
    return points


@click.command("rates")
@click.option("--mode", type=click.Choice(MODES), default="theorem1", show_default=True)
@click.option("--caches", type=int, default=5, show_default=True, help="Cache nodes C")
@click.option("--access-degree", type=int, default=3, show_default=True, help="Caches per user L")
@click.option("--users", type=int, default=None, help="Users K of the product design (default: C)")
@click.option("--servers", type=int, default=2, show_default=True, help="Replicated servers S")
@click.option("--files", type=int, default=3, show_default=True, help="Files N")
@click.option("--t", "t", default=None, help="One memory point (default: every valid t); envelope mode accepts p/q")
@out_dir_option
@handle_errors
@log_call
def cli_rates(
    mode: str,
    caches: int,
    access_degree: int,
    users: int | None,
    servers: int,
    files: int,
    t: str | None,
    out: Path | None,
) -> None:
    """Closed-form private rates, the PIR overhead ratio and the cyclic envelope.

    ``theorem1`` is the multi-access rate, ``product`` the dedicated-cache
    baseline, ``theorem3`` the cyclic wraparound rate.  ``cyclic`` prints the
    per-user sweep of all cyclic options; ``envelope`` its memory sharing
    envelope.
    """

    if mode in ("envelope", "cyclic"):
        rows = rate_dedicated_cyclic_sweep(caches, access_degree, servers, files)
        if mode == "envelope" and t is not None:
            try:
                point = Fraction(t)
            except ValueError:
                raise ParameterError(f"t must be a number or p/q; got {t!r}") from None
            envelope = memory_sharing_envelope((r["t"], r["theorem3"]) for r in rows)
            value = envelope(point)
            console.print(f"envelope({point}) = {format_rate(value)}")
            console.print(f"per_user = {format_rate(value / caches)}")
            return
        columns = ["envelope"] if mode == "envelope" else SWEEP_COLUMNS
        table = Table(title=f"cyclic C={caches} L={access_degree} (per user)", box=box.SIMPLE_HEAVY)
        table.add_column("t", justify="right")
        for col in columns:
            table.add_column(col, justify="right")
        for r in rows:
            table.add_row(str(r["t"]), *(format_rate(r[f"{c}_per_user"]) for c in columns))
        console.print(table)
        if out is not None:
            header = ["t"] + [f"{c}{suffix}" for c in columns for suffix in ("_per_user", "_per_user_dec")]
            csv_rows = [
                {"t": r["t"], **{f"{c}_per_user": r[f"{c}_per_user"] for c in columns},
                 **{f"{c}_per_user_dec": decimal(r[f"{c}_per_user"]) for c in columns}}
                for r in rows
            ]
            _write(out, f"rates_{mode}.csv", header, csv_rows)
        return

    users = users if users is not None else caches
    if t is not None:
        try:
            ts = [int(t)]
        except ValueError:
            raise ParameterError(f"t must be an integer outside envelope mode; got {t!r}") from None
    elif mode == "product":
        ts = range(users + 1)
    else:
        ts = range(caches - access_degree + 1)

    points = _points(mode, caches, access_degree, users, servers, files, ts)
    table = Table(title=f"{mode} S={servers} N={files}", box=box.SIMPLE_HEAVY)
    table.add_column("t", justify="right")
    table.add_column("rate", justify="right")
    table.add_column("K", justify="right")
    table.add_column("per user", justify="right")
    for p in points:
        table.add_row(str(p.t), format_rate(p.rate), str(p.users), format_rate(p.per_user_rate))
    console.print(table)
    log.verbose(f"{len(points)} rate points for mode {mode}")

    if out is not None:
        header = ["t", "rate", "rate_dec", "users", "per_user", "per_user_dec"]
        rows = [
            {
                "t": p.t,
                "rate": p.rate,
                "rate_dec": decimal(p.rate),
                "users": p.users,
                "per_user": p.per_user_rate,
                "per_user_dec": decimal(p.per_user_rate),
            }
            for p in points
        ]
        _write(out, f"rates_{mode}.csv", header, rows)


def _write(out: Path, name: str, header: list[str], rows: list[dict]) -> None:
    reports = ReportManager(out)
    reports.write_csv(name, header, rows)
    reports.write_run_config(run_config("rates", None, dir=out))
