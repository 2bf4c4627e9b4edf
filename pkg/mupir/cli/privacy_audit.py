"""Audit one server's view for dependence on the demand vector."""

from __future__ import annotations

from pathlib import Path

import click

from mupir.audit.privacy import DEFAULT_EXACT_CAP, exhaustive_privacy_check, statistical_privacy_check
from mupir.managers.report_manager import ReportManager, format_value
from mupir.models.access import AccessStructure
from mupir.utils.logging import log_call

from .utils import console, handle_errors, key_value_table, out_dir_option, run_config, system_params

REPORT_ORDER = [
    "command",
    "mode",
    "access",
    "servers",
    "files",
    "caches",
    "access_degree",
    "t",
    "server",
    "verdict",
    "lists",
    "max_tv",
    "support_sizes",
    "list_mass",
    "joint_mass",
    "expected_joint_mass",
    "samples",
    "alpha",
    "statistic",
    "p_value",
    "dof",
    "count_violations",
    "structure_violations",
    "seed",
]


@click.command("privacy-audit")
@click.option("--mode", type=click.Choice(["exact", "statistical"]), default="statistical", show_default=True)
@click.option("--servers", type=int, default=2, show_default=True, help="Replicated servers S")
@click.option("--files", type=int, default=2, show_default=True, help="Files N")
@click.option("--caches", type=int, default=3, show_default=True, help="Cache nodes C")
@click.option("--access-degree", type=int, default=1, show_default=True, help="Caches per user L")
@click.option("--t", "t", default="1", show_default=True, help="Cache replication t (integer)")
@click.option("--access", type=click.Choice(["full", "cyclic"]), default="full", show_default=True)
@click.option("--server", type=int, default=1, show_default=True, help="Server whose view is audited")
@click.option("--samples", type=int, default=200, show_default=True, help="Bundles per demand vector (statistical)")
@click.option("--alpha", type=float, default=0.01, show_default=True, help="Significance level (statistical)")
@click.option("--cap", type=int, default=DEFAULT_EXACT_CAP, show_default=True, help="Enumeration cap (exact)")
@click.option("--seed", type=int, default=0, show_default=True, help="Root seed (statistical)")
@click.option("--workers", type=int, default=1, show_default=True, help="Threads sampling demand vectors")
@out_dir_option
@handle_errors
@log_call
def cli_privacy_audit(
    mode: str,
    servers: int,
    files: int,
    caches: int,
    access_degree: int,
    t: str,
    access: str,
    server: int,
    samples: int,
    alpha: float,
    cap: int,
    seed: int,
    workers: int,
    out: Path | None,
) -> None:
    """Server privacy of the per-subset PIR queries.

    Exits non-zero when the audited server can tell demand vectors apart.
    """

    params = system_params(servers, files, caches, access_degree, t, None)
    if access == "full":
        structure = AccessStructure.full(caches, access_degree)
    else:
        structure = AccessStructure.cyclic(caches, access_degree)

    values: dict[str, object] = {
        "command": "privacy-audit",
        "mode": mode,
        "access": access,
        **{k: v for k, v in params.as_dict().items() if k != "file_bytes"},
        "server": server,
    }
    if mode == "exact":
        result = exhaustive_privacy_check(params, structure, server, cap=cap)
        values.update(
            verdict="PASS" if result.passed else "FAIL",
            lists=result.num_lists,
            max_tv=result.max_tv,
            support_sizes={d.replace(",", " "): n for d, n in result.support_sizes.items()},
            list_mass=result.list_mass,
            joint_mass=result.joint_mass,
            expected_joint_mass=result.expected_joint_mass,
        )
        header = ["demand", "lists", "support", "mass"]
    else:
        result = statistical_privacy_check(
            params, structure, server, samples, alpha, seed=seed, workers=workers
        )
        values.update(
            verdict="PASS" if result.passed else "FAIL",
            samples=samples,
            alpha=alpha,
            statistic=f"{result.statistic:.6f}",
            p_value=f"{result.p_value:.6g}",
            dof=result.dof,
            count_violations=result.count_violations,
            structure_violations=result.structure_violations,
            seed=seed,
        )
        header = ["demand", "samples", "lists", "count_violations", "structure_violations", "statistic", "p_value"]

    console.print(key_value_table("mupir privacy-audit", {k: format_value(values[k]) for k in REPORT_ORDER if k in values}))

    if out is not None:
        reports = ReportManager(out)
        reports.write_report(values, REPORT_ORDER)
        rows = result.rows
        if mode == "statistical":
            rows = [{**r, "statistic": f"{r['statistic']:.6f}", "p_value": f"{r['p_value']:.6g}"} for r in rows]
        reports.write_csv("privacy.csv", header, rows)
        reports.write_run_config(run_config("privacy-audit", seed if mode == "statistical" else None, dir=out))

    if not result.passed:
        raise click.ClickException(f"privacy audit failed: server {server} view depends on the demands")
