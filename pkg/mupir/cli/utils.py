"""Helpers for CLI commands."""

from __future__ import annotations

import logging
from functools import wraps
from pathlib import Path
from typing import Any

import click
from rich.console import Console
from rich.table import Table
from rich import box

from mupir.errors import MupirError, ParameterError
from mupir.models.params import SystemParams, parse_t
from mupir.models.run_config import RunConfig
from mupir.utils.logging import log

# reports and tables go to stdout, logs to stderr
console = Console(highlight=False)


def handle_errors(fn):
    """Turn :class:`MupirError` into ``click.ClickException`` with its category."""

    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except MupirError as exc:
            raise click.ClickException(f"{exc.category} error: {exc}") from exc

    return wrapper


def system_params(
    servers: int,
    files: int,
    caches: int,
    access_degree: int,
    t: str,
    file_bytes: int | None,
    *,
    require_delivery: bool = True,
) -> SystemParams:
    """Validate CLI options into :class:`SystemParams`.

    ``file_bytes`` defaults to one byte per sub-subfile.
    """

    t_value = parse_t(t)
    if require_delivery and t_value + access_degree > caches:
        raise ParameterError(
            f"t + L must not exceed C; got t = {t_value}, L = {access_degree}, C = {caches}"
        )
    sizing = SystemParams(servers, files, caches, access_degree, t_value, 1)
    return SystemParams(
        servers, files, caches, access_degree, t_value, file_bytes or sizing.subpacketization
    )


def run_config(command: str, seed: int | None = None, **outputs: Any) -> RunConfig:
    ctx = click.get_current_context()
    params = {k: v for k, v in ctx.params.items() if k not in ("out",)}
    return RunConfig(
        command=command,
        params=params,
        seed=seed,
        outputs={k: str(v) for k, v in outputs.items() if v is not None},
        verbosity=logging.getLevelName(log.getEffectiveLevel()),
    )


def key_value_table(title: str, values: dict[str, str]) -> Table:
    table = Table(title=title, box=box.SIMPLE_HEAVY)
    table.add_column("Key")
    table.add_column("Value", overflow="fold")
    for k, v in values.items():
        table.add_row(k, v)
    return table


def out_dir_option(fn):
    return click.option(
        "--out",
        type=click.Path(file_okay=False, dir_okay=True, path_type=Path),
        default=None,
        help="Directory for report files",
    )(fn)
