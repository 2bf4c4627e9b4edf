"""Show one single-user PIR instance symbol by symbol."""

from __future__ import annotations

import click
import numpy as np
from rich import box
from rich.table import Table

from mupir.analysis.rates import format_rate
from mupir.models.params import PirParams
from mupir.pir.core import check_query_structure, pir_answer, pir_decode, pir_generate_queries, pir_rate
from mupir.pir.core import render_answer_sum, render_sum
from mupir.utils.logging import log, log_call

from .utils import console, handle_errors


@click.command("pir-demo")
@click.option("--servers", type=int, default=2, show_default=True, help="Replicated servers S")
@click.option("--files", type=int, default=3, show_default=True, help="Messages N")
@click.option("--desired", type=int, default=1, show_default=True, help="Index of the wanted message")
@click.option("--symbol-bytes", type=int, default=4, show_default=True, help="Bytes per sub-symbol")
@click.option(
    "--order",
    type=click.Choice(["structural", "sorted"]),
    default="structural",
    show_default=True,
    help="Construction order or the order servers receive",
)
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for permutations and messages")
@click.option("--answers", "show_answers", is_flag=True, help="Also print the symbolic answers")
@handle_errors
@log_call
def cli_pir_demo(
    servers: int,
    files: int,
    desired: int,
    symbol_bytes: int,
    order: str,
    seed: int,
    show_answers: bool,
) -> None:
    """Capacity-achieving single-user PIR: query table, answers and decoding."""

    params = PirParams(servers, files)
    perm_seq, data_seq = np.random.SeedSequence(seed).spawn(2)
    perms, queries = pir_generate_queries(desired, params, np.random.default_rng(perm_seq), order=order)
    check_query_structure(queries, params, desired)

    table = Table(title=f"Queries for message {desired}", box=box.SIMPLE_HEAVY)
    table.add_column("Block", justify="right")
    for q in queries:
        table.add_column(f"Server {q.server_id}")
    for k in range(files):
        height = max(len(q.blocks[k]) for q in queries)
        for row in range(height):
            cells = [
                render_sum(q.blocks[k][row]) if row < len(q.blocks[k]) else "" for q in queries
            ]
            table.add_row(str(k + 1) if row == 0 else "", *cells)
        table.add_section()
    console.print(table)

    if show_answers:
        answers_table = Table(title="Answers", box=box.SIMPLE_HEAVY)
        for q in queries:
            answers_table.add_column(f"Server {q.server_id}")
        sums = [q.sums() for q in queries]
        for row in range(max(len(s) for s in sums)):
            answers_table.add_row(*(render_answer_sum(s[row]) if row < len(s) else "" for s in sums))
        console.print(answers_table)

    rng = np.random.default_rng(data_seq)
    messages = rng.integers(0, 256, size=(files, params.symbols_per_message, symbol_bytes), dtype=np.uint8)
    answers = [pir_answer(q, messages) for q in queries]
    recovered = pir_decode(answers, queries, perms, desired)
    ok = recovered == messages[desired - 1].tobytes()
    downloaded = sum(a.num_bytes for a in answers)
    log.verbose(f"downloaded {downloaded} bytes for a {messages[0].size} byte message")

    console.print(f"decoded = {'yes' if ok else 'no'}")
    console.print(f"symbols_per_server = {params.sums_per_server}")
    console.print(f"download_per_message = {format_rate(pir_rate(params))}")
    if not ok:
        raise click.ClickException("decode error: recovered message differs from the original")
