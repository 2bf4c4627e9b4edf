"""Command line interface entry point for mupir."""

from pathlib import Path

import click

from mupir.models.run_config import load_command_defaults
from mupir.utils.logging import set_level

from .compare import cli_compare
from .cyc import cli_cyc
from .pir_demo import cli_pir_demo
from .privacy_audit import cli_privacy_audit
from .rates import cli_rates
from .simulate import cli_simulate
from .utils import handle_errors


@click.group()
@click.option(
    "--config",
    "config",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="YAML file mapping command names to option defaults",
)
@click.option("-v", "--verbose", is_flag=True, help="Log at VERBOSE level")
@click.option("-q", "--quiet", is_flag=True, help="Only log warnings and errors")
@click.pass_context
@handle_errors
def cli(ctx: click.Context, config: Path | None, verbose: bool, quiet: bool) -> None:
    """mupir – private multi-access coded caching, simulated and checked."""

    if verbose:
        set_level("VERBOSE")
    elif quiet:
        set_level("WARNING")
    ctx.default_map = load_command_defaults(config)


cli.add_command(cli_simulate)
cli.add_command(cli_pir_demo)
cli.add_command(cli_cyc)
cli.add_command(cli_privacy_audit)
cli.add_command(cli_rates)
cli.add_command(cli_compare)

# entry point for `python -m mupir.cli`
if __name__ == "__main__":
    cli()
