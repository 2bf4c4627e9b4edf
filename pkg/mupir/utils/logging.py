"""Package logger for mupir, rendered by :mod:`rich` on stderr.

``MUPIR_LOG_LEVEL`` sets the initial level (default ``"INFO"``); the CLI
flags ``--verbose`` and ``--quiet`` override it for one run through
:func:`set_level`.  Besides the standard levels the logger knows
``VERBOSE`` (from :mod:`verboselogs`, used for per-call tracing) and
``SUCCESS`` (a decoded trial, a passing audit).
"""

from __future__ import annotations

import logging
import os
import reprlib
from functools import wraps
from inspect import signature

import verboselogs
from rich.console import Console
from rich.logging import RichHandler

__all__ = ["console", "log", "set_level", "log_call"]

_LEVEL = os.getenv("MUPIR_LOG_LEVEL", "INFO").upper()

verboselogs.install()

_SUCCESS_LEVEL = 25
logging.addLevelName(_SUCCESS_LEVEL, "SUCCESS")


def _success(self: logging.Logger, message: str, *args, **kwargs) -> None:
    """Log *message* with level ``SUCCESS``."""

    self.log(_SUCCESS_LEVEL, message, *args, **kwargs)


logging.Logger.success = _success  # type: ignore[attr-defined]

# stderr keeps report tables on stdout clean
console = Console(stderr=True)

log = logging.getLogger("mupir")
log.setLevel(_LEVEL)
if not any(isinstance(h, RichHandler) for h in log.handlers):
    _handler = RichHandler(console=console, markup=False, show_time=False, show_path=False)
    _handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    log.addHandler(_handler)

# query lists and symbol arrays would flood a VERBOSE trace
_short = reprlib.Repr()
_short.maxstring = 60
_short.maxother = 80
_short.maxlist = _short.maxtuple = _short.maxdict = 6


def set_level(level: str | int) -> None:
    """Set the level of the package logger, e.g. ``"VERBOSE"`` or ``"WARNING"``."""

    log.setLevel(level.upper() if isinstance(level, str) else level)


def log_call(fn):
    """Return a wrapper tracing calls to ``fn`` at ``log.verbose``.

    Arguments are only rendered when ``VERBOSE`` is enabled, each one
    shortened with :mod:`reprlib`.
    """

    sig = signature(fn)

    @wraps(fn)
    def wrapper(*args, **kwargs):
        if log.isEnabledFor(verboselogs.VERBOSE):
            bound = sig.bind_partial(*args, **kwargs)
            bound.apply_defaults()
            arg_str = ", ".join(f"{n}={_short.repr(v)}" for n, v in bound.arguments.items())
            log.verbose(f"{fn.__qualname__}({arg_str})")
        return fn(*args, **kwargs)

    return wrapper
