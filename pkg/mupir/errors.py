"""Exception hierarchy shared by all :mod:`mupir` modules.

Every error carries a ``category`` used by the CLI to prefix its message,
e.g. ``parameter error: t = CM/N must be an integer; got 2.5``.
"""

from __future__ import annotations

__all__ = [
    "MupirError",
    "ParameterError",
    "DomainError",
    "CountOverflowError",
    "SizeLimitError",
    "StructureError",
    "ProtocolError",
    "DecodeError",
    "SimulationError",
]


class MupirError(Exception):
    """Base class for all errors raised by the package."""

    category = "mupir"


class ParameterError(MupirError, ValueError):
    """A parameter combination violates a documented invariant."""

    category = "parameter"


class DomainError(MupirError, ValueError):
    """A formula was evaluated outside the regime it is defined for."""

    category = "domain"


class CountOverflowError(MupirError, ArithmeticError):
    """A count does not fit into an unsigned 64 bit integer."""

    category = "overflow"


class SizeLimitError(MupirError):
    """An exhaustive enumeration would exceed its configured cap."""

    category = "size"


class StructureError(MupirError):
    """Input data has the wrong shape (lengths, partitions, sizes)."""

    category = "structure"


class ProtocolError(MupirError):
    """Server side answer composition failed, e.g. misaligned answers."""

    category = "protocol"


class DecodeError(MupirError):
    """A user could not reconstruct its demanded data."""

    category = "decode"

    def __init__(self, message: str, *, user=None, subfile=None, sum_=None):
        super().__init__(message)
        self.user = user
        self.subfile = subfile
        self.sum = sum_


class SimulationError(MupirError):
    """A simulated delivery did not reproduce every demanded file."""

    category = "simulation"

    def __init__(self, message: str, *, user=None, subfile=None):
        super().__init__(message)
        self.user = user
        self.subfile = subfile
