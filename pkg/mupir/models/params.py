"""Scheme parameters with their validity invariants."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from mupir.errors import ParameterError
from mupir.utils.combinatorics import binom

__all__ = ["PirParams", "SystemParams", "parse_t"]


def parse_t(value: Any) -> int:
    """Return ``value`` as an integer cache replication factor ``t``.

    Accepts ints, integral floats and strings such as ``"2"`` or ``"4/2"``;
    anything non-integral is rejected with the invariant it violates.
    """

    try:
        frac = Fraction(str(value))
    except (ValueError, ZeroDivisionError):
        raise ParameterError(f"t = CM/N must be an integer; got {value!r}") from None
    if frac.denominator != 1:
        raise ParameterError(f"t = CM/N must be an integer; got {value}")
    return int(frac)


@dataclass(frozen=True)
class PirParams:
    """Single-user PIR setting: ``S`` replicated servers, ``N`` messages."""

    num_servers: int
    num_messages: int

    def __post_init__(self) -> None:
        if self.num_servers < 2:
            raise ParameterError(f"PIR needs S >= 2 servers; got S = {self.num_servers}")
        if self.num_messages < 1:
            raise ParameterError(f"PIR needs N >= 1 messages; got N = {self.num_messages}")

    @property
    def symbols_per_message(self) -> int:
        """Number of sub-symbols each message is split into, ``S ** N``."""

        return self.num_servers**self.num_messages

    @property
    def sums_per_server(self) -> int:
        """``S^(N-1) + ... + S + 1``, the download per server in symbols."""

        return sum(self.num_servers**i for i in range(self.num_messages))


@dataclass(frozen=True)
class SystemParams:
    """All parameters of the multi-access MuPIR system.

    ``t = C * M / N`` is stored directly as an integer; ``cache_fraction``
    gives back ``M / N``.  Files of ``file_bytes`` are zero padded to a
    multiple of the subpacketization ``binom(C, t) * S ** N``.
    """

    servers: int
    files: int
    caches: int
    access_degree: int
    t: int
    file_bytes: int

    def __post_init__(self) -> None:
        if self.servers < 2:
            raise ParameterError(f"S >= 2 servers required; got S = {self.servers}")
        if self.files < 1:
            raise ParameterError(f"N >= 1 files required; got N = {self.files}")
        if self.caches < 2:
            raise ParameterError(f"C >= 2 caches required; got C = {self.caches}")
        if not 1 <= self.access_degree < self.caches:
            raise ParameterError(
                f"access degree must satisfy 1 <= L < C; got L = {self.access_degree}, C = {self.caches}"
            )
        if not isinstance(self.t, int) or isinstance(self.t, bool):
            raise ParameterError(f"t = CM/N must be an integer; got {self.t!r}")
        if not 0 <= self.t <= self.caches:
            raise ParameterError(f"t = CM/N must lie in [0..C]; got t = {self.t}, C = {self.caches}")
        if self.file_bytes < 1:
            raise ParameterError(f"file size must be positive; got B = {self.file_bytes}")

    # ------------------------------------------------------------------
    @classmethod
    def from_memory(
        cls,
        servers: int,
        files: int,
        caches: int,
        access_degree: int,
        memory: Any,
        file_bytes: int,
    ) -> "SystemParams":
        """Build parameters from the cache size ``M`` (in files)."""

        t = Fraction(caches) * Fraction(str(memory)) / files
        return cls(servers, files, caches, access_degree, parse_t(t), file_bytes)

    # ------------------------------------------------------------------
    @property
    def pir(self) -> PirParams:
        return PirParams(self.servers, self.files)

    @property
    def cache_fraction(self) -> Fraction:
        """``M / N``, the fraction of the library each cache stores."""

        return Fraction(self.t, self.caches)

    @property
    def memory(self) -> Fraction:
        """``M``, the cache size in files."""

        return self.cache_fraction * self.files

    @property
    def delivers(self) -> bool:
        """``False`` when ``t + L > C``: every user already caches all it needs."""

        return self.t + self.access_degree <= self.caches

    @property
    def num_subfiles(self) -> int:
        return binom(self.caches, self.t)

    @property
    def subpacketization(self) -> int:
        """``binom(C, t) * S ** N`` sub-subfiles per file."""

        return self.num_subfiles * self.pir.symbols_per_message

    @property
    def padded_file_bytes(self) -> int:
        unit = self.subpacketization
        return -(-self.file_bytes // unit) * unit

    @property
    def subfile_bytes(self) -> int:
        return self.padded_file_bytes // self.num_subfiles

    @property
    def symbol_bytes(self) -> int:
        """Byte length of one sub-subfile."""

        return self.padded_file_bytes // self.subpacketization

    def as_dict(self) -> dict[str, int]:
        return {
            "servers": self.servers,
            "files": self.files,
            "caches": self.caches,
            "access_degree": self.access_degree,
            "t": self.t,
            "file_bytes": self.file_bytes,
        }

    def with_access_degree(self, access_degree: int) -> "SystemParams":
        return SystemParams(
            self.servers, self.files, self.caches, access_degree, self.t, self.file_bytes
        )
