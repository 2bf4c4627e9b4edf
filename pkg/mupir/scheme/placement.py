"""Subfile partition of the library and the uncoded cache placement.

Every file is split into ``binom(C, t)`` subfiles ``W(n, T)``, one per
``t``-subset ``T`` of cache indices in canonical order, and each subfile
into ``S ** N`` sub-subfiles (the PIR symbols).  Cache ``c`` stores every
subfile whose index set contains ``c``.

Placement is a pure function of the parameters and the library and never
looks at demands.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from mupir.errors import DecodeError, ParameterError, StructureError
from mupir.models.access import AccessStructure
from mupir.models.params import SystemParams
from mupir.utils.combinatorics import SubsetId, enumerate_subsets
from mupir.utils.logging import log

__all__ = [
    "FileLibrary",
    "CacheContents",
    "CacheView",
    "make_library",
    "fill_caches",
    "user_visible_subfiles",
    "missing_subfiles",
    "CACHE_DUMP_VERSION",
]

CACHE_DUMP_VERSION = "v1"


@dataclass(frozen=True, eq=False)
class FileLibrary:
    """``N`` zero padded files plus their subfile partition index."""

    params: SystemParams
    data: np.ndarray
    original_lengths: tuple[int, ...]
    subsets: tuple[SubsetId, ...] = field(init=False)

    def __post_init__(self) -> None:
        p = self.params
        if self.data.shape != (p.files, p.padded_file_bytes):
            raise StructureError(
                f"library must be {p.files} x {p.padded_file_bytes} bytes; got {self.data.shape}"
            )
        if len(self.original_lengths) != p.files:
            raise StructureError("one original length per file is required")
        object.__setattr__(self, "subsets", tuple(enumerate_subsets(p.caches, p.t)))
        object.__setattr__(self, "_position", {T: i for i, T in enumerate(self.subsets)})

    # ------------------------------------------------------------------
    def _slot(self, subset: SubsetId) -> int:
        try:
            return self._position[subset]  # type: ignore[attr-defined]
        except KeyError:
            raise StructureError(f"{subset} is not a {self.params.t}-subset of the caches") from None

    def subfile(self, file: int, subset: SubsetId) -> np.ndarray:
        """``W(file, subset)`` as a read-only byte view."""

        if not 1 <= file <= self.params.files:
            raise StructureError(f"file index must lie in [1..{self.params.files}]; got {file}")
        size = self.params.subfile_bytes
        start = self._slot(subset) * size
        view = self.data[file - 1, start : start + size]
        view.flags.writeable = False
        return view

    def sub_subfiles(self, file: int, subset: SubsetId) -> np.ndarray:
        """``W(file, subset)`` split into its ``S ** N`` symbols."""

        return self.subfile(file, subset).reshape(self.params.pir.symbols_per_message, -1)

    def subfile_messages(self, subset: SubsetId) -> np.ndarray:
        """``W(1..N, subset)`` as a PIR message array ``(N, S^N, symbol_bytes)``."""

        return np.stack([self.sub_subfiles(n, subset) for n in range(1, self.params.files + 1)])

    def file(self, n: int) -> bytes:
        """File ``n`` without its padding."""

        return self.data[n - 1, : self.original_lengths[n - 1]].tobytes()


def make_library(
    params: SystemParams,
    source: int | np.random.Generator | Sequence[bytes],
) -> FileLibrary:
    """Build the library from a seed, a generator or ``N`` raw byte strings.

    Random libraries hold ``N`` files of exactly ``file_bytes`` bytes.  Raw
    files may be shorter than ``file_bytes``; all are zero padded to the
    next multiple of ``binom(C, t) * S ** N``.
    """

    padded = params.padded_file_bytes
    if isinstance(source, (int, np.integer, np.random.Generator)):
        rng = source if isinstance(source, np.random.Generator) else np.random.default_rng(int(source))
        data = np.zeros((params.files, padded), dtype=np.uint8)
        data[:, : params.file_bytes] = rng.integers(0, 256, size=(params.files, params.file_bytes), dtype=np.uint8)
        lengths = (params.file_bytes,) * params.files
    else:
        files = [bytes(f) for f in source]
        if not files:
            raise StructureError("the library needs at least one file")
        if len(files) != params.files:
            raise StructureError(f"expected {params.files} files; got {len(files)}")
        data = np.zeros((params.files, padded), dtype=np.uint8)
        for i, blob in enumerate(files):
            if not blob:
                raise StructureError(f"file {i + 1} is empty")
            if len(blob) > params.file_bytes:
                raise StructureError(
                    f"file {i + 1} has {len(blob)} bytes, more than file_bytes = {params.file_bytes}"
                )
            data[i, : len(blob)] = np.frombuffer(blob, dtype=np.uint8)
        lengths = tuple(len(f) for f in files)

    log.debug(
        f"library: {params.files} files, {params.file_bytes} -> {padded} bytes, "
        f"{params.num_subfiles} subfiles x {params.pir.symbols_per_message} symbols"
    )
    return FileLibrary(params, data, lengths)


# ---------------------------------------------------------------------------
# Caches
# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class CacheContents:
    """What every cache node stores: ``{W(n, T) : c in T}``."""

    library: FileLibrary
    stored: dict[int, tuple[SubsetId, ...]]

    @property
    def params(self) -> SystemParams:
        return self.library.params

    @property
    def original_lengths(self) -> tuple[int, ...]:
        return self.library.original_lengths

    def subsets_at(self, cache: int) -> tuple[SubsetId, ...]:
        if cache not in self.stored:
            raise ParameterError(f"cache index must lie in [1..{self.params.caches}]; got {cache}")
        return self.stored[cache]

    def bytes_at(self, cache: int) -> int:
        return len(self.subsets_at(cache)) * self.params.files * self.params.subfile_bytes

    def payload(self, cache: int) -> bytes:
        """Stored bytes of ``cache``: file-major, canonical subset order."""

        subsets = self.subsets_at(cache)
        return b"".join(
            self.library.subfile(n, T).tobytes()
            for n in range(1, self.params.files + 1)
            for T in subsets
        )

    def view(self, user: SubsetId) -> "CacheView":
        return CacheView(self, user)

    def dump(self, directory: Path | str) -> list[Path]:
        """Write one ``cache_<c>.bin`` per cache node and return the paths."""

        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        p = self.params
        paths = []
        for cache in sorted(self.stored):
            header = (
                f"MUPIR-CACHE {CACHE_DUMP_VERSION} C={p.caches} t={p.t} N={p.files} "
                f"S={p.servers} B={p.padded_file_bytes} cache={cache}\n"
            )
            path = out / f"cache_{cache}.bin"
            path.write_bytes(header.encode("ascii") + self.payload(cache))
            paths.append(path)
        log.verbose(f"dumped {len(paths)} caches to {out}")
        return paths


class CacheView:
    """The union of a user's ``L`` caches; nothing else is readable."""

    def __init__(self, caches: CacheContents, user: SubsetId):
        self._caches = caches
        self.user = user
        self._visible = user_visible_subfiles(user, caches.params)

    def has(self, subset: SubsetId) -> bool:
        return subset in self._visible

    def subfile(self, file: int, subset: SubsetId) -> np.ndarray:
        if subset not in self._visible:
            raise DecodeError(
                f"user {self.user} reads no cache holding subfile {subset}",
                user=self.user,
                subfile=subset,
            )
        return self._caches.library.subfile(file, subset)

    def subfile_messages(self, subset: SubsetId) -> np.ndarray:
        if subset not in self._visible:
            raise DecodeError(
                f"user {self.user} reads no cache holding subfile {subset}",
                user=self.user,
                subfile=subset,
            )
        return self._caches.library.subfile_messages(subset)


def fill_caches(library: FileLibrary, params: SystemParams | None = None) -> CacheContents:
    params = params or library.params
    if params != library.params:
        raise StructureError("library was built for different parameters")
    stored = {
        c: tuple(T for T in library.subsets if c in T)
        for c in range(1, params.caches + 1)
    }
    return CacheContents(library, stored)


# ---------------------------------------------------------------------------
# Visibility
# ---------------------------------------------------------------------------
def user_visible_subfiles(
    user: SubsetId,
    params: SystemParams,
    access: AccessStructure | None = None,
) -> frozenset[SubsetId]:
    """Subfile indices ``T`` with ``T`` meeting the user's caches."""

    if access is not None and user not in access:
        raise ParameterError(f"user {user} is not part of the {access.kind} access structure")
    if user.ground_size != params.caches:
        raise ParameterError(f"user {user} is not a subset of [1..{params.caches}]")
    return frozenset(T for T in enumerate_subsets(params.caches, params.t) if T.intersects(user))


def missing_subfiles(
    user: SubsetId,
    params: SystemParams,
    access: AccessStructure | None = None,
) -> list[SubsetId]:
    """The ``binom(C - L, t)`` subfile indices a user must download, canonical order."""

    visible = user_visible_subfiles(user, params, access)
    return [T for T in enumerate_subsets(params.caches, params.t) if T not in visible]
