"""Capacity-achieving single-user PIR over replicated servers.

Each of the ``N`` messages is split into ``S ** N`` equal sub-symbols and
every message gets its own uniformly random permutation of the symbol
indices.  "Fresh" symbols of a message are taken in permutation order.

Query construction, per server ``s``:

* block 1 asks for one fresh symbol of every message;
* block ``k`` (``k = 2..N``) pairs one fresh desired symbol with every
  undesired-only ``(k-1)``-sum the *other* servers were asked for in block
  ``k-1`` (side information), then adds ``(S-1) ** (k-1)`` fresh sums for
  every ``k``-subset of undesired messages so that all messages look alike.

Every server ends up with ``S^(N-1) + ... + 1`` sums, sees ``S^(N-1)``
distinct indices of every message, and the desired indices of different
servers never overlap.

The emitted query lists each block's sums sorted by (messages, indices).
That order is a function of the block's set of sums only; the construction
order puts the desired-containing sums first and would single out the
desired message.  Decoding resolves side information by content, not by
position.  ``order="structural"`` keeps the construction order for display.

Sums are bytewise XOR.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Literal, Sequence

import numpy as np

from mupir.errors import DecodeError, ParameterError, StructureError
from mupir.models.params import PirParams
from mupir.utils.combinatorics import binom

__all__ = [
    "SymbolRef",
    "PirSum",
    "PirQuery",
    "PirAnswer",
    "PermutationSet",
    "QueryGenerator",
    "pir_generate_queries",
    "pir_answer",
    "pir_decode",
    "pir_rate",
    "split_message",
    "join_symbols",
    "check_query_structure",
    "distinct_indices_per_message",
    "render_sum",
    "render_answer_sum",
    "render_query",
    "render_answer",
]

SymbolRef = tuple[int, int]
"""``(message, symbol index)``, both 1-based."""

PirSum = tuple[SymbolRef, ...]
"""Symbols XOR-ed together, ordered by message."""

QueryOrder = Literal["sorted", "structural"]


def _sum_key(s: PirSum) -> tuple[tuple[int, ...], tuple[int, ...]]:
    return tuple(n for n, _ in s), tuple(j for _, j in s)


@dataclass(frozen=True)
class PermutationSet:
    """One permutation of ``[1..S^N]`` per message."""

    perms: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        for n, perm in enumerate(self.perms, start=1):
            if sorted(perm) != list(range(1, len(perm) + 1)):
                raise StructureError(f"permutation of message {n} is not a bijection on [1..{len(perm)}]")

    @classmethod
    def draw(cls, params: PirParams, rng: np.random.Generator) -> "PermutationSet":
        size = params.symbols_per_message
        return cls(tuple(tuple(int(x) + 1 for x in rng.permutation(size)) for _ in range(params.num_messages)))


@dataclass(frozen=True)
class PirQuery:
    """The query one server receives: ``N`` blocks of ``k``-sums."""

    server_id: int
    blocks: tuple[tuple[PirSum, ...], ...]

    def sums(self) -> list[PirSum]:
        return [s for block in self.blocks for s in block]

    @property
    def num_sums(self) -> int:
        return sum(len(block) for block in self.blocks)

    def block_sizes(self) -> tuple[int, ...]:
        return tuple(len(block) for block in self.blocks)


@dataclass(frozen=True, eq=False)
class PirAnswer:
    """One XOR symbol per query sum, in query order (``uint8`` rows)."""

    server_id: int
    symbols: np.ndarray

    @property
    def num_bytes(self) -> int:
        return int(self.symbols.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PirAnswer):
            return NotImplemented
        return self.server_id == other.server_id and np.array_equal(self.symbols, other.symbols)


QueryGenerator = Callable[[int, PirParams, np.random.Generator], tuple[PermutationSet, list[PirQuery]]]


# ---------------------------------------------------------------------------
# Query generation
# ---------------------------------------------------------------------------
class _FreshSymbols:
    """Hands out the next unused index of each message in permutation order."""

    def __init__(self, perms: PermutationSet):
        self._perms = perms
        self._cursor = [0] * len(perms.perms)

    def __call__(self, message: int) -> SymbolRef:
        pos = self._cursor[message - 1]
        perm = self._perms.perms[message - 1]
        if pos >= len(perm):
            raise StructureError(f"message {message} ran out of fresh symbols")
        self._cursor[message - 1] = pos + 1
        return message, perm[pos]


def _join(*parts: PirSum) -> PirSum:
    return tuple(sorted((ref for part in parts for ref in part), key=lambda ref: ref[0]))


def pir_generate_queries(
    desired: int,
    params: PirParams,
    rng: np.random.Generator,
    *,
    order: QueryOrder = "sorted",
) -> tuple[PermutationSet, list[PirQuery]]:
    """Draw permutations and build the ``S`` server queries for ``desired``."""

    S, N = params.num_servers, params.num_messages
    if not 1 <= desired <= N:
        raise ParameterError(f"desired message must lie in [1..{N}]; got {desired}")

    perms = PermutationSet.draw(params, rng)
    fresh = _FreshSymbols(perms)
    undesired = [n for n in range(1, N + 1) if n != desired]
    servers = range(1, S + 1)

    # per server, per block: desired-containing sums keyed by (source server,
    # position of the side information), and undesired-only sums
    with_desired: dict[int, list[list[tuple[tuple[int, int], PirSum]]]] = {s: [] for s in servers}
    side_only: dict[int, list[list[PirSum]]] = {s: [] for s in servers}

    for s in servers:
        block_d: list[tuple[tuple[int, int], PirSum]] = []
        block_u: list[PirSum] = []
        for n in range(1, N + 1):
            ref = fresh(n)
            if n == desired:
                block_d.append(((0, 0), (ref,)))
            else:
                block_u.append((ref,))
        with_desired[s].append(block_d)
        side_only[s].append(block_u)

    for k in range(2, N + 1):
        new_u: dict[int, list[PirSum]] = {s: [] for s in servers}
        for s in servers:
            for subset in combinations(undesired, k):
                for _ in range((S - 1) ** (k - 1)):
                    new_u[s].append(_join(*((fresh(n),) for n in subset)))

        new_d: dict[int, list[tuple[tuple[int, int], PirSum]]] = {s: [] for s in servers}
        previous = len(side_only[1][k - 2])
        for j in range(previous):
            for s in servers:
                for src in servers:
                    if src == s:
                        continue
                    side = side_only[src][k - 2][j]
                    new_d[s].append(((src, j), _join((fresh(desired),), side)))

        for s in servers:
            new_d[s].sort(key=lambda item: item[0])
            with_desired[s].append(new_d[s])
            side_only[s].append(new_u[s])

    queries: list[PirQuery] = []
    for s in servers:
        blocks = []
        for block_d, block_u in zip(with_desired[s], side_only[s]):
            sums = [sm for _, sm in block_d] + sorted(block_u, key=_sum_key)
            if order == "sorted":
                sums.sort(key=_sum_key)
            blocks.append(tuple(sums))
        queries.append(PirQuery(s, tuple(blocks)))
    return perms, queries


# ---------------------------------------------------------------------------
# Answers
# ---------------------------------------------------------------------------
def split_message(data: bytes | np.ndarray, num_symbols: int) -> np.ndarray:
    """Return ``data`` as a ``(num_symbols, symbol_bytes)`` ``uint8`` array."""

    arr = np.frombuffer(bytes(data), dtype=np.uint8) if not isinstance(data, np.ndarray) else data
    arr = np.asarray(arr, dtype=np.uint8).reshape(-1)
    if arr.size % num_symbols:
        raise StructureError(f"message of {arr.size} bytes does not split into {num_symbols} equal symbols")
    return arr.reshape(num_symbols, arr.size // num_symbols)


def join_symbols(symbols: np.ndarray) -> bytes:
    return np.ascontiguousarray(symbols, dtype=np.uint8).tobytes()


def _as_message_array(messages, num_symbols: int) -> np.ndarray:
    if isinstance(messages, np.ndarray) and messages.ndim == 3:
        if messages.shape[1] != num_symbols:
            raise StructureError(f"expected {num_symbols} symbols per message; got {messages.shape[1]}")
        return messages.astype(np.uint8, copy=False)
    arrays = [split_message(m, num_symbols) for m in messages]
    widths = {a.shape[1] for a in arrays}
    if len(widths) != 1:
        raise StructureError(f"messages have mismatching symbol lengths {sorted(widths)}")
    return np.stack(arrays)


def pir_answer(query: PirQuery, messages, num_symbols: int | None = None) -> PirAnswer:
    """XOR the addressed sub-symbols of every sum in ``query``.

    ``messages`` is an ``(N, S^N, symbol_bytes)`` array, a sequence of ``N``
    ``(S^N, symbol_bytes)`` arrays, or ``N`` byte strings together with
    ``num_symbols``.
    """

    if num_symbols is None:
        if isinstance(messages, np.ndarray) and messages.ndim == 3:
            num_symbols = messages.shape[1]
        elif all(isinstance(m, np.ndarray) and m.ndim == 2 for m in messages):
            num_symbols = messages[0].shape[0]
        else:
            raise StructureError("num_symbols is required when messages are raw bytes")
    arr = _as_message_array(messages, num_symbols)

    sums = query.sums()
    out = np.zeros((len(sums), arr.shape[2]), dtype=np.uint8)
    for i, s in enumerate(sums):
        for n, j in s:
            if not (1 <= n <= arr.shape[0] and 1 <= j <= num_symbols):
                raise StructureError(f"sum {s} addresses a symbol outside the library")
            np.bitwise_xor(out[i], arr[n - 1, j - 1], out=out[i])
    return PirAnswer(query.server_id, out)


# ---------------------------------------------------------------------------
# Decoding
# ---------------------------------------------------------------------------
def pir_decode(
    answers: Sequence[PirAnswer],
    queries: Sequence[PirQuery],
    perms: PermutationSet,
    desired: int,
) -> bytes:
    """Reconstruct the desired message from all ``S`` answers."""

    if len(answers) != len(queries):
        raise DecodeError(f"got {len(answers)} answers for {len(queries)} queries")
    if not 1 <= desired <= len(perms.perms):
        raise DecodeError(f"desired message {desired} outside [1..{len(perms.perms)}]")
    num_symbols = len(perms.perms[desired - 1])

    side: dict[PirSum, np.ndarray] = {}
    for query, answer in zip(queries, answers):
        if answer.server_id != query.server_id or len(answer.symbols) != query.num_sums:
            raise DecodeError(f"answer of server {answer.server_id} does not match its query")
        for s, symbol in zip(query.sums(), answer.symbols):
            if all(n != desired for n, _ in s):
                side.setdefault(s, symbol)

    recovered: dict[int, np.ndarray] = {}
    for query, answer in zip(queries, answers):
        for s, symbol in zip(query.sums(), answer.symbols):
            wanted = [j for n, j in s if n == desired]
            if not wanted:
                continue
            if len(wanted) > 1:
                raise DecodeError(f"sum {render_sum(s)} holds two desired symbols", sum_=s)
            rest = tuple(ref for ref in s if ref[0] != desired)
            value = symbol
            if rest:
                known = side.get(rest)
                if known is None:
                    raise DecodeError(
                        f"side information {render_sum(rest)} of sum {render_sum(s)} "
                        f"(server {query.server_id}) was never downloaded",
                        sum_=s,
                    )
                value = np.bitwise_xor(symbol, known)
            recovered[wanted[0]] = value

    missing = set(perms.perms[desired - 1]) - set(recovered)
    if missing:
        raise DecodeError(f"symbols {sorted(missing)} of message {desired} were never requested")
    return b"".join(recovered[j].tobytes() for j in range(1, num_symbols + 1))


def pir_rate(params: PirParams) -> Fraction:
    """``1 + 1/S + ... + 1/S^(N-1)``, downloaded symbols over ``S^N``."""

    S = params.num_servers
    return sum((Fraction(1, S**i) for i in range(params.num_messages)), Fraction(0))


# ---------------------------------------------------------------------------
# Structure checks
# ---------------------------------------------------------------------------
def distinct_indices_per_message(query: PirQuery, num_messages: int) -> dict[int, int]:
    """Number of distinct symbol indices of each message within ``query``."""

    seen: dict[int, set[int]] = {n: set() for n in range(1, num_messages + 1)}
    for s in query.sums():
        for n, j in s:
            seen[n].add(j)
    return {n: len(idx) for n, idx in seen.items()}


def check_query_structure(queries: Sequence[PirQuery], params: PirParams, desired: int | None = None) -> None:
    """Raise :class:`StructureError` unless ``queries`` has the scheme's shape.

    Always checked: ``N`` blocks of ``k``-sums over distinct messages, no
    repeated symbol within a query, ``S^(N-1)`` distinct indices of every
    message per server.  With ``desired`` also the per-block counts and the
    disjointness of desired indices across servers.
    """

    S, N = params.num_servers, params.num_messages
    if len(queries) != S:
        raise StructureError(f"expected {S} queries; got {len(queries)}")
    per_message = S ** (N - 1)
    desired_seen: set[int] = set()
    for q in queries:
        if len(q.blocks) != N:
            raise StructureError(f"server {q.server_id}: expected {N} blocks; got {len(q.blocks)}")
        refs = [ref for s in q.sums() for ref in s]
        if len(refs) != len(set(refs)):
            raise StructureError(f"server {q.server_id}: a symbol is requested twice")
        for k, block in enumerate(q.blocks, start=1):
            for s in block:
                if len(s) != k or len({n for n, _ in s}) != k:
                    raise StructureError(f"server {q.server_id}: block {k} holds {render_sum(s)}")
            if desired is not None:
                with_d = sum(1 for s in block if any(n == desired for n, _ in s))
                exp_d = binom(N - 1, k - 1) * (S - 1) ** (k - 1)
                exp_u = binom(N - 1, k) * (S - 1) ** (k - 1)
                if with_d != exp_d or len(block) - with_d != exp_u:
                    raise StructureError(
                        f"server {q.server_id}: block {k} has {with_d}/{len(block) - with_d} "
                        f"desired/undesired sums, expected {exp_d}/{exp_u}"
                    )
        counts = distinct_indices_per_message(q, N)
        bad = {n: c for n, c in counts.items() if c != per_message}
        if bad:
            raise StructureError(
                f"server {q.server_id}: distinct indices per message {bad}, expected {per_message}"
            )
        if desired is not None:
            mine = {j for s in q.sums() for n, j in s if n == desired}
            if mine & desired_seen:
                raise StructureError(f"server {q.server_id} reuses desired indices {sorted(mine & desired_seen)}")
            desired_seen |= mine


# ---------------------------------------------------------------------------
# Symbolic rendering
# ---------------------------------------------------------------------------
def _letter(message: int) -> str:
    return chr(ord("a") + message - 1) if message <= 26 else f"m{message}_"


def render_sum(s: PirSum) -> str:
    """``((1, 3), (2, 2))`` → ``"a3 + b2"``."""

    return " + ".join(f"{_letter(n)}{j}" for n, j in s)


def render_answer_sum(s: PirSum, subfile: str = "") -> str:
    """``((1, 3), (2, 2))`` → ``"W1^a3 ⊕ W2^b2"`` (with an optional subfile tag)."""

    tag = f",{subfile}" if subfile else ""
    return " ⊕ ".join(f"W{n}{tag}^{_letter(n)}{j}" for n, j in s)


def render_query(query: PirQuery) -> list[str]:
    """One line per block: ``"block 2: a3 + b2, a5 + c2, b3 + c3"``."""

    return [
        f"block {k}: " + ", ".join(render_sum(s) for s in block)
        for k, block in enumerate(query.blocks, start=1)
    ]


def render_answer(query: PirQuery, subfile: str = "") -> list[str]:
    """The symbolic answer of ``query``, one transmitted symbol per line."""

    return [render_answer_sum(s, subfile) for s in query.sums()]
