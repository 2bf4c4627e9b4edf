"""Multi-user PIR delivery over the multi-access cache placement.

For every transmitted ``(t+L)``-subset ``S`` of caches, every user ``K``
inside ``S`` gets an independent single-user PIR query set for its demand
over the messages ``W(1..N, S \\ K)``.  Server ``s`` XORs the answers of all
users in ``S`` and broadcasts one coded symbol stream per ``S``.  A user
removes the other components with subfiles it reads from its caches and
decodes the residual like a plain PIR answer.

Parties and what they see:

* the coordinator holds the demands and the seed, draws permutations and
  builds queries (:func:`generate_query_bundles`);
* server ``s`` receives a :class:`ServerBundle` (queries only) and the
  library (:func:`server_answer`);
* users read the :class:`PublicQueryRecord`, all broadcasts and their
  own caches (:func:`user_decode`).
"""

from __future__ import annotations

import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from mupir.errors import DecodeError, ParameterError, ProtocolError, SimulationError
from mupir.models.access import AccessStructure
from mupir.models.params import SystemParams
from mupir.pir.core import (
    PermutationSet,
    PirAnswer,
    PirQuery,
    QueryGenerator,
    pir_answer,
    pir_decode,
    pir_generate_queries,
)
from mupir.scheme.placement import CacheContents, FileLibrary, fill_caches, make_library, missing_subfiles
from mupir.utils.combinatorics import SubsetId, enumerate_subsets, subsets_of
from mupir.utils.logging import log, log_call

__all__ = [
    "DemandVector",
    "ServerBundle",
    "PublicQueryRecord",
    "QueryBundle",
    "AnswerBundle",
    "TransmissionLog",
    "SimulationResult",
    "MemorySharingResult",
    "random_demands",
    "reduced_subset_family",
    "generate_query_bundles",
    "server_answer",
    "user_decode",
    "run_simulation",
    "run_memory_sharing",
]

ListKey = tuple[SubsetId, SubsetId]
"""``(transmission subset S, user K)`` naming one PIR query list."""


def _seed_sequence(seed: int | np.random.SeedSequence) -> np.random.SeedSequence:
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)


# ---------------------------------------------------------------------------
# Demands
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class DemandVector:
    """Demanded file index of every user, in access-structure order."""

    access: AccessStructure
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.values) != self.access.num_users:
            raise ParameterError(
                f"expected {self.access.num_users} demands, one per user; got {len(self.values)}"
            )

    @classmethod
    def of(cls, access: AccessStructure, demands: Sequence[int] | Mapping[SubsetId, int]) -> "DemandVector":
        if isinstance(demands, Mapping):
            missing = [u for u in access.users if u not in demands]
            if missing or len(demands) != access.num_users:
                raise ParameterError("demands must cover exactly the users of the access structure")
            return cls(access, tuple(int(demands[u]) for u in access.users))
        return cls(access, tuple(int(d) for d in demands))

    def validate(self, files: int) -> None:
        bad = [(label, d) for label, d in zip(self.access.labels, self.values) if not 1 <= d <= files]
        if bad:
            raise ParameterError(f"demands must lie in [1..{files}]; got {bad}")

    def __getitem__(self, user: SubsetId) -> int:
        try:
            return self.values[self.access.users.index(user)]
        except ValueError:
            raise ParameterError(f"user {user} has no demand") from None

    def items(self) -> Iterable[tuple[SubsetId, int]]:
        return zip(self.access.users, self.values)

    def as_labels(self) -> str:
        return ",".join(str(d) for d in self.values)


def random_demands(access: AccessStructure, files: int, rng: np.random.Generator) -> DemandVector:
    """Independent uniform demands in ``[1..N]`` for every user."""

    return DemandVector(access, tuple(int(d) for d in rng.integers(1, files + 1, size=access.num_users)))


def reduced_subset_family(access: AccessStructure, t: int) -> list[SubsetId]:
    """``(t+L)``-subsets of the caches that contain at least one user's set.

    The full access structure keeps all of ``binom([C], t+L)``; fewer users
    prune transmissions nobody could use.
    """

    size = t + access.access_degree
    return [S for S in enumerate_subsets(access.caches, size) if any(u.issubset(S) for u in access.users)]


# ---------------------------------------------------------------------------
# Queries
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ServerBundle:
    """Everything one server is sent: per ``S``, one query per user in ``S``."""

    server_id: int
    queries: dict[SubsetId, dict[SubsetId, PirQuery]]

    @property
    def num_lists(self) -> int:
        return sum(len(per_user) for per_user in self.queries.values())


@dataclass(frozen=True)
class PublicQueryRecord:
    """Queries of all servers plus permutations, readable by every user."""

    family: tuple[SubsetId, ...]
    queries: dict[ListKey, tuple[PirQuery, ...]]
    permutations: dict[ListKey, PermutationSet]
    spawn_keys: dict[ListKey, tuple[int, ...]]

    def users_in(self, subset: SubsetId) -> list[SubsetId]:
        return [K for (S, K) in self.queries if S == subset]


@dataclass(frozen=True)
class QueryBundle:
    servers: tuple[ServerBundle, ...]
    public: PublicQueryRecord

    def for_server(self, server: int) -> ServerBundle:
        return self.servers[server - 1]


@log_call
def generate_query_bundles(
    demands: DemandVector,
    params: SystemParams,
    access: AccessStructure,
    seed: int | np.random.SeedSequence,
    *,
    family: Sequence[SubsetId] | None = None,
    generator: QueryGenerator = pir_generate_queries,
) -> QueryBundle:
    """Coordinator step: one independent PIR query set per ``(S, K)``.

    Each list draws from its own :class:`numpy.random.SeedSequence` child;
    users of ``binom(S, L)`` absent from ``access`` are skipped.
    """

    demands.validate(params.files)
    if demands.access != access:
        raise ParameterError("demand vector belongs to a different access structure")
    if access.caches != params.caches or access.access_degree != params.access_degree:
        raise ParameterError("access structure does not match the system parameters")

    family = tuple(family) if family is not None else tuple(reduced_subset_family(access, params.t))
    keys: list[ListKey] = [
        (S, K) for S in family for K in subsets_of(S, params.access_degree) if K in access
    ]
    root = _seed_sequence(seed)
    children = root.spawn(len(keys))

    pir = params.pir
    queries: dict[ListKey, tuple[PirQuery, ...]] = {}
    permutations: dict[ListKey, PermutationSet] = {}
    spawn_keys: dict[ListKey, tuple[int, ...]] = {}
    for key, child in zip(keys, children):
        perms, qs = generator(demands[key[1]], pir, np.random.default_rng(child))
        queries[key] = tuple(qs)
        permutations[key] = perms
        spawn_keys[key] = tuple(child.spawn_key)

    servers = []
    for s in range(1, params.servers + 1):
        per_subset: dict[SubsetId, dict[SubsetId, PirQuery]] = {S: {} for S in family}
        for (S, K), qs in queries.items():
            per_subset[S][K] = qs[s - 1]
        servers.append(ServerBundle(s, per_subset))

    log.verbose(f"generated {len(keys)} query lists over {len(family)} transmission subsets")
    return QueryBundle(tuple(servers), PublicQueryRecord(family, queries, permutations, spawn_keys))


# ---------------------------------------------------------------------------
# Server side
# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class AnswerBundle:
    """Server ``s``'s broadcast: one coded symbol array per ``S``."""

    server_id: int
    symbols: dict[SubsetId, np.ndarray]

    @property
    def num_bytes(self) -> int:
        return sum(int(a.size) for a in self.symbols.values())


def server_answer(bundle: ServerBundle, library: FileLibrary) -> AnswerBundle:
    """XOR the PIR answers of all users in every ``S`` of ``bundle``."""

    coded: dict[SubsetId, np.ndarray] = {}
    for S, per_user in bundle.queries.items():
        acc: np.ndarray | None = None
        for K, query in per_user.items():
            if query.server_id != bundle.server_id:
                raise ProtocolError(f"server {bundle.server_id} got a query for server {query.server_id}")
            part = pir_answer(query, library.subfile_messages(S.difference(K))).symbols
            if acc is None:
                acc = part.copy()
            elif acc.shape != part.shape:
                raise ProtocolError(
                    f"server {bundle.server_id}, subset {S}: answer of user {K} has shape "
                    f"{part.shape}, expected {acc.shape}"
                )
            else:
                np.bitwise_xor(acc, part, out=acc)
        if acc is not None:
            coded[S] = acc
    return AnswerBundle(bundle.server_id, coded)


# ---------------------------------------------------------------------------
# User side
# ---------------------------------------------------------------------------
def user_decode(
    user: SubsetId,
    desired: int,
    answers: Sequence[AnswerBundle],
    public: PublicQueryRecord,
    caches: CacheContents,
    *,
    usage: Counter | None = None,
) -> bytes:
    """Recover file ``desired`` for ``user`` from its caches and the broadcasts.

    ``usage`` (optional) counts, per ``S``, the users that cancelled
    interference on that transmission.
    """

    params = caches.params
    view = caches.view(user)
    missing = missing_subfiles(user, params)
    family = set(public.family)
    recovered: dict[SubsetId, bytes] = {}

    for T in missing:
        S = user.union(T)
        if S not in family or (S, user) not in public.queries:
            raise DecodeError(f"no transmission serves user {user} with subfile {T}", user=user, subfile=T)
        residual = []
        for answer in answers:
            if S not in answer.symbols:
                raise DecodeError(
                    f"server {answer.server_id} sent nothing for subset {S}", user=user, subfile=T
                )
            residual.append(answer.symbols[S].copy())

        for other in public.users_in(S):
            if other == user:
                continue
            messages = view.subfile_messages(S.difference(other))
            for i, query in enumerate(public.queries[(S, other)]):
                part = pir_answer(query, messages).symbols
                if part.shape != residual[i].shape:
                    raise DecodeError(
                        f"component of user {other} in subset {S} does not align", user=user, subfile=T
                    )
                np.bitwise_xor(residual[i], part, out=residual[i])

        own = public.queries[(S, user)]
        pir_answers = [PirAnswer(q.server_id, r) for q, r in zip(own, residual)]
        try:
            recovered[T] = pir_decode(pir_answers, own, public.permutations[(S, user)], desired)
        except DecodeError as exc:
            raise DecodeError(str(exc), user=user, subfile=T, sum_=exc.sum) from exc
        if usage is not None:
            usage[S] += 1

    pieces = []
    for T in caches.library.subsets:
        if T in recovered:
            pieces.append(recovered[T])
        else:
            pieces.append(view.subfile(desired, T).tobytes())
    return b"".join(pieces)[: caches.original_lengths[desired - 1]]


# ---------------------------------------------------------------------------
# Metering
# ---------------------------------------------------------------------------
@dataclass
class TransmissionLog:
    """Bytes broadcast per server and per transmission subset."""

    params: SystemParams
    family_size: int
    bytes_per_server: dict[int, int] = field(default_factory=dict)
    bytes_per_subset: dict[SubsetId, int] = field(default_factory=dict)
    coding_gain: dict[SubsetId, int] = field(default_factory=dict)

    @property
    def total_bytes(self) -> int:
        return sum(self.bytes_per_server.values())

    @property
    def measured_rate(self) -> Fraction:
        """Total broadcast bytes over the padded file size, exact."""

        return Fraction(self.total_bytes, self.params.padded_file_bytes)

    @property
    def subpacketization(self) -> int:
        return self.params.subpacketization

    @property
    def symbols_per_transmission(self) -> int:
        return self.params.pir.sums_per_server

    @property
    def bytes_per_transmission(self) -> int:
        return self.symbols_per_transmission * self.params.symbol_bytes

    def coding_gain_holds(self, expected: int) -> bool:
        return all(count == expected for count in self.coding_gain.values())

    @classmethod
    def from_answers(cls, params: SystemParams, family: Sequence[SubsetId], answers: Sequence[AnswerBundle]):
        entry = cls(params, len(family))
        for answer in answers:
            entry.bytes_per_server[answer.server_id] = answer.num_bytes
            for S, symbols in answer.symbols.items():
                entry.bytes_per_subset[S] = entry.bytes_per_subset.get(S, 0) + int(symbols.size)
        return entry


@dataclass
class SimulationResult:
    params: SystemParams
    access: AccessStructure
    demands: DemandVector
    log: TransmissionLog
    success: dict[str, bool]
    decoded: dict[SubsetId, bytes]
    library: FileLibrary
    caches: CacheContents
    bundle: QueryBundle
    durations: dict[str, float] = field(default_factory=dict)

    @property
    def all_decoded(self) -> bool:
        return all(self.success.values())


@log_call
def run_simulation(
    params: SystemParams,
    access: AccessStructure,
    demands: DemandVector | Sequence[int],
    seed: int | np.random.SeedSequence,
    *,
    family: Sequence[SubsetId] | None = None,
    library: FileLibrary | None = None,
    generator: QueryGenerator = pir_generate_queries,
    workers: int = 1,
) -> SimulationResult:
    """Placement, query generation, answers and decoding for one demand vector.

    The seed splits into a library stream and a query stream.  Every user's
    output is compared with its demanded file; a mismatch or decode failure
    raises :class:`SimulationError` naming the user.
    """

    if not isinstance(demands, DemandVector):
        demands = DemandVector.of(access, demands)
    demands.validate(params.files)
    durations: dict[str, float] = {}

    library_seq, query_seq = _seed_sequence(seed).spawn(2)

    t0 = time.perf_counter()
    library = library or make_library(params, np.random.default_rng(library_seq))
    caches = fill_caches(library)
    durations["placement"] = time.perf_counter() - t0

    if family is None:
        family = reduced_subset_family(access, params.t) if params.delivers else []

    t0 = time.perf_counter()
    bundle = generate_query_bundles(demands, params, access, query_seq, family=family, generator=generator)
    durations["queries"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            answers = list(pool.map(lambda b: server_answer(b, library), bundle.servers))
    else:
        answers = [server_answer(b, library) for b in bundle.servers]
    durations["answers"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    usage: Counter = Counter()
    success: dict[str, bool] = {}
    decoded: dict[SubsetId, bytes] = {}
    for user, label in zip(access.users, access.labels):
        desired = demands[user]
        try:
            out = user_decode(user, desired, answers, bundle.public, caches, usage=usage)
        except DecodeError as exc:
            raise SimulationError(
                f"user {label} failed to decode file {desired}: {exc}",
                user=user,
                subfile=exc.subfile,
            ) from exc
        if out != library.file(desired):
            raise SimulationError(f"user {label} decoded a corrupted copy of file {desired}", user=user)
        success[label] = True
        decoded[user] = out
    durations["decoding"] = time.perf_counter() - t0

    entry = TransmissionLog.from_answers(params, family, answers)
    entry.coding_gain = {S: usage.get(S, 0) for S in family}
    log.debug(f"measured rate {entry.measured_rate} over {len(family)} subsets")
    return SimulationResult(params, access, demands, entry, success, decoded, library, caches, bundle, durations)


# ---------------------------------------------------------------------------
# Memory sharing
# ---------------------------------------------------------------------------
@dataclass
class MemorySharingResult:
    low: SimulationResult
    high: SimulationResult
    fraction: Fraction

    @property
    def measured_rate(self) -> Fraction:
        total = self.low.log.total_bytes + self.high.log.total_bytes
        return Fraction(total, self.low.params.file_bytes + self.high.params.file_bytes)

    @property
    def effective_t(self) -> Fraction:
        return self.fraction * self.low.params.t + (1 - self.fraction) * self.high.params.t


@log_call
def run_memory_sharing(
    params_low: SystemParams,
    params_high: SystemParams,
    fraction: Fraction | float | str,
    access: AccessStructure,
    demands: DemandVector | Sequence[int],
    seed: int | np.random.SeedSequence,
) -> MemorySharingResult:
    """Serve a ``fraction`` of every file at ``t_low`` and the rest at ``t_high``.

    Both parts run as independent deliveries.  The split must be exact:
    each part's byte count has to be a multiple of its subpacketization,
    otherwise padding would bias the measured rate.
    """

    fraction = Fraction(str(fraction)) if not isinstance(fraction, Fraction) else fraction
    if not 0 < fraction < 1:
        raise ParameterError(f"memory sharing fraction must lie in (0, 1); got {fraction}")
    shared = ("servers", "files", "caches", "access_degree")
    if any(getattr(params_low, a) != getattr(params_high, a) for a in shared):
        raise ParameterError("memory sharing mixes placements of one system only")
    if params_high.t != params_low.t + 1:
        raise ParameterError(
            f"memory sharing needs neighbouring points; got t = {params_low.t} and {params_high.t}"
        )
    total = params_low.file_bytes + params_high.file_bytes
    if Fraction(params_low.file_bytes, total) != fraction:
        raise ParameterError(
            f"file split {params_low.file_bytes}/{total} does not realise fraction {fraction}"
        )
    for p in (params_low, params_high):
        if p.file_bytes % p.subpacketization:
            raise ParameterError(
                f"part of {p.file_bytes} bytes at t = {p.t} is not a multiple of {p.subpacketization}"
            )

    low_seed, high_seed = _seed_sequence(seed).spawn(2)
    low = run_simulation(params_low, access, demands, low_seed)
    high = run_simulation(params_high, access, demands, high_seed)
    return MemorySharingResult(low, high, fraction)
