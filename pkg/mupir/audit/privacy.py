"""Check that a server's view is independent of the demand vector.

Two modes:

exact
    Builds real bundles with :func:`generate_query_bundles` while replaying
    every tuple of message permutations for one ``(S, K)`` list at a time,
    and tabulates the probability of each fingerprint segment the audited
    server sees, per demand vector and list position.  The audit also
    checks that a list's draws change no other list's segment, so the joint
    law of the bundle is the product of the segment laws and two demand
    vectors yield the same joint law iff every segment law agrees.
    Feasible for ``S = 2, N = 2`` and tiny cache systems only.

statistical
    Samples whole bundles under several demand vectors and compares, with a
    chi-square test of homogeneity (:func:`scipy.stats.chi2_contingency`),
    a histogram of ordered bundle features: the position, message and index
    of every block-1 symbol plus the message pattern of the whole bundle in
    emitted order.  Hard structural invariants of every sampled bundle are
    checked next to it.

Both modes accept an alternative query generator so that a deliberately
leaky construction can be shown to fail.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import stats

from mupir.errors import ParameterError, SizeLimitError, StructureError
from mupir.models.access import AccessStructure
from mupir.models.params import PirParams, SystemParams
from mupir.pir.core import (
    PirQuery,
    QueryGenerator,
    check_query_structure,
    distinct_indices_per_message,
    pir_generate_queries,
)
from mupir.scheme.protocol import DemandVector, ServerBundle, generate_query_bundles, reduced_subset_family
from mupir.utils.combinatorics import binom, subsets_of
from mupir.utils.logging import log, log_call

__all__ = [
    "FINGERPRINT_VERSION",
    "QueryFingerprint",
    "ExactAuditResult",
    "StatisticalAuditResult",
    "privacy_mass",
    "exhaustive_privacy_check",
    "statistical_privacy_check",
    "DEFAULT_EXACT_CAP",
]

FINGERPRINT_VERSION = "v1"
DEFAULT_EXACT_CAP = 100_000


# Blocks, sums and lists are rendered in the order they are sent.
def _render_list(query: PirQuery) -> str:
    return "/".join(";".join(",".join(f"{n}.{j}" for n, j in s) for s in block) for block in query.blocks)


def _message_pattern(query: PirQuery) -> str:
    return "/".join(";".join(",".join(str(n) for n, _ in s) for s in block) for block in query.blocks)


@dataclass(frozen=True, order=True)
class QueryFingerprint:
    """Text form of the queries one server receives, in the order received.

    Equal queries give equal fingerprints and vice versa.
    """

    text: str

    @classmethod
    def of_list(cls, query: PirQuery) -> "QueryFingerprint":
        return cls(f"{FINGERPRINT_VERSION}|{_render_list(query)}")

    @classmethod
    def of_bundle(cls, bundle: ServerBundle) -> "QueryFingerprint":
        parts = [
            f"{S.label()}{K.label()}={_render_list(q)}"
            for S, per_user in bundle.queries.items()
            for K, q in per_user.items()
        ]
        return cls(f"{FINGERPRINT_VERSION}|" + "|".join(parts))

    def segments(self) -> list[str]:
        """Per-list parts of a bundle fingerprint, in emitted order."""
        return self.text.split("|")[1:]

    def __str__(self) -> str:
        return self.text


def privacy_mass(params: SystemParams, family_size: int, lists_per_subset: int | None = None) -> Fraction:
    """Probability of any single bundle a server can observe.

    Every list fixes ``S^(N-1)`` ordered indices of every file, each with
    probability ``(S^N - S^(N-1))! / (S^N)!``.
    """

    P = params.pir.symbols_per_message
    used = P // params.servers
    per_file = Fraction(math.factorial(P - used), math.factorial(P))
    if lists_per_subset is None:
        lists_per_subset = binom(params.t + params.access_degree, params.access_degree)
    return per_file ** (params.files * lists_per_subset * family_size)


def _total_variation(p: dict[str, Fraction], q: dict[str, Fraction]) -> Fraction:
    keys = set(p) | set(q)
    return sum((abs(p.get(k, Fraction(0)) - q.get(k, Fraction(0))) for k in keys), Fraction(0)) / 2


# ---------------------------------------------------------------------------
# Exact mode
# ---------------------------------------------------------------------------
class _ScriptedPermutations:
    """Stands in for a generator: ``permutation`` returns scripted draws."""

    def __init__(self, draws: Sequence[Sequence[int]]):
        self._draws = list(draws)
        self._next = 0

    def permutation(self, size: int) -> np.ndarray:
        if self._next >= len(self._draws):
            raise StructureError("query generator drew more permutations than there are messages")
        draw = self._draws[self._next]
        self._next += 1
        if len(draw) != size:
            raise StructureError(f"scripted permutation has length {len(draw)}, generator asked for {size}")
        return np.asarray(draw, dtype=np.int64)


class _ScriptedLists:
    """Query generator handing each list, in call order, its scripted draws."""

    def __init__(self, generator: QueryGenerator, scripts: Sequence[Sequence[Sequence[int]]]):
        self._generator = generator
        self._scripts = list(scripts)
        self._calls = 0

    def __call__(self, desired: int, pir: PirParams, rng: np.random.Generator):
        if self._calls >= len(self._scripts):
            raise StructureError("bundle assembly generated more lists than were scripted")
        draws = self._scripts[self._calls]
        self._calls += 1
        return self._generator(desired, pir, _ScriptedPermutations(draws))  # type: ignore[arg-type]


@dataclass
class ExactAuditResult:
    server: int
    passed: bool
    max_tv: Fraction
    # keyed by (demand labels, list position in the server bundle)
    list_laws: dict[tuple[str, int], dict[str, Fraction]]
    support_sizes: dict[str, int]
    list_mass: Fraction | None
    joint_mass: Fraction | None
    expected_joint_mass: Fraction
    num_lists: int
    coupled_lists: int = 0
    rows: list[dict] = field(default_factory=list)


def _server_segments(
    demands: DemandVector,
    params: SystemParams,
    access: AccessStructure,
    server: int,
    generator: QueryGenerator,
    scripts: Sequence[Sequence[Sequence[int]]],
) -> list[str]:
    bundle = generate_query_bundles(demands, params, access, 0, generator=_ScriptedLists(generator, scripts))
    segments = QueryFingerprint.of_bundle(bundle.for_server(server)).segments()
    if len(segments) != len(scripts):
        raise StructureError(f"server {server} bundle holds {len(segments)} lists, expected {len(scripts)}")
    return segments


def _segment_laws(
    demands: DemandVector,
    params: SystemParams,
    access: AccessStructure,
    server: int,
    generator: QueryGenerator,
    num_lists: int,
) -> tuple[list[dict[str, Fraction]], int]:
    """Law of every list's fingerprint segment, varying one list at a time.

    The other lists replay a fixed reference draw.  Also returns how many
    lists moved a segment other than their own.
    """

    P = params.pir.symbols_per_message
    reference = tuple(tuple(range(P)) for _ in range(params.files))
    draws = list(itertools.product(itertools.permutations(range(P)), repeat=params.files))
    base = _server_segments(demands, params, access, server, generator, [reference] * num_lists)

    laws = []
    coupled = 0
    for i in range(num_lists):
        counts: Counter = Counter()
        moved = False
        for draw in draws:
            scripts = [reference] * num_lists
            scripts[i] = draw
            segments = _server_segments(demands, params, access, server, generator, scripts)
            if segments[:i] + segments[i + 1 :] != base[:i] + base[i + 1 :]:
                moved = True
            counts[segments[i]] += 1
        coupled += moved
        laws.append({fp: Fraction(c, len(draws)) for fp, c in counts.items()})
    return laws, coupled


@log_call
def exhaustive_privacy_check(
    params: SystemParams,
    access: AccessStructure,
    server: int,
    *,
    cap: int = DEFAULT_EXACT_CAP,
    generator: QueryGenerator = pir_generate_queries,
) -> ExactAuditResult:
    """Exact distribution comparison of server ``server``'s view.

    Refuses (``SizeLimitError``) when one list needs more than ``cap``
    permutation tuples, the demand vectors exceed ``cap`` or the audit would
    assemble more than ``cap`` bundles.
    """

    if not 1 <= server <= params.servers:
        raise ParameterError(f"server must lie in [1..{params.servers}]; got {server}")
    P = params.pir.symbols_per_message
    per_list = math.factorial(P) ** params.files
    if per_list > cap:
        raise SizeLimitError(
            f"exact audit needs {per_list} permutation tuples per list (cap {cap}); use statistical mode"
        )
    num_demands = params.files**access.num_users
    if num_demands > cap:
        raise SizeLimitError(f"{num_demands} demand vectors exceed the cap of {cap}; use statistical mode")

    family = reduced_subset_family(access, params.t) if params.delivers else []
    lists = [(S, K) for S in family for K in subsets_of(S, params.access_degree) if K in access]
    work = num_demands * len(lists) * per_list
    if work > cap:
        raise SizeLimitError(f"exact audit assembles {work} bundles (cap {cap}); use statistical mode")

    vectors = [
        DemandVector(access, values)
        for values in itertools.product(range(1, params.files + 1), repeat=access.num_users)
    ]
    laws: dict[tuple[str, int], dict[str, Fraction]] = {}
    coupled = 0
    if lists:
        for demands in vectors:
            per_position, moved = _segment_laws(demands, params, access, server, generator, len(lists))
            coupled += moved
            for i, law in enumerate(per_position):
                laws[(demands.as_labels(), i)] = law

    max_tv = Fraction(0)
    for i in range(len(lists)):
        at_position = [laws[(d.as_labels(), i)] for d in vectors]
        for a, b in itertools.combinations(at_position, 2):
            max_tv = max(max_tv, _total_variation(a, b))
    if coupled:
        log.warning(f"{coupled} query lists changed another list's queries; bundle law does not factor")
    passed = max_tv == 0 and coupled == 0

    masses = {m for law in laws.values() for m in law.values()}
    list_mass = masses.pop() if len(masses) == 1 else None
    joint_mass = list_mass ** len(lists) if list_mass is not None else None
    expected = privacy_mass(params, 1, len(lists))

    support_sizes = {}
    rows = []
    for demands in vectors:
        label = demands.as_labels()
        support = math.prod(len(laws[(label, i)]) for i in range(len(lists)))
        support_sizes[label] = support
        rows.append(
            {
                "demand": label,
                "lists": len(lists),
                "support": support,
                "mass": joint_mass if joint_mass is not None else "",
            }
        )

    verdict = "PASS" if passed else "FAIL"
    log.info(f"exact privacy audit, server {server}: {verdict} (max TV {max_tv})")
    return ExactAuditResult(
        server,
        passed,
        max_tv,
        laws,
        support_sizes,
        list_mass,
        joint_mass,
        expected,
        len(lists),
        coupled,
        rows,
    )


# ---------------------------------------------------------------------------
# Statistical mode
# ---------------------------------------------------------------------------
@dataclass
class _Tally:
    histogram: Counter = field(default_factory=Counter)
    lists: int = 0
    count_violations: int = 0
    structure_violations: int = 0

    def merge(self, other: "_Tally") -> "_Tally":
        return _Tally(
            self.histogram + other.histogram,
            self.lists + other.lists,
            self.count_violations + other.count_violations,
            self.structure_violations + other.structure_violations,
        )


@dataclass
class StatisticalAuditResult:
    server: int
    passed: bool
    statistic: float
    p_value: float
    dof: int
    alpha: float
    samples: int
    count_violations: int
    structure_violations: int
    rows: list[dict] = field(default_factory=list)


def _sample(
    demands: DemandVector,
    params: SystemParams,
    access: AccessStructure,
    server: int,
    samples: int,
    seed: np.random.SeedSequence,
    generator: QueryGenerator,
) -> _Tally:
    tally = _Tally()
    expected = params.servers ** (params.files - 1)
    family = reduced_subset_family(access, params.t)
    layout = [(S, K) for S in family for K in subsets_of(S, params.access_degree) if K in access]
    for child in seed.spawn(samples):
        bundle = generate_query_bundles(demands, params, access, child, generator=generator)
        for (S, K), queries in bundle.public.queries.items():
            try:
                check_query_structure(queries, params.pir, demands[K])
            except StructureError:
                tally.structure_violations += 1

        view = bundle.for_server(server)
        sent = [(S, K) for S, per_user in view.queries.items() for K in per_user]
        if sent != layout:
            tally.structure_violations += 1
        patterns = []
        for S, K in sent:
            query = view.queries[S][K]
            counts = distinct_indices_per_message(query, params.files)
            if any(c != expected for c in counts.values()):
                tally.count_violations += 1
            for position, s in enumerate(query.blocks[0]):
                n, j = s[0]
                tally.histogram[f"b1:{position}:{n}.{j}"] += 1
            patterns.append(_message_pattern(query))
            tally.lists += 1
        tally.histogram["order:" + "|".join(patterns)] += 1
    return tally


def _default_demands(access: AccessStructure, files: int) -> list[DemandVector]:
    return [DemandVector(access, (n,) * access.num_users) for n in range(1, min(files, 4) + 1)]


@log_call
def statistical_privacy_check(
    params: SystemParams,
    access: AccessStructure,
    server: int,
    samples: int,
    significance: float = 0.01,
    *,
    seed: int = 0,
    demands: Sequence[DemandVector] | None = None,
    generator: QueryGenerator = pir_generate_queries,
    workers: int = 1,
) -> StatisticalAuditResult:
    """Sampled comparison of server ``server``'s view across demand vectors.

    Default demand vectors are the constant ones ``(n, ..., n)`` for up to
    four files.  Each demand vector samples from its own seed stream.
    """

    if not 1 <= server <= params.servers:
        raise ParameterError(f"server must lie in [1..{params.servers}]; got {server}")
    if samples < 10:
        raise ParameterError(f"statistical audit needs at least 10 samples per demand vector; got {samples}")
    if not 0 < significance < 1:
        raise ParameterError(f"significance must lie in (0, 1); got {significance}")
    if not params.delivers:
        raise ParameterError("no transmissions for t + L > C; nothing to audit")
    demands = list(demands) if demands is not None else _default_demands(access, params.files)
    if len({d.values for d in demands}) < 2:
        raise ParameterError("statistical audit needs at least two distinct demand vectors")

    streams = np.random.SeedSequence(seed).spawn(len(demands))
    jobs = list(zip(demands, streams))

    def run(job):
        d, stream = job
        return _sample(d, params, access, server, samples, stream, generator)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            tallies = list(pool.map(run, jobs))
    else:
        tallies = [run(job) for job in jobs]

    columns = sorted(set().union(*(t.histogram for t in tallies)))
    table = np.array([[t.histogram.get(c, 0) for c in columns] for t in tallies], dtype=np.int64)
    table = table[:, table.sum(axis=0) > 0]
    if table.shape[1] < 2:
        statistic, p_value, dof = 0.0, 1.0, 0
    else:
        statistic, p_value, dof, _ = stats.chi2_contingency(table)
        statistic, p_value, dof = float(statistic), float(p_value), int(dof)

    merged = tallies[0]
    for t in tallies[1:]:
        merged = merged.merge(t)
    passed = p_value >= significance and merged.count_violations == 0 and merged.structure_violations == 0

    rows = [
        {
            "demand": d.as_labels(),
            "samples": samples,
            "lists": t.lists,
            "count_violations": t.count_violations,
            "structure_violations": t.structure_violations,
            "statistic": statistic,
            "p_value": p_value,
        }
        for d, t in zip(demands, tallies)
    ]
    verdict = "PASS" if passed else "FAIL"
    log.info(f"statistical privacy audit, server {server}: {verdict} (chi2 {statistic:.3f}, p {p_value:.4g})")
    return StatisticalAuditResult(
        server,
        passed,
        statistic,
        p_value,
        dof,
        significance,
        samples,
        merged.count_violations,
        merged.structure_violations,
        rows,
    )
