import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from mupir.analysis.rates import coding_gain_ma, rate_theorem1
from mupir.errors import DecodeError, ParameterError, SimulationError
from mupir.models.access import AccessStructure
from mupir.models.params import SystemParams
from mupir.pir.core import check_query_structure
from mupir.scheme.placement import fill_caches, make_library
from mupir.scheme.protocol import (
    DemandVector,
    generate_query_bundles,
    random_demands,
    reduced_subset_family,
    run_memory_sharing,
    run_simulation,
    server_answer,
    user_decode,
)
from mupir.utils.combinatorics import SubsetId, binom


def _sized(servers, files, caches, access_degree, t):
    unit = binom(caches, t) * servers**files
    return SystemParams(servers, files, caches, access_degree, t, unit)


def test_single_transmission_example():
    params = _sized(2, 3, 5, 3, 2)
    access = AccessStructure.full(5, 3)
    demands = DemandVector.of(access, [1, 2, 3, 1, 2, 3, 1, 2, 3, 1])
    result = run_simulation(params, access, demands, seed=7)

    assert result.all_decoded
    log = result.log
    assert log.family_size == 1
    assert log.subpacketization == 80
    assert log.symbols_per_transmission == 7
    assert log.bytes_per_server == {1: 7, 2: 7}
    assert log.measured_rate == Fraction(7, 40)
    assert log.coding_gain == {SubsetId((1, 2, 3, 4, 5), 5): 10}
    assert set(result.durations) == {"placement", "queries", "answers", "decoding"}


@pytest.mark.parametrize(
    "servers,files,caches,access_degree,t",
    [
        (2, 2, 3, 1, 1),
        (2, 2, 4, 2, 0),
        (2, 2, 4, 2, 1),
        (2, 2, 4, 2, 2),
        (2, 3, 4, 1, 2),
        (3, 2, 4, 2, 1),
        (2, 2, 5, 2, 1),
        (2, 2, 5, 3, 2),
        (2, 2, 5, 4, 1),
    ],
)
def test_measured_rate_matches_closed_form(servers, files, caches, access_degree, t):
    params = _sized(servers, files, caches, access_degree, t)
    access = AccessStructure.full(caches, access_degree)
    rng = np.random.default_rng(caches * 100 + t)
    demands = random_demands(access, files, rng)
    result = run_simulation(params, access, demands, seed=caches + t)
    assert result.all_decoded
    assert result.log.measured_rate == rate_theorem1(caches, access_degree, t, servers, files)
    assert result.log.coding_gain_holds(coding_gain_ma(access_degree, t))
    assert result.log.family_size == binom(caches, t + access_degree)


SWEEP = [
    (servers, files, caches, access_degree, t)
    for caches in range(2, 7)
    for access_degree in range(1, caches)
    for t in range(0, caches - access_degree + 1)
    for servers in (2, 3)
    for files in (1, 2, 3)
]


@pytest.mark.parametrize("servers,files,caches,access_degree,t", SWEEP)
def test_rate_and_query_structure_sweep(servers, files, caches, access_degree, t):
    params = _sized(servers, files, caches, access_degree, t)
    access = AccessStructure.full(caches, access_degree)
    rng = np.random.default_rng([servers, files, caches, access_degree, t])
    demands = random_demands(access, files, rng)
    result = run_simulation(params, access, demands, seed=int(rng.integers(2**32)))

    assert result.all_decoded
    assert result.log.measured_rate == rate_theorem1(caches, access_degree, t, servers, files)
    assert result.log.coding_gain_holds(coding_gain_ma(access_degree, t))
    for (S, K), queries in result.bundle.public.queries.items():
        check_query_structure(queries, params.pir, demands[K])


def test_single_transmission_decodes_fifty_demand_vectors():
    params = _sized(2, 3, 5, 3, 2)
    access = AccessStructure.full(5, 3)
    rng = np.random.default_rng(2024)
    seen = set()
    for trial in range(50):
        demands = random_demands(access, 3, rng)
        seen.add(demands.values)
        result = run_simulation(params, access, demands, seed=trial)
        assert result.all_decoded
        assert result.log.measured_rate == Fraction(7, 40)
        for user, data in result.decoded.items():
            assert data == result.library.file(demands[user])
    assert len(seen) > 40


def test_raw_files_decode_unpadded():
    params = SystemParams(2, 2, 4, 2, 1, 30)
    access = AccessStructure.full(4, 2)
    files = [b"first file payload", b"the second one, a little longer"[:30]]
    library = make_library(params, files)
    result = run_simulation(params, access, [2] * access.num_users, seed=1, library=library)
    assert all(out == files[1] for out in result.decoded.values())


def test_no_transmission_when_users_cache_everything():
    params = SystemParams(2, 2, 4, 2, 3, 32)
    access = AccessStructure.full(4, 2)
    result = run_simulation(params, access, [1] * access.num_users, seed=0)
    assert result.all_decoded
    assert result.log.total_bytes == 0
    assert result.log.family_size == 0


def test_spawn_keys_are_distinct_per_list():
    params = _sized(2, 2, 4, 2, 1)
    access = AccessStructure.full(4, 2)
    bundle = generate_query_bundles(DemandVector.of(access, [1] * 6), params, access, seed=3)
    keys = list(bundle.public.spawn_keys.values())
    assert len(keys) == binom(4, 3) * binom(3, 2)
    assert len(set(keys)) == len(keys)


def test_server_bundle_holds_only_queries():
    params = _sized(2, 2, 4, 2, 1)
    access = AccessStructure.full(4, 2)
    bundle = generate_query_bundles(DemandVector.of(access, [2] * 6), params, access, seed=3)
    server = bundle.for_server(2)
    assert set(vars(server)) == {"server_id", "queries"}
    assert server.num_lists == 12
    assert all(q.server_id == 2 for per_user in server.queries.values() for q in per_user.values())


def test_queries_are_reproducible_from_seed():
    params = _sized(2, 2, 4, 2, 1)
    access = AccessStructure.full(4, 2)
    demands = DemandVector.of(access, [1, 2, 1, 2, 1, 2])
    a = generate_query_bundles(demands, params, access, seed=11)
    b = generate_query_bundles(demands, params, access, seed=11)
    assert a.public.queries == b.public.queries


def test_reduced_family_for_missing_users():
    access = AccessStructure.custom(5, [[1, 2], [4, 5]])
    family = reduced_subset_family(access, 1)
    assert all(any(u.issubset(S) for u in access.users) for S in family)
    assert len(family) == 6

    params = _sized(2, 2, 5, 2, 1)
    result = run_simulation(params, access, [1, 2], seed=4)
    assert result.all_decoded
    assert result.log.family_size == 6


def test_user_decode_counts_usage_and_needs_own_list():
    params = _sized(2, 2, 4, 2, 1)
    access = AccessStructure.full(4, 2)
    demands = DemandVector.of(access, [1, 2, 2, 1, 1, 2])
    library = make_library(params, 5)
    caches = fill_caches(library)
    bundle = generate_query_bundles(demands, params, access, seed=5)
    answers = [server_answer(b, library) for b in bundle.servers]
    user = access.users[0]
    usage = Counter()
    assert user_decode(user, 1, answers, bundle.public, caches, usage=usage) == library.file(1)
    assert sum(usage.values()) == binom(2, 1)

    dropped = answers[0].symbols.copy()
    dropped.pop(next(iter(dropped)))
    broken = [type(answers[0])(1, dropped), answers[1]]
    with pytest.raises(DecodeError):
        for u in access.users:
            user_decode(u, demands[u], broken, bundle.public, caches)


def test_corrupted_broadcast_fails_simulation():
    def flipped(desired, params, rng):
        from mupir.pir.core import pir_generate_queries

        return pir_generate_queries(desired % params.num_messages + 1, params, rng)

    params = _sized(2, 2, 4, 2, 1)
    access = AccessStructure.full(4, 2)
    with pytest.raises(SimulationError):
        run_simulation(params, access, [1] * 6, seed=0, generator=flipped)


def test_demands_validated():
    params = _sized(2, 2, 4, 2, 1)
    access = AccessStructure.full(4, 2)
    with pytest.raises(ParameterError):
        run_simulation(params, access, [3] * 6, seed=0)
    with pytest.raises(ParameterError):
        DemandVector.of(access, [1, 2])


def test_threaded_answers_match_serial():
    params = _sized(2, 2, 4, 2, 1)
    access = AccessStructure.full(4, 2)
    serial = run_simulation(params, access, [1, 2, 1, 2, 1, 2], seed=2)
    threaded = run_simulation(params, access, [1, 2, 1, 2, 1, 2], seed=2, workers=2)
    assert serial.log.bytes_per_subset == threaded.log.bytes_per_subset
    assert serial.decoded == threaded.decoded


def test_memory_sharing_between_neighbouring_points():
    access = AccessStructure.full(4, 2)
    low = SystemParams(2, 2, 4, 2, 1, 16)
    high = SystemParams(2, 2, 4, 2, 2, 24)
    result = run_memory_sharing(low, high, Fraction(2, 5), access, [1] * 6, seed=0)
    expected = Fraction(2, 5) * rate_theorem1(4, 2, 1, 2, 2) + Fraction(3, 5) * rate_theorem1(4, 2, 2, 2, 2)
    assert result.measured_rate == expected
    assert result.effective_t == Fraction(8, 5)


def test_memory_sharing_rejects_inexact_split():
    access = AccessStructure.full(4, 2)
    low = SystemParams(2, 2, 4, 2, 1, 16)
    with pytest.raises(ParameterError):
        run_memory_sharing(low, SystemParams(2, 2, 4, 2, 2, 24), "1/2", access, [1] * 6, seed=0)
    with pytest.raises(ParameterError):
        run_memory_sharing(low, SystemParams(2, 2, 4, 2, 2, 20), Fraction(4, 9), access, [1] * 6, seed=0)
    with pytest.raises(ParameterError):
        run_memory_sharing(low, SystemParams(2, 2, 4, 2, 0, 24), Fraction(2, 5), access, [1] * 6, seed=0)
