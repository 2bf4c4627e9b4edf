import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from fractions import Fraction

import pytest

from mupir.analysis.rates import rate_theorem3
from mupir.errors import ParameterError
from mupir.models.params import SystemParams
from mupir.scheme.cyclic import (
    TransmissionPlan,
    choose_plan,
    cyclic_subset_family,
    dedicated_fallback_delivery,
    run_cyclic_simulation,
)
from mupir.utils.combinatorics import SubsetId, binom, cyc_closed_form, cyc_oracle, enumerate_subsets


def _sized(caches, access_degree, t, servers=2, files=3):
    return SystemParams(servers, files, caches, access_degree, t, binom(caches, t) * servers**files)


@pytest.mark.parametrize("caches", range(3, 11))
def test_family_size_is_cyc(caches):
    for L in range(1, caches):
        for t in range(0, caches - L + 1):
            family = cyclic_subset_family(caches, L, t)
            assert len(family) == cyc_closed_form(caches, t + L, L).total == cyc_oracle(caches, t + L, L)


def test_family_members_hold_a_window():
    family = cyclic_subset_family(4, 2, 1)
    assert len(family) == 4
    assert SubsetId((1, 2, 4), 4) in family


def test_plan_dedicated_branch_at_t2():
    plan = choose_plan(8, 2, 2)
    assert plan.mode == "dedicated-fallback"
    assert plan.multiaccess_factor == Fraction(68, 28)
    assert plan.dedicated_factor == 2
    assert plan.expected_transmissions == binom(8, 3)


def test_plan_multiaccess_branch_at_t3():
    plan = choose_plan(8, 2, 3)
    assert plan.mode == "multiaccess-cyclic"
    assert plan.rate_factor == 1
    assert plan.expected_transmissions == 56


def test_plan_single_subset_at_top():
    plan = choose_plan(8, 2, 6)
    assert plan.family == (SubsetId(tuple(range(1, 9)), 8),)
    assert plan.mode == "multiaccess-cyclic"


def test_plan_without_transmissions():
    plan = choose_plan(5, 3, 3)
    assert plan.family == ()
    assert plan.rate_factor == 0


def test_plan_rejects_bad_degree():
    with pytest.raises(ParameterError):
        choose_plan(4, 4, 0)


def test_fallback_wiring():
    wiring = dedicated_fallback_delivery(_sized(5, 2, 1))
    assert wiring.params.access_degree == 1
    assert wiring.access.num_users == 5
    assert wiring.user_map[SubsetId((1, 5), 5)] == SubsetId((5,), 5)


@pytest.mark.parametrize("t,per_user", [(2, Fraction(7, 16)), (3, Fraction(7, 32))])
def test_cyclic_per_user_rates(t, per_user):
    params = _sized(8, 2, t)
    demands = [1, 2, 3, 1, 2, 3, 1, 2]
    run = run_cyclic_simulation(params, demands, seed=t)
    assert run.result.all_decoded
    assert run.per_user_rate == per_user
    assert run.measured_rate == rate_theorem3(8, 2, t, 2, 3)
    assert set(run.decoded) == {str(k) for k in range(1, 9)}
    for label, d in zip(run.decoded, demands):
        assert run.decoded[label] == run.result.library.file(d)


def test_cyclic_rate_never_above_dedicated():
    for t in range(0, 7):
        plan = choose_plan(8, 2, t)
        assert plan.rate_factor <= plan.dedicated_factor


CYCLIC_SWEEP = [
    (caches, access_degree, t)
    for caches in range(3, 9)
    for access_degree in range(1, caches)
    for t in range(0, caches - access_degree + 1)
]


@pytest.mark.parametrize("caches,access_degree,t", CYCLIC_SWEEP)
def test_cyclic_rate_sweep(caches, access_degree, t):
    params = _sized(caches, access_degree, t, files=2)
    demands = [k % 2 + 1 for k in range(caches)]
    run = run_cyclic_simulation(params, demands, seed=caches * 10 + t)
    assert run.result.all_decoded
    assert run.measured_rate == rate_theorem3(caches, access_degree, t, 2, 2)
    assert run.plan == choose_plan(caches, access_degree, t)
    for label, d in zip(run.decoded, demands):
        assert run.decoded[label] == run.result.library.file(d)


def test_both_plans_decode_identically():
    params = _sized(4, 2, 1)
    demands = [3, 1, 2, 2]
    chosen = choose_plan(4, 2, 1)
    assert chosen.mode == "multiaccess-cyclic"
    assert chosen.multiaccess_factor == 1
    assert chosen.dedicated_factor == Fraction(3, 2)
    dedicated = TransmissionPlan(
        "dedicated-fallback", 4, 2, 1, tuple(enumerate_subsets(4, 2)), chosen.multiaccess_factor, chosen.dedicated_factor
    )

    multi = run_cyclic_simulation(params, demands, seed=9)
    fallback = run_cyclic_simulation(params, demands, seed=9, plan=dedicated)
    assert multi.result.all_decoded and fallback.result.all_decoded
    assert multi.decoded == fallback.decoded
    for label, d in zip(multi.decoded, demands):
        assert multi.decoded[label] == multi.result.library.file(d)
    assert multi.result.log.family_size == 4
    assert fallback.result.log.family_size == binom(4, 2)
