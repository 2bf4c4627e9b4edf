import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

import math

import pytest
from hypothesis import given, settings, strategies as st

from mupir.errors import CountOverflowError, DomainError, ParameterError, SizeLimitError
from mupir.utils.combinatorics import (
    SubsetId,
    binom,
    checked_add,
    checked_mul,
    cyc_closed_form,
    cyc_oracle,
    enumerate_subsets,
    subsets_of,
)


def test_binom_zero_convention():
    assert binom(5, 2) == 10
    assert binom(5, 0) == 1
    assert binom(3, 5) == 0
    assert binom(3, -1) == 0
    assert binom(-1, 0) == 0


@pytest.mark.parametrize("n", range(2, 31))
def test_binom_pascal_rule(n):
    for k in range(1, n):
        assert binom(n, k) == binom(n - 1, k - 1) + binom(n - 1, k)


@pytest.mark.parametrize("n", range(0, 31))
def test_binom_boundary_rows(n):
    assert binom(n, 0) == binom(n, n) == 1
    assert binom(n, n + 1) == 0
    assert sum(binom(n, k) for k in range(n + 1)) == 2**n


def test_binom_overflow():
    with pytest.raises(CountOverflowError):
        binom(100, 50)
    with pytest.raises(CountOverflowError):
        checked_add(2**64 - 1, 1)
    with pytest.raises(CountOverflowError):
        checked_mul(2**32, 2**32)
    assert checked_mul(2**32, 2**32 - 1) == 2**64 - 2**32


def test_enumerate_subsets_canonical_order():
    subsets = enumerate_subsets(4, 2)
    assert [s.members for s in subsets] == [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]
    assert enumerate_subsets(3, 4) == []
    assert enumerate_subsets(3, 0) == [SubsetId((), 3)]


def test_subset_operations():
    a = SubsetId.of([3, 1], 5)
    b = SubsetId.of([2, 3], 5)
    assert a.members == (1, 3)
    assert a.label() == "{1,3}"
    assert a.union(b) == SubsetId((1, 2, 3), 5)
    assert a.difference(b) == SubsetId((1,), 5)
    assert a.intersects(b)
    assert SubsetId((1,), 5).issubset(a)
    assert [s.members for s in subsets_of(a, 1)] == [(1,), (3,)]


@pytest.mark.parametrize("members", [(2, 1), (0, 1), (1, 6)])
def test_subset_rejects_bad_members(members):
    with pytest.raises(ParameterError):
        SubsetId(members, 5)


def test_cyc_values_from_cyclic_access():
    assert cyc_closed_form(8, 4, 2).total == 68
    assert cyc_closed_form(8, 5, 2).total == 56
    assert cyc_closed_form(8, 3, 2).total == 40


def test_cyc_breakdown_sums_to_total():
    b = cyc_closed_form(8, 4, 2)
    assert (b.k1, b.k2, b.k3, b.k41, b.k42) == (19, 19, 15, 0, 15)
    assert b.as_dict()["total"] == 68


def test_cyc_full_circle_extension():
    b = cyc_closed_form(6, 6, 3)
    assert (b.k1, b.k2, b.k3, b.k41, b.k42, b.total) == (0, 0, 0, 0, 1, 1)
    assert cyc_oracle(6, 6, 3) == 1


@pytest.mark.parametrize("n,k,m", [(5, 3, 0), (5, 2, 3), (5, 6, 2)])
def test_cyc_domain(n, k, m):
    with pytest.raises(DomainError):
        cyc_closed_form(n, k, m)


def test_cyc_run_of_length_one_is_every_subset():
    assert cyc_closed_form(9, 4, 1).total == binom(9, 4)


def test_cyc_run_as_long_as_subset_is_n():
    for n in range(3, 10):
        for k in range(1, n):
            assert cyc_closed_form(n, k, k).total == n


def test_cyc_no_two_adjacent_complement():
    # subsets without two cyclically adjacent members: n/(n-k) * binom(n-k, k)
    for n in range(4, 12):
        for k in range(2, n // 2 + 1):
            independent = n * binom(n - k, k) // (n - k)
            assert cyc_closed_form(n, k, 2).total == binom(n, k) - independent


def test_cyc_closed_form_matches_oracle_sweep():
    for n in range(1, 13):
        for k in range(1, n + 1):
            for m in range(1, k + 1):
                assert cyc_closed_form(n, k, m).total == cyc_oracle(n, k, m), (n, k, m)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=2, max_value=14).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.integers(min_value=1, max_value=n).flatmap(
            lambda k: st.tuples(st.just(k), st.integers(min_value=1, max_value=k))
        ),
    )
))
def test_cyc_property(args):
    n, (k, m) = args
    total = cyc_closed_form(n, k, m).total
    assert total == cyc_oracle(n, k, m)
    assert 0 <= total <= math.comb(n, k)


def test_cyc_oracle_cap():
    with pytest.raises(SizeLimitError):
        cyc_oracle(21, 3, 2)
    assert cyc_oracle(8, 4, 2, cap=8) == 68
