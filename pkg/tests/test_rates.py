import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from fractions import Fraction

import pytest

from mupir.analysis.rates import (
    RatePoint,
    SCENARIO_HEADER,
    compare_scenarios,
    format_rate,
    memory_sharing_envelope,
    optimality_ratio,
    pir_factor,
    rate_cyclic_unreduced,
    rate_dedicated_cyclic_sweep,
    rate_nopir,
    rate_product_design,
    rate_theorem1,
    rate_theorem3,
)
from mupir.errors import DomainError, ParameterError
from mupir.utils.combinatorics import binom


def test_theorem1_single_transmission():
    assert rate_theorem1(5, 3, 2, 2, 3) == Fraction(7, 40)
    assert rate_nopir(5, 3, 2) == Fraction(1, 10)
    assert rate_theorem1(8, 2, 6, 2, 3) == Fraction(1, binom(8, 6)) * Fraction(7, 4)


def test_nopir_examples():
    assert rate_nopir(8, 2, 3) == 1
    for t in range(0, 8):
        assert rate_nopir(8, 1, t) == Fraction(8 - t, t + 1)


def test_product_design_examples():
    assert rate_product_design(8, 2, 2, 3) == Fraction(7, 2)
    assert rate_product_design(8, 3, 2, 3) == Fraction(35, 16)
    assert rate_product_design(6, 6, 2, 3) == 0
    with pytest.raises(DomainError):
        rate_product_design(4, 5, 2, 2)


def test_theorem3_examples():
    assert rate_theorem3(8, 2, 2, 2, 3) == Fraction(7, 2)
    assert rate_theorem3(8, 2, 2, 2, 3) / 8 == Fraction(7, 16)
    assert rate_cyclic_unreduced(8, 2, 2, 2, 3) / 8 == Fraction(17, 32)
    assert rate_theorem3(8, 2, 3, 2, 3) / 8 == Fraction(7, 32)
    assert rate_theorem3(8, 2, 0, 2, 3) == 8 * Fraction(7, 4)


def test_theorem1_reduces_to_product_design_for_one_cache():
    for C in range(2, 9):
        for t in range(0, C):
            assert rate_theorem1(C, 1, t, 2, 3) == rate_product_design(C, t, 2, 3)


def test_cyclic_never_above_product_design():
    for C in range(3, 10):
        for L in range(1, C):
            for t in range(0, C - L + 1):
                assert rate_theorem3(C, L, t, 3, 2) <= rate_product_design(C, t, 3, 2)


def test_optimality_ratio_is_pir_factor():
    assert optimality_ratio(5, 3, 2, 2, 3) == Fraction(7, 4)
    assert optimality_ratio(6, 2, 1, 2, 1) == 1
    assert optimality_ratio(6, 2, 1, 3, 4) == Fraction(40, 27)
    assert pir_factor(2, 30) < 2
    with pytest.raises(ParameterError):
        pir_factor(1, 3)


@pytest.mark.parametrize("servers", [2, 3])
@pytest.mark.parametrize("files", [1, 2, 3])
def test_optimality_ratio_over_grid(servers, files):
    factor = sum(Fraction(1, servers**i) for i in range(files))
    assert pir_factor(servers, files) == factor
    for C in range(2, 7):
        for L in range(1, C):
            for t in range(0, C - L + 1):
                ratio = optimality_ratio(C, L, t, servers, files)
                assert ratio == factor
                assert ratio < 2


@pytest.mark.parametrize("args", [(5, 3, 3), (5, 0, 1), (5, 5, 0), (5, 2, -1)])
def test_theorem1_domain(args):
    with pytest.raises(DomainError):
        rate_nopir(*args)


def test_envelope_midpoint_and_hull():
    env = memory_sharing_envelope([(0, 4), (2, 0)])
    assert env(1) == 2
    points = [(0, 8), (1, 6), (2, 2), (3, 1)]
    env = memory_sharing_envelope(points)
    assert (1, 6) not in env.vertices
    assert all(env(t) <= r for t, r in points)
    assert env("3/2") == Fraction(7, 2)
    with pytest.raises(DomainError):
        env(4)


def test_cyclic_sweep_uses_dedicated_branch_at_t2():
    rows = rate_dedicated_cyclic_sweep(8, 2, 2, 3)
    at2 = rows[2]
    assert at2["theorem3_per_user"] == Fraction(7, 16)
    assert at2["cyclic_per_user"] == Fraction(17, 32)
    assert at2["envelope_per_user"] <= at2["theorem3_per_user"]
    assert rows[-1]["cyclic"] == 0


def test_rate_point_per_user():
    p = RatePoint(Fraction(2), Fraction(7, 2), 8, "theorem3")
    assert p.per_user_rate == Fraction(7, 16)


def test_format_rate():
    assert format_rate(Fraction(7, 40)) == "7/40 (0.175000)"


def test_scenario1_rows():
    tables = compare_scenarios(8, 2, 3, scenarios=[1])
    row = tables[1].find(2, 2)
    assert row.users_ma == 28 and row.users_dc == 8
    assert row.per_user_ma == rate_theorem1(8, 2, 2, 2, 3) / 28
    assert row.as_csv_row()["coding_gain_ma"] == "6"
    assert row.as_csv_row()["coding_gain_dc"] == "3"


def test_scenario2_equal_memory_per_user():
    table = compare_scenarios(8, 2, 3, scenarios=[2])[2]
    for L in range(1, 8):
        assert table.find(L, L).ratio == 1
    row = table.find(2, 4)
    assert row.per_user_dc / row.pir == Fraction(1, 10)
    assert row.per_user_ma / row.pir == Fraction(5, 56)
    assert 1 / (row.per_user_ma / row.pir) == Fraction(56, 5)
    odd = table.find(2, 3)
    assert odd.interpolated and odd.t_ma == Fraction(3, 2)
    assert any(note.startswith("L=2 t_dc=3: multi-access point interpolated") for note in table.notes)
    assert len(table.notes) == sum(row.interpolated for row in table.rows)


def test_scenario3_same_users():
    table = compare_scenarios(6, 2, 2, scenarios=[3])[3]
    row = table.find(3, 1)
    assert row.users_ma == row.users_dc == 20
    assert row.rate_dc == rate_product_design(20, 1, 2, 2)
    assert row.ratio < 1


def test_scenario4_cyclic():
    row = compare_scenarios(8, 2, 3, scenarios=[4])[4].find(2, 3)
    assert row.per_user_ma == Fraction(7, 32)
    assert row.per_user_dc == Fraction(35, 128)


def test_scenario_csv_header_matches_rows():
    tables = compare_scenarios(5, 2, 2)
    for table in tables.values():
        for row in table.rows:
            assert list(row.as_csv_row()) == SCENARIO_HEADER


def test_compare_rejects_unknown_scenario():
    with pytest.raises(ParameterError):
        compare_scenarios(8, 2, 3, scenarios=[5])
