"""Closed-form rates, memory sharing and the dedicated-vs-multi-access tables.

All values are :class:`fractions.Fraction`; decimals are only produced for
display and CSV output.  ``PF(S, N) = 1 + 1/S + ... + 1/S^(N-1)`` is the
PIR factor every delivery rate is multiplied with.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from mupir.errors import DomainError, ParameterError
from mupir.utils.combinatorics import binom, cyc_closed_form

__all__ = [
    "RatePoint",
    "Envelope",
    "ScenarioRow",
    "ScenarioTable",
    "pir_factor",
    "rate_theorem1",
    "rate_nopir",
    "rate_product_design",
    "rate_cyclic_unreduced",
    "rate_theorem3",
    "optimality_ratio",
    "coding_gain_ma",
    "coding_gain_dc",
    "memory_sharing_envelope",
    "rate_dedicated_cyclic_sweep",
    "compare_scenarios",
    "format_rate",
    "decimal",
    "SCENARIOS",
    "SCENARIO_HEADER",
]

SCENARIOS = {
    1: "same caches, same cache size",
    2: "same caches, same memory per user",
    3: "same users, same total memory",
    4: "cyclic wraparound access, same caches and cache size",
}


def format_rate(value: Fraction) -> str:
    """``Fraction(7, 40)`` → ``"7/40 (0.175000)"``."""

    return f"{value} ({float(value):.6f})"


def decimal(value: Fraction) -> str:
    return f"{float(value):.6f}"


def pir_factor(servers: int, files: int) -> Fraction:
    if servers < 2 or files < 1:
        raise ParameterError(f"PIR factor needs S >= 2 and N >= 1; got S = {servers}, N = {files}")
    return sum((Fraction(1, servers**i) for i in range(files)), Fraction(0))


def _check_ma(caches: int, access_degree: int, t: int) -> None:
    if not 1 <= access_degree < caches:
        raise DomainError(f"access degree must satisfy 1 <= L < C; got L = {access_degree}, C = {caches}")
    if not 0 <= t <= caches - access_degree:
        raise DomainError(f"rate formula needs 0 <= t <= C - L; got t = {t}, C = {caches}, L = {access_degree}")


def rate_nopir(caches: int, access_degree: int, t: int) -> Fraction:
    """Multi-access coded caching rate ``binom(C, t+L) / binom(C, t)``."""

    _check_ma(caches, access_degree, t)
    return Fraction(binom(caches, t + access_degree), binom(caches, t))


def rate_theorem1(caches: int, access_degree: int, t: int, servers: int, files: int) -> Fraction:
    """Private multi-access rate: the coded caching rate times the PIR factor."""

    return rate_nopir(caches, access_degree, t) * pir_factor(servers, files)


def rate_product_design(users: int, t: int, servers: int, files: int) -> Fraction:
    """Dedicated-cache private rate ``(K - t) / (t + 1)`` times the PIR factor."""

    if not 0 <= t <= users:
        raise DomainError(f"product design needs 0 <= t <= K; got t = {t}, K = {users}")
    return Fraction(users - t, t + 1) * pir_factor(servers, files)


def rate_cyclic_unreduced(caches: int, access_degree: int, t: int, servers: int, files: int) -> Fraction:
    """Cyclic access served only by the reduced multi-access family."""

    _check_ma(caches, access_degree, t)
    count = cyc_closed_form(caches, t + access_degree, access_degree).total
    return Fraction(count, binom(caches, t)) * pir_factor(servers, files)


def rate_theorem3(caches: int, access_degree: int, t: int, servers: int, files: int) -> Fraction:
    """Cyclic access rate: the cheaper of the reduced family and the dedicated scheme."""

    _check_ma(caches, access_degree, t)
    count = cyc_closed_form(caches, t + access_degree, access_degree).total
    factor = min(Fraction(caches - t, t + 1), Fraction(count, binom(caches, t)))
    return factor * pir_factor(servers, files)


def optimality_ratio(caches: int, access_degree: int, t: int, servers: int, files: int) -> Fraction:
    """Private rate over the non-private rate, which is the PIR factor (< 2)."""

    ratio = rate_theorem1(caches, access_degree, t, servers, files) / rate_nopir(caches, access_degree, t)
    if ratio > 2:
        raise DomainError(f"ratio {ratio} exceeds 2 for S = {servers}, N = {files}")
    return ratio


def coding_gain_ma(access_degree: int, t: int) -> int:
    """Users served by one multi-access transmission."""

    return binom(access_degree + t, access_degree)


def coding_gain_dc(t: int) -> int:
    return t + 1


# ---------------------------------------------------------------------------
# Memory sharing
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class RatePoint:
    t: Fraction
    rate: Fraction
    users: int
    scenario: str = ""

    @property
    def per_user_rate(self) -> Fraction:
        return self.rate / self.users


@dataclass(frozen=True)
class Envelope:
    """Piecewise-linear lower convex envelope of ``(t, rate)`` points."""

    vertices: tuple[tuple[Fraction, Fraction], ...]

    def __call__(self, t: Fraction | int | str) -> Fraction:
        t = Fraction(t)
        lo, hi = self.vertices[0][0], self.vertices[-1][0]
        if not lo <= t <= hi:
            raise DomainError(f"t = {t} outside the envelope range [{lo}, {hi}]")
        for (t0, r0), (t1, r1) in zip(self.vertices, self.vertices[1:]):
            if t0 <= t <= t1:
                return r0 + (r1 - r0) * (t - t0) / (t1 - t0)
        return self.vertices[0][1]


def _cross(o, a, b) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def memory_sharing_envelope(points: Iterable[tuple[Fraction | int, Fraction | int]]) -> Envelope:
    """Lower convex hull over ``points`` (monotone chain, exact arithmetic).

    Duplicate ``t`` keep the smallest rate.
    """

    best: dict[Fraction, Fraction] = {}
    for t, r in points:
        t, r = Fraction(t), Fraction(r)
        best[t] = min(r, best.get(t, r))
    if not best:
        raise ParameterError("memory sharing needs at least one operating point")
    hull: list[tuple[Fraction, Fraction]] = []
    for p in sorted(best.items()):
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], p) <= 0:
            hull.pop()
        hull.append(p)
    return Envelope(tuple(hull))


def rate_dedicated_cyclic_sweep(caches: int, access_degree: int, servers: int, files: int) -> list[dict]:
    """Per memory point ``t = 0..C``: reduced cyclic, dedicated, min and envelope.

    For ``t > C - L`` every cyclic user caches its whole file and the cyclic
    rate is zero.
    """

    rows = []
    best = []
    for t in range(caches + 1):
        dedicated = rate_product_design(caches, t, servers, files)
        if t <= caches - access_degree:
            cyclic = rate_cyclic_unreduced(caches, access_degree, t, servers, files)
            chosen = rate_theorem3(caches, access_degree, t, servers, files)
        else:
            cyclic = chosen = Fraction(0)
        best.append((t, chosen))
        rows.append({"t": t, "cyclic": cyclic, "dedicated": dedicated, "theorem3": chosen})
    envelope = memory_sharing_envelope(best)
    for row in rows:
        row["envelope"] = envelope(row["t"])
        for key in ("cyclic", "dedicated", "theorem3", "envelope"):
            row[f"{key}_per_user"] = row[key] / caches
    return rows


# ---------------------------------------------------------------------------
# Scenario tables
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ScenarioRow:
    scenario: int
    access_degree: int
    t_ma: Fraction
    t_dc: Fraction
    users_ma: int
    users_dc: int
    rate_ma: Fraction
    rate_dc: Fraction
    pir: Fraction
    interpolated: bool = False

    @property
    def per_user_ma(self) -> Fraction:
        return self.rate_ma / self.users_ma

    @property
    def per_user_dc(self) -> Fraction:
        return self.rate_dc / self.users_dc

    @property
    def ratio(self) -> Fraction | None:
        return self.per_user_ma / self.per_user_dc if self.per_user_dc else None

    def as_csv_row(self) -> dict[str, str]:
        ratio = self.ratio
        gain_ma = coding_gain_ma(self.access_degree, int(self.t_ma)) if self.t_ma.denominator == 1 else ""
        gain_dc = coding_gain_dc(int(self.t_dc)) if self.t_dc.denominator == 1 else ""
        return {
            "scenario": str(self.scenario),
            "L": str(self.access_degree),
            "t_ma": str(self.t_ma),
            "t_dc": str(self.t_dc),
            "K_ma": str(self.users_ma),
            "K_dc": str(self.users_dc),
            "per_user_ma": str(self.per_user_ma),
            "per_user_ma_dec": decimal(self.per_user_ma),
            "per_user_dc": str(self.per_user_dc),
            "per_user_dc_dec": decimal(self.per_user_dc),
            "per_user_ma_nopir": str(self.per_user_ma / self.pir),
            "per_user_dc_nopir": str(self.per_user_dc / self.pir),
            "ratio": "" if ratio is None else str(ratio),
            "ratio_dec": "" if ratio is None else decimal(ratio),
            "coding_gain_ma": str(gain_ma),
            "coding_gain_dc": str(gain_dc),
            "interpolated": "1" if self.interpolated else "0",
        }


SCENARIO_HEADER = [
    "scenario",
    "L",
    "t_ma",
    "t_dc",
    "K_ma",
    "K_dc",
    "per_user_ma",
    "per_user_ma_dec",
    "per_user_dc",
    "per_user_dc_dec",
    "per_user_ma_nopir",
    "per_user_dc_nopir",
    "ratio",
    "ratio_dec",
    "coding_gain_ma",
    "coding_gain_dc",
    "interpolated",
]


@dataclass
class ScenarioTable:
    scenario: int
    caches: int
    rows: list[ScenarioRow] = field(default_factory=list)
    # rows whose multi-access point is memory-shared between integer t
    notes: list[str] = field(default_factory=list)

    @property
    def title(self) -> str:
        return SCENARIOS[self.scenario]

    def find(self, access_degree: int, t_dc: int | Fraction) -> ScenarioRow:
        for row in self.rows:
            if row.access_degree == access_degree and row.t_dc == Fraction(t_dc):
                return row
        raise KeyError(f"scenario {self.scenario} has no row L={access_degree}, t_dc={t_dc}")


def _ma_rate_or_zero(caches: int, access_degree: int, t: int, servers: int, files: int) -> Fraction:
    if t > caches - access_degree:
        return Fraction(0)
    return rate_theorem1(caches, access_degree, t, servers, files)


def compare_scenarios(
    caches: int,
    servers: int,
    files: int,
    scenarios: Sequence[int] = (1, 2, 3, 4),
) -> dict[int, ScenarioTable]:
    """Per-user rate comparison of multi-access and dedicated systems.

    1. ``C`` caches in both, ``t_MA = t_DC``; ``K_MA = binom(C, L)``.
    2. ``C`` caches in both, equal memory per user: ``t_MA = t_DC / L``.
       Fractional ``t_MA`` rows use the memory sharing envelope and are
       marked ``interpolated``.
    3. ``K = binom(C, L)`` users in both, equal total memory: ``t_DC = t_MA``.
    4. Cyclic wraparound access with ``K = C`` users against ``C``
       dedicated users, equal cache size.
    """

    if caches < 2:
        raise ParameterError(f"comparison needs C >= 2 caches; got C = {caches}")
    unknown = [s for s in scenarios if s not in SCENARIOS]
    if unknown:
        raise ParameterError(f"unknown scenario(s) {unknown}; choose from 1..4")
    pf = pir_factor(servers, files)
    tables: dict[int, ScenarioTable] = {}

    for scenario in scenarios:
        table = ScenarioTable(scenario, caches)
        for L in range(1, caches):
            k_ma = binom(caches, L)
            if scenario == 1:
                for t in range(caches - L + 1):
                    table.rows.append(
                        ScenarioRow(
                            1, L, Fraction(t), Fraction(t), k_ma, caches,
                            rate_theorem1(caches, L, t, servers, files),
                            rate_product_design(caches, t, servers, files),
                            pf,
                        )
                    )
            elif scenario == 2:
                envelope = memory_sharing_envelope(
                    (t, _ma_rate_or_zero(caches, L, t, servers, files)) for t in range(caches + 1)
                )
                for t_dc in range(caches + 1):
                    t_ma = Fraction(t_dc, L)
                    interpolated = t_ma.denominator != 1
                    rate_ma = envelope(t_ma) if interpolated else _ma_rate_or_zero(caches, L, int(t_ma), servers, files)
                    if interpolated:
                        table.notes.append(
                            f"L={L} t_dc={t_dc}: multi-access point interpolated at t_ma={t_ma} "
                            f"between t={math.floor(t_ma)} and t={math.ceil(t_ma)}"
                        )
                    table.rows.append(
                        ScenarioRow(
                            2, L, t_ma, Fraction(t_dc), k_ma, caches,
                            rate_ma,
                            rate_product_design(caches, t_dc, servers, files),
                            pf,
                            interpolated,
                        )
                    )
            elif scenario == 3:
                for t in range(caches - L + 1):
                    table.rows.append(
                        ScenarioRow(
                            3, L, Fraction(t), Fraction(t), k_ma, k_ma,
                            rate_theorem1(caches, L, t, servers, files),
                            rate_product_design(k_ma, t, servers, files),
                            pf,
                        )
                    )
            else:
                for t in range(caches - L + 1):
                    table.rows.append(
                        ScenarioRow(
                            4, L, Fraction(t), Fraction(t), caches, caches,
                            rate_theorem3(caches, L, t, servers, files),
                            rate_product_design(caches, t, servers, files),
                            pf,
                        )
                    )
        tables[scenario] = table
    return tables
