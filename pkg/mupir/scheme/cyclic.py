"""Delivery for ``C`` users reading ``L`` cyclically consecutive caches.

With only ``K = C`` users most ``(t+L)``-subsets serve nobody.  Two ways to
deliver are compared per memory point:

``multiaccess-cyclic``
    keep the ``cyc(C, t+L, L)`` subsets that contain some user's window,
    rate ``cyc(C, t+L, L) / binom(C, t)`` times the PIR factor;
``dedicated-fallback``
    ignore all but the first cache of every user and run the ``L = 1``
    scheme, rate ``(C - t) / (t + 1)`` times the PIR factor.

The cheaper plan wins; ties go to ``multiaccess-cyclic``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np

from mupir.errors import DomainError, ParameterError
from mupir.models.access import AccessStructure, cyclic_user_caches
from mupir.models.params import SystemParams
from mupir.scheme.protocol import DemandVector, SimulationResult, run_simulation
from mupir.utils.combinatorics import SubsetId, binom, cyc_closed_form, enumerate_subsets
from mupir.utils.logging import log, log_call

__all__ = [
    "PlanMode",
    "TransmissionPlan",
    "FallbackWiring",
    "CyclicRunResult",
    "cyclic_subset_family",
    "choose_plan",
    "dedicated_fallback_delivery",
    "run_cyclic_simulation",
]

PlanMode = Literal["multiaccess-cyclic", "dedicated-fallback"]


def _check(caches: int, access_degree: int, t: int) -> None:
    if not 1 <= access_degree < caches:
        raise ParameterError(f"access degree must satisfy 1 <= L < C; got L = {access_degree}, C = {caches}")
    if not 0 <= t <= caches:
        raise ParameterError(f"t = CM/N must lie in [0..C]; got t = {t}, C = {caches}")


def cyclic_subset_family(caches: int, access_degree: int, t: int) -> list[SubsetId]:
    """``(t+L)``-subsets containing ``L`` cyclically consecutive caches."""

    _check(caches, access_degree, t)
    windows = [cyclic_user_caches(caches, access_degree, k) for k in range(1, caches + 1)]
    return [
        S
        for S in enumerate_subsets(caches, t + access_degree)
        if any(w.issubset(S) for w in windows)
    ]


@dataclass(frozen=True)
class TransmissionPlan:
    mode: PlanMode
    caches: int
    access_degree: int
    t: int
    family: tuple[SubsetId, ...]
    multiaccess_factor: Fraction
    dedicated_factor: Fraction

    @property
    def expected_transmissions(self) -> int:
        return len(self.family)

    @property
    def rate_factor(self) -> Fraction:
        """Rate without the PIR factor for the chosen mode."""

        return min(self.multiaccess_factor, self.dedicated_factor)


def choose_plan(caches: int, access_degree: int, t: int) -> TransmissionPlan:
    """Pick the cheaper of the reduced cyclic family and the dedicated scheme.

    Factors are compared as exact fractions.  For ``t + L > C`` every user
    already caches all it needs; the plan is ``multiaccess-cyclic`` with no
    transmissions.
    """

    _check(caches, access_degree, t)
    dedicated = Fraction(caches - t, t + 1)
    if t + access_degree > caches:
        return TransmissionPlan("multiaccess-cyclic", caches, access_degree, t, (), Fraction(0), dedicated)

    count = cyc_closed_form(caches, t + access_degree, access_degree).total
    multiaccess = Fraction(count, binom(caches, t))
    if multiaccess <= dedicated:
        family = tuple(cyclic_subset_family(caches, access_degree, t))
        if len(family) != count:
            raise DomainError(f"cyclic family has {len(family)} subsets, closed form says {count}")
        mode: PlanMode = "multiaccess-cyclic"
    else:
        family = tuple(enumerate_subsets(caches, t + 1))
        mode = "dedicated-fallback"
    log.verbose(f"C={caches} L={access_degree} t={t}: {mode} ({multiaccess} vs {dedicated})")
    return TransmissionPlan(mode, caches, access_degree, t, family, multiaccess, dedicated)


@dataclass(frozen=True)
class FallbackWiring:
    """The ``L = 1`` system a cyclic deployment runs in fallback mode."""

    params: SystemParams
    access: AccessStructure
    user_map: dict[SubsetId, SubsetId]

    def demands(self, cyclic: DemandVector) -> DemandVector:
        return DemandVector.of(self.access, {self.user_map[u]: d for u, d in cyclic.items()})


def dedicated_fallback_delivery(params: SystemParams) -> FallbackWiring:
    """Cyclic user ``k`` acts as the dedicated user owning cache ``k``."""

    dedicated = params.with_access_degree(1)
    cyclic = AccessStructure.cyclic(params.caches, params.access_degree)
    access = AccessStructure.custom(params.caches, [[k] for k in range(1, params.caches + 1)])
    user_map = {u: access.users[k] for k, u in enumerate(cyclic.users)}
    return FallbackWiring(dedicated, access, user_map)


@dataclass
class CyclicRunResult:
    plan: TransmissionPlan
    result: SimulationResult
    decoded: dict[str, bytes]

    @property
    def measured_rate(self) -> Fraction:
        return self.result.log.measured_rate

    @property
    def per_user_rate(self) -> Fraction:
        return self.measured_rate / self.plan.caches


@log_call
def run_cyclic_simulation(
    params: SystemParams,
    demands: DemandVector | Sequence[int],
    seed: int | np.random.SeedSequence,
    *,
    plan: TransmissionPlan | None = None,
    workers: int = 1,
) -> CyclicRunResult:
    """Simulate cyclic wraparound access under :func:`choose_plan`.

    ``decoded`` is keyed by cyclic user label ``"1".."C"`` in both modes.
    """

    access = AccessStructure.cyclic(params.caches, params.access_degree)
    if not isinstance(demands, DemandVector):
        demands = DemandVector.of(access, demands)
    plan = plan or choose_plan(params.caches, params.access_degree, params.t)

    if plan.mode == "multiaccess-cyclic":
        result = run_simulation(params, access, demands, seed, family=plan.family, workers=workers)
        decoded = {label: result.decoded[u] for u, label in zip(access.users, access.labels)}
    else:
        wiring = dedicated_fallback_delivery(params)
        result = run_simulation(
            wiring.params, wiring.access, wiring.demands(demands), seed, family=plan.family, workers=workers
        )
        decoded = {label: result.decoded[wiring.user_map[u]] for u, label in zip(access.users, access.labels)}

    log.info(f"cyclic delivery: {plan.mode}, {plan.expected_transmissions} subsets per server")
    return CyclicRunResult(plan, result, decoded)
