"""Run simulated deliveries for a series of demand vectors.

The manager owns the access structure and (for cyclic access) the chosen
transmission plan, runs one :class:`~mupir.models.trial.Trial` per demand
vector and keeps their status.  Observers are notified on ``start``,
``done`` and ``fail``; optional timing rows go to a CSV file.

Example
-------
>>> sm = SimulationManager(params, access_kind="full", seed=7)
>>> trials = sm.run(sm.random_trials(5))
"""

from __future__ import annotations

from datetime import UTC, datetime
from fractions import Fraction
from pathlib import Path
from typing import Callable, List, Literal, Sequence

import numpy as np

from mupir.analysis.rates import coding_gain_ma, pir_factor, rate_theorem1
from mupir.errors import MupirError, ParameterError
from mupir.models.access import AccessStructure
from mupir.models.params import SystemParams
from mupir.models.trial import Trial, TrialStatus
from mupir.scheme.cyclic import TransmissionPlan, choose_plan, run_cyclic_simulation
from mupir.scheme.protocol import DemandVector, SimulationResult, random_demands, run_simulation
from mupir.utils.logging import log

__all__ = ["SimulationManager", "parse_demands"]

AccessKind = Literal["full", "cyclic"]


def parse_demands(text: str, access: AccessStructure) -> DemandVector | None:
    """``"random"`` → ``None``; ``"1,2,3"`` → one demand per user."""

    text = text.strip()
    if text.lower() == "random":
        return None
    try:
        values = [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise ParameterError(f"demands must be 'random' or a comma separated list of files; got {text!r}") from None
    if len(values) == 1 and access.num_users > 1:
        values = values * access.num_users
    return DemandVector.of(access, values)


class SimulationManager:
    """Run deliveries for demand vectors and record their outcome."""

    def __init__(
        self,
        params: SystemParams,
        *,
        access_kind: AccessKind = "full",
        seed: int = 0,
        workers: int = 1,
        time_log: Path | None = None,
    ):
        """Prepare the access structure (and plan) for ``params``.

        Parameters
        ----------
        params:
            System parameters of every trial.
        access_kind:
            ``"full"`` for one user per ``L``-subset, ``"cyclic"`` for ``C``
            users with wraparound windows.
        seed:
            Root seed; trial ``i`` uses the ``i``-th spawned stream.
        time_log:
            Optional CSV file receiving one timing row per trial.
        """

        self.params = params
        self.access_kind = access_kind
        if access_kind == "full":
            self.access = AccessStructure.full(params.caches, params.access_degree)
            self.plan: TransmissionPlan | None = None
        elif access_kind == "cyclic":
            self.access = AccessStructure.cyclic(params.caches, params.access_degree)
            self.plan = choose_plan(params.caches, params.access_degree, params.t)
        else:
            raise ParameterError(f"unknown access structure {access_kind!r}; use 'full' or 'cyclic'")
        self.seed = seed
        self.workers = workers
        self._time_log = time_log
        self._demand_root, self._root = np.random.SeedSequence(seed).spawn(2)
        self._trials: List[Trial] = []
        self._observers: List[Callable[[str, Trial], None]] = []

    # ------------------------------------------------------------------
    # Observer
    # ------------------------------------------------------------------
    def add_observer(self, fn: Callable[[str, Trial], None]):
        """Register ``fn`` to be notified on trial events."""

        self._observers.append(fn)

    def _emit(self, event: str, trial: Trial):
        for fn in self._observers:
            fn(event, trial)

    # ------------------------------------------------------------------
    # Trials
    # ------------------------------------------------------------------
    @property
    def mode(self) -> str:
        return self.plan.mode if self.plan is not None else "full"

    @property
    def trials(self) -> list[Trial]:
        return list(self._trials)

    def _next_stream(self) -> np.random.SeedSequence:
        (stream,) = self._root.spawn(1)
        return stream

    def random_trials(self, count: int) -> list[Trial]:
        """``count`` trials with independent uniform demand vectors."""

        if count < 1:
            raise ParameterError(f"need at least one trial; got {count}")
        (demand_stream,) = self._demand_root.spawn(1)
        rng = np.random.default_rng(demand_stream)
        return [self.trial_for(random_demands(self.access, self.params.files, rng)) for _ in range(count)]

    def trial_for(self, demands: DemandVector | Sequence[int]) -> Trial:
        if not isinstance(demands, DemandVector):
            demands = DemandVector.of(self.access, demands)
        demands.validate(self.params.files)
        trial = Trial(len(self._trials) + 1, demands)
        self._trials.append(trial)
        return trial

    def run(self, trials: Sequence[Trial] | None = None) -> list[Trial]:
        """Execute pending ``trials`` (default: all pending) in order."""

        targets = list(trials) if trials is not None else self._trials
        for trial in targets:
            if trial.status is TrialStatus.PENDING:
                self._execute(trial)
        return targets

    # ------------------------------------------------------------------
    def _log_time(self, name: str, start: datetime, end: datetime) -> None:
        """Append timing information for ``name`` to the time log."""

        if self._time_log is None:
            return
        self._time_log.parent.mkdir(parents=True, exist_ok=True)
        duration = (end - start).total_seconds()
        write_header = not self._time_log.exists()
        with self._time_log.open("a", encoding="utf-8") as fh:
            if write_header:
                fh.write("trial,start,end,duration_s\n")
            fh.write(f"{name},{start.isoformat()},{end.isoformat()},{duration:.3f}\n")

    def _simulate(self, trial: Trial) -> SimulationResult:
        stream = self._next_stream()
        if self.access_kind == "cyclic":
            return run_cyclic_simulation(
                self.params, trial.demands, stream, plan=self.plan, workers=self.workers
            ).result
        return run_simulation(self.params, self.access, trial.demands, stream, workers=self.workers)

    def _execute(self, trial: Trial):
        log.info(f"Starting trial: {trial.name} (demands {trial.demands.as_labels()})")
        start_dt = datetime.now(UTC)
        trial.status = TrialStatus.RUNNING
        self._emit("start", trial)
        try:
            trial.result = self._simulate(trial)
            trial.status = TrialStatus.DONE
            log.success(f"DONE: {trial.name} rate {trial.result.log.measured_rate}")
            self._emit("done", trial)
        except MupirError as exc:
            trial.status = TrialStatus.FAILED
            trial.error = f"{exc.category} error: {exc}"
            log.error(f"FAILED: {trial.name} [{trial.error}]")
            self._emit("fail", trial)
        finally:
            self._log_time(trial.name, start_dt, datetime.now(UTC))

    # ------------------------------------------------------------------
    # Summary
    # ------------------------------------------------------------------
    def formula_rate(self) -> Fraction:
        """The closed-form rate this configuration should measure."""

        p = self.params
        if not p.delivers:
            return Fraction(0)
        if self.plan is not None:
            return self.plan.rate_factor * pir_factor(p.servers, p.files)
        return rate_theorem1(p.caches, p.access_degree, p.t, p.servers, p.files)

    def expected_coding_gain(self) -> int | None:
        """Users per transmission for full access; ``None`` when it varies."""

        if self.access_kind == "full":
            return coding_gain_ma(self.params.access_degree, self.params.t)
        return None

    def summary(self) -> dict[str, object]:
        """Aggregate of all finished trials, keyed like the report file."""

        done = [t for t in self._trials if t.status is TrialStatus.DONE]
        failed = [t for t in self._trials if t.status is TrialStatus.FAILED]
        out: dict[str, object] = {
            "trials": len(self._trials),
            "decoded_trials": f"{len(done)}/{len(self._trials)}",
            "failed_trials": len(failed),
            "mode": self.mode,
        }
        if not done:
            return out
        first: SimulationResult = done[0].result
        rates = {t.result.log.measured_rate for t in done}
        gains = sorted({g for t in done for g in t.result.log.coding_gain.values()})
        expected_gain = self.expected_coding_gain()
        out.update(
            {
                "transmission_subsets": first.log.family_size,
                "subpacketization": first.log.subpacketization,
                "symbols_per_transmission": first.log.symbols_per_transmission,
                "bytes_per_transmission": first.log.bytes_per_transmission,
                "bytes_per_server": first.log.bytes_per_server,
                "total_bytes": first.log.total_bytes,
                "measured_rate": first.log.measured_rate,
                "rate_stable": len(rates) == 1,
                "formula_rate": self.formula_rate(),
                "users": first.access.num_users,
                "coding_gain": gains,
                "coding_gain_expected": expected_gain,
                "coding_gain_check": (
                    "n/a"
                    if expected_gain is None or not gains
                    else ("pass" if all(t.result.log.coding_gain_holds(expected_gain) for t in done) else "fail")
                ),
            }
        )
        return out
