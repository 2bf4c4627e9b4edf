import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

import logging
from fractions import Fraction

import pytest

from mupir.errors import ParameterError
from mupir.managers.simulation_manager import SimulationManager, parse_demands
from mupir.models.access import AccessStructure
from mupir.models.params import SystemParams
from mupir.models.trial import TrialStatus


def _params(**kw):
    base = dict(servers=2, files=2, caches=4, access_degree=2, t=1, file_bytes=16)
    base.update(kw)
    return SystemParams(**base)


def test_parse_demands():
    access = AccessStructure.full(4, 2)
    assert parse_demands("random", access) is None
    assert parse_demands("2", access).values == (2,) * 6
    assert parse_demands("1,2,1,2,1,2", access).values == (1, 2, 1, 2, 1, 2)
    with pytest.raises(ParameterError):
        parse_demands("a,b", access)
    with pytest.raises(ParameterError):
        parse_demands("1,2", access)


def test_observers_see_every_trial(caplog):
    sm = SimulationManager(_params(), seed=3)
    events = []
    sm.add_observer(lambda event, trial: events.append((event, trial.name)))
    with caplog.at_level(logging.INFO, logger="mupir"):
        sm.run(sm.random_trials(2))
    assert events == [
        ("start", "trial-1"),
        ("done", "trial-1"),
        ("start", "trial-2"),
        ("done", "trial-2"),
    ]
    messages = [rec.getMessage() for rec in caplog.records]
    assert any(m.startswith("Starting trial: trial-1") for m in messages)
    assert any(m.startswith("DONE: trial-2") for m in messages)


def test_failed_trial_is_recorded():
    sm = SimulationManager(_params(), seed=0)
    trial = sm.trial_for([1] * 6)
    trial.demands = trial.demands.__class__(trial.demands.access, (3,) * 6)
    events = []
    sm.add_observer(lambda event, tr: events.append(event))
    sm.run()
    assert trial.status is TrialStatus.FAILED
    assert trial.error.startswith("parameter error")
    assert events == ["start", "fail"]
    assert sm.summary()["failed_trials"] == 1


def test_summary_matches_closed_form():
    sm = SimulationManager(_params(), seed=1)
    sm.run(sm.random_trials(3))
    summary = sm.summary()
    assert summary["decoded_trials"] == "3/3"
    assert summary["measured_rate"] == summary["formula_rate"] == Fraction(3, 2)
    assert summary["rate_stable"] is True
    assert summary["coding_gain"] == [3]
    assert summary["coding_gain_check"] == "pass"


def test_cyclic_manager_uses_plan():
    params = SystemParams(2, 3, 8, 2, 2, 224)
    sm = SimulationManager(params, access_kind="cyclic", seed=2)
    assert sm.mode == "dedicated-fallback"
    sm.run(sm.random_trials(1))
    summary = sm.summary()
    assert summary["measured_rate"] == summary["formula_rate"] == Fraction(7, 2)
    assert summary["coding_gain_check"] == "n/a"


def test_time_log(tmp_path):
    log_file = tmp_path / "times.csv"
    sm = SimulationManager(_params(), seed=0, time_log=log_file)
    sm.run(sm.random_trials(2))
    lines = log_file.read_text().splitlines()
    assert lines[0] == "trial,start,end,duration_s"
    assert [l.split(",")[0] for l in lines[1:]] == ["trial-1", "trial-2"]


def test_unknown_access_kind():
    with pytest.raises(ParameterError):
        SimulationManager(_params(), access_kind="ring")
