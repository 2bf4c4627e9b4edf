import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from fractions import Fraction

import pytest

from mupir.errors import ParameterError
from mupir.managers.report_manager import ReportManager, format_value, render_key_values
from mupir.models.run_config import RunConfig, load_command_defaults, load_defaults


def test_run_config_roundtrip(tmp_path):
    cfg = RunConfig("simulate", {"caches": 5, "dump_dir": tmp_path / "d"}, seed=7, outputs={"dir": "out"})
    path = cfg.dump(tmp_path / "run_config.yaml")
    loaded = RunConfig.load(path)
    assert loaded.command == "simulate"
    assert loaded.params == {"caches": 5, "dump_dir": str(tmp_path / "d")}
    assert loaded.seed == 7
    assert path.read_text().startswith("command: simulate\n")


def test_run_config_needs_command():
    with pytest.raises(ParameterError):
        RunConfig.from_dict({"seed": 1})


def test_package_defaults_cover_commands():
    defaults = load_defaults()
    assert set(defaults) == {"simulate", "pir-demo", "privacy-audit", "rates", "compare"}
    assert defaults["simulate"]["seed"] == 0


def test_user_config_overrides_defaults(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("simulate:\n  access-degree: 2\ncyc:\n  n: 8\n")
    merged = load_command_defaults(cfg)
    assert merged["simulate"]["access_degree"] == 2
    assert merged["simulate"]["caches"] == 5
    assert merged["cyc"] == {"n": 8}


def test_run_config_file_becomes_command_defaults(tmp_path):
    record = RunConfig("simulate", {"caches": 4, "t": "1", "file_bytes": None}, seed=9)
    path = record.dump(tmp_path / "run_config.yaml")
    merged = load_command_defaults(path)
    assert merged["simulate"]["caches"] == 4
    assert merged["simulate"]["t"] == "1"
    assert merged["simulate"]["seed"] == 9
    assert merged["simulate"]["files"] == 3
    assert "file_bytes" not in merged["simulate"]
    assert "command" not in merged


def test_user_config_must_be_mapping(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("simulate: 3\n")
    with pytest.raises(ParameterError):
        load_command_defaults(cfg)


def test_format_value():
    assert format_value(None) == "n/a"
    assert format_value(True) == "yes"
    assert format_value(Fraction(7, 40)) == "7/40"
    assert format_value({1: 7, 2: 7}) == "1:7,2:7"
    assert format_value([3, 4]) == "3,4"


def test_report_key_order(tmp_path):
    text = render_key_values({"b": 1, "a": 2, "z": 3}, ["z"])
    assert text == "z = 3\na = 2\nb = 1\n"
    reports = ReportManager(tmp_path / "out")
    path = reports.write_csv("x.csv", ["a", "b"], [{"a": Fraction(1, 2), "b": None}])
    assert path.read_text() == "a,b\n1/2,n/a\n"
