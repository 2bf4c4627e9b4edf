"""Serializable record of one CLI run."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Dict

import yaml

from mupir.errors import ParameterError

__all__ = ["RunConfig", "load_defaults", "load_command_defaults"]


def _plain(value: Any) -> Any:
    """Return ``value`` in a form :func:`yaml.safe_dump` accepts."""

    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    return value


@dataclass
class RunConfig:
    """Command name, its parameters, seed, output paths and verbosity.

    A run is reproduced by feeding ``params`` back to the same command.
    """

    command: str
    params: Dict[str, Any] = field(default_factory=dict)
    seed: int | None = None
    outputs: Dict[str, str] = field(default_factory=dict)
    verbosity: str = "INFO"

    # ------------------------------------------------------------------
    # YAML I/O
    # ------------------------------------------------------------------
    def as_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "params": _plain(self.params),
            "seed": self.seed,
            "outputs": _plain(self.outputs),
            "verbosity": self.verbosity,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        if "command" not in data:
            raise ParameterError("run config needs a 'command' entry")
        return cls(
            command=str(data["command"]),
            params=dict(data.get("params") or {}),
            seed=data.get("seed"),
            outputs=dict(data.get("outputs") or {}),
            verbosity=str(data.get("verbosity") or "INFO"),
        )

    @classmethod
    def load(cls, file: Path) -> "RunConfig":
        data = yaml.safe_load(Path(file).read_text()) or {}
        return cls.from_dict(data)

    def dump(self, file: Path) -> Path:
        file = Path(file)
        file.parent.mkdir(parents=True, exist_ok=True)
        file.write_text(yaml.safe_dump(self.as_dict(), sort_keys=False))
        return file


def load_defaults() -> dict[str, dict[str, Any]]:
    """Package defaults from ``mupir/config/defaults/run.yaml``."""

    text = resources.files("mupir.config").joinpath("defaults/run.yaml").read_text()
    return yaml.safe_load(text) or {}


def _is_run_record(data: dict[str, Any]) -> bool:
    return isinstance(data.get("command"), str) and isinstance(data.get("params"), dict)


def load_command_defaults(file: Path | str | None) -> dict[str, dict[str, Any]]:
    """Merge a user config file over the package defaults.

    Top-level keys are command names mapping to option defaults, the shape
    click expects for ``default_map``.  A ``run_config.yaml`` written by a
    previous run is accepted too: its parameters become the defaults of its
    command, so ``mupir --config run_config.yaml <command>`` replays it.
    """

    merged = {cmd: dict(opts or {}) for cmd, opts in load_defaults().items()}
    if file is None:
        return merged
    path = Path(file)
    data = yaml.safe_load(path.read_text()) or {}
    if not isinstance(data, dict):
        raise ParameterError(f"config file {path} must map command names to option defaults")
    if _is_run_record(data):
        record = RunConfig.from_dict(data)
        params = {k: v for k, v in record.params.items() if v is not None}
        if record.seed is not None:
            params.setdefault("seed", record.seed)
        data = {record.command: params}
    for cmd, opts in data.items():
        if not isinstance(opts, dict):
            raise ParameterError(f"config entry '{cmd}' must be a mapping of option defaults")
        merged.setdefault(str(cmd), {}).update({str(k).replace("-", "_"): v for k, v in opts.items()})
    return merged
