"""Write report files next to each other in one output directory.

Report formats
--------------
``report.txt``
    ``key = value`` lines in a fixed key order.  Fractions are written as
    ``p/q``, booleans as ``yes``/``no``, mappings as ``k:v`` pairs joined by
    commas and missing values as ``n/a``.
``*.csv``
    Comma separated with a header row.
``run_config.yaml``
    The :class:`~mupir.models.run_config.RunConfig` of the run.  Passed back
    as ``mupir --config run_config.yaml <command>`` it replays the run.

Nothing time dependent is written, so equal runs give identical files.
"""

from __future__ import annotations

import csv
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from mupir.models.run_config import RunConfig
from mupir.utils.logging import log

__all__ = ["ReportManager", "format_value", "render_key_values"]


def format_value(value: Any) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, Mapping):
        return ",".join(f"{k}:{format_value(v)}" for k, v in value.items())
    if isinstance(value, (list, tuple, set, frozenset)):
        return ",".join(format_value(v) for v in value)
    return str(value)


def render_key_values(values: Mapping[str, Any], order: Sequence[str] | None = None) -> str:
    """``key = value`` lines; keys in ``order`` first, the rest sorted."""

    order = list(order or [])
    keys = [k for k in order if k in values] + sorted(k for k in values if k not in order)
    return "".join(f"{k} = {format_value(values[k])}\n" for k in keys)


class ReportManager:
    """Create report files below ``out_dir``."""

    def __init__(self, out_dir: Path | str):
        self.out_dir = Path(out_dir)

    def _path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / name

    def write_report(
        self,
        values: Mapping[str, Any],
        order: Sequence[str] | None = None,
        name: str = "report.txt",
    ) -> Path:
        path = self._path(name)
        path.write_text(render_key_values(values, order), encoding="utf-8")
        log.verbose(f"wrote {path}")
        return path

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> Path:
        path = self._path(name)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_value(row.get(col, "")) for col in header])
        log.verbose(f"wrote {path}")
        return path

    def write_run_config(self, config: RunConfig) -> Path:
        config.outputs.setdefault("dir", str(self.out_dir))
        return config.dump(self._path("run_config.yaml"))
