"""Private multi-access coded caching.

Placement, private query generation, coded server answers and per-user
decoding for cache networks where every user reads several cache nodes,
plus the closed-form rates and privacy audits that go with them.
"""

from __future__ import annotations

from importlib.metadata import PackageNotFoundError, version as _version

# Use a fallback version if package metadata is missing so that
# ``import mupir`` works from a source checkout.
try:  # pragma: no cover - depends on the installation
    __version__ = _version("mupir")
except PackageNotFoundError:  # package is not installed
    __version__ = "0.0.0"

# The main logger is configured in :mod:`mupir.utils.logging`.

from .errors import MupirError
from .models.access import AccessStructure
from .models.params import PirParams, SystemParams
from .scheme.protocol import DemandVector, run_memory_sharing, run_simulation
from .scheme.cyclic import run_cyclic_simulation

__all__ = [
    "AccessStructure",
    "DemandVector",
    "MupirError",
    "PirParams",
    "SystemParams",
    "run_simulation",
    "run_memory_sharing",
    "run_cyclic_simulation",
]
