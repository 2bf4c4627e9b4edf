from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, auto
from typing import Any


class TrialStatus(Enum):
    PENDING = auto()
    RUNNING = auto()
    DONE = auto()
    FAILED = auto()


@dataclass
class Trial:
    """One delivery for one demand vector."""

    index: int
    demands: Any
    status: TrialStatus = TrialStatus.PENDING
    result: Any = None
    error: str = ""

    @property
    def name(self) -> str:
        return f"trial-{self.index}"
