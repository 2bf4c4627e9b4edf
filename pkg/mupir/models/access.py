"""Which cache nodes each user reads."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal

from mupir.errors import ParameterError
from mupir.utils.combinatorics import SubsetId, enumerate_subsets

__all__ = ["AccessStructure", "cyclic_user_caches"]

AccessKind = Literal["full", "cyclic", "custom"]


def cyclic_user_caches(caches: int, access_degree: int, user: int) -> SubsetId:
    """Return ``{k, k+1, ..., k+L-1}`` with residues taken in ``[1..C]``.

    Sums are modulo ``C`` except that a multiple of ``C`` maps to ``C``.
    """

    if not 1 <= user <= caches:
        raise ParameterError(f"cyclic user index must lie in [1..{caches}]; got {user}")
    members = [((user + offset - 1) % caches) + 1 for offset in range(access_degree)]
    return SubsetId.of(members, caches)


@dataclass(frozen=True)
class AccessStructure:
    """Users identified by the distinct ``L``-subsets of caches they access.

    ``labels`` names users in reports: ``{1,2,3}`` style for the full
    design, ``1..C`` for cyclic wraparound access.
    """

    kind: AccessKind
    caches: int
    access_degree: int
    users: tuple[SubsetId, ...]
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.users) != len(self.labels):
            raise ParameterError("every user needs exactly one label")
        if len(set(self.users)) != len(self.users):
            raise ParameterError("users must access pairwise distinct cache sets")
        for user in self.users:
            if len(user) != self.access_degree or user.ground_size != self.caches:
                raise ParameterError(
                    f"user {user} is not an {self.access_degree}-subset of [1..{self.caches}]"
                )

    # ------------------------------------------------------------------
    @classmethod
    def full(cls, caches: int, access_degree: int) -> "AccessStructure":
        """One user per ``L``-subset of ``[C]``, in canonical order."""

        _check_degree(caches, access_degree)
        users = tuple(enumerate_subsets(caches, access_degree))
        return cls("full", caches, access_degree, users, tuple(u.label() for u in users))

    @classmethod
    def cyclic(cls, caches: int, access_degree: int) -> "AccessStructure":
        """``K = C`` users, user ``k`` reading ``L`` consecutive caches from ``k``."""

        _check_degree(caches, access_degree)
        users = tuple(cyclic_user_caches(caches, access_degree, k) for k in range(1, caches + 1))
        return cls("cyclic", caches, access_degree, users, tuple(str(k) for k in range(1, caches + 1)))

    @classmethod
    def custom(cls, caches: int, users: Iterable[Iterable[int]]) -> "AccessStructure":
        """Any list of distinct, equally sized cache sets."""

        subsets = tuple(SubsetId.of(u, caches) for u in users)
        if not subsets:
            raise ParameterError("an access structure needs at least one user")
        degree = len(subsets[0])
        _check_degree(caches, degree)
        return cls("custom", caches, degree, subsets, tuple(u.label() for u in subsets))

    # ------------------------------------------------------------------
    @property
    def num_users(self) -> int:
        return len(self.users)

    def __contains__(self, user: object) -> bool:
        return user in self.users

    def label_of(self, user: SubsetId) -> str:
        try:
            return self.labels[self.users.index(user)]
        except ValueError:
            raise ParameterError(f"user {user} is not part of this access structure") from None

    def user_by_label(self, label: str) -> SubsetId:
        try:
            return self.users[self.labels.index(label)]
        except ValueError:
            raise ParameterError(f"unknown user label {label!r}") from None


def _check_degree(caches: int, access_degree: int) -> None:
    if not 1 <= access_degree < caches:
        raise ParameterError(
            f"access degree must satisfy 1 <= L < C; got L = {access_degree}, C = {caches}"
        )
