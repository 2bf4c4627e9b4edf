"""Subset enumeration, checked binomials and the ``cyc`` circular-run count.

Ground sets are 1-based (``[1..n]``) throughout the package.  Subsets are
represented by :class:`SubsetId`, a sorted tuple of members together with
the size of the ground set they were drawn from; the canonical order over
all ``k``-subsets of ``[1..n]`` is lexicographic on the member tuple.

``cyc(n, k, m)`` counts the ``k``-subsets of ``n`` positions arranged on a
circle that contain at least one run of ``m`` cyclically consecutive
positions.  Two independent implementations are provided:

* :func:`cyc_closed_form` sums the counts of the disjoint families
  ``1`` in / ``n`` out, ``1`` out / ``n`` in, both out and both in (the
  last split by whether the wrap-around run is long enough) using
  composition counting and inclusion-exclusion.
* :func:`cyc_oracle` enumerates every subset and looks for a run.

The two share nothing but :func:`binom`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator

from mupir.errors import CountOverflowError, DomainError, ParameterError, SizeLimitError

__all__ = [
    "U64_MAX",
    "SubsetId",
    "CycBreakdown",
    "binom",
    "checked_add",
    "checked_mul",
    "enumerate_subsets",
    "subsets_of",
    "cyc_closed_form",
    "cyc_oracle",
    "DEFAULT_ORACLE_CAP",
]

U64_MAX = 2**64 - 1
DEFAULT_ORACLE_CAP = 20


def _check_u64(value: int) -> int:
    if value < 0 or value > U64_MAX:
        raise CountOverflowError(f"count {value} does not fit into an unsigned 64 bit integer")
    return value


def checked_add(a: int, b: int) -> int:
    """Return ``a + b``, raising :class:`CountOverflowError` beyond 64 bits."""

    return _check_u64(a + b)


def checked_mul(a: int, b: int) -> int:
    """Return ``a * b``, raising :class:`CountOverflowError` beyond 64 bits."""

    return _check_u64(a * b)


def binom(n: int, k: int) -> int:
    """Return the binomial coefficient with the zero convention.

    ``binom(n, k)`` is ``0`` whenever ``k < 0``, ``k > n`` or ``n < 0``; the
    closed form for ``cyc`` relies on exactly this convention.
    """

    if n < 0 or k < 0 or k > n:
        return 0
    return _check_u64(math.comb(n, k))


# ---------------------------------------------------------------------------
# Subsets
# ---------------------------------------------------------------------------
@dataclass(frozen=True, order=True)
class SubsetId:
    """A subset of ``[1..ground_size]`` with strictly increasing members."""

    members: tuple[int, ...]
    ground_size: int

    def __post_init__(self) -> None:
        members = tuple(self.members)
        object.__setattr__(self, "members", members)
        if any(b <= a for a, b in zip(members, members[1:])):
            raise ParameterError(f"subset members must be strictly increasing; got {members}")
        if members and (members[0] < 1 or members[-1] > self.ground_size):
            raise ParameterError(
                f"subset members must lie in [1..{self.ground_size}]; got {members}"
            )

    # ------------------------------------------------------------------
    @classmethod
    def of(cls, members: Iterable[int], ground_size: int) -> "SubsetId":
        """Build a subset from any iterable of distinct members."""

        items = list(members)
        if len(set(items)) != len(items):
            raise ParameterError(f"subset members must be distinct; got {items}")
        return cls(tuple(sorted(items)), ground_size)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __contains__(self, item: object) -> bool:
        return item in self.members

    def as_set(self) -> frozenset[int]:
        return frozenset(self.members)

    def union(self, other: "SubsetId") -> "SubsetId":
        return SubsetId(tuple(sorted(self.as_set() | other.as_set())), self.ground_size)

    def difference(self, other: "SubsetId") -> "SubsetId":
        return SubsetId(tuple(m for m in self.members if m not in other), self.ground_size)

    def intersects(self, other: "SubsetId") -> bool:
        return not self.as_set().isdisjoint(other.as_set())

    def issubset(self, other: "SubsetId") -> bool:
        return self.as_set() <= other.as_set()

    def label(self) -> str:
        """Return the ``{1,2,3}`` notation used in reports."""

        return "{" + ",".join(str(m) for m in self.members) + "}"

    def __str__(self) -> str:
        return self.label()


def enumerate_subsets(n: int, k: int) -> list[SubsetId]:
    """Return all ``k``-subsets of ``[1..n]`` in lexicographic order.

    ``k > n`` (or ``k < 0``) yields an empty list, consistent with
    ``binom(n, k) == 0``.
    """

    if n < 0:
        raise ParameterError(f"ground size must be non-negative; got n = {n}")
    if k < 0 or k > n:
        return []
    return [SubsetId(c, n) for c in itertools.combinations(range(1, n + 1), k)]


def subsets_of(subset: SubsetId, k: int) -> list[SubsetId]:
    """Return the ``k``-subsets of ``subset`` in lexicographic order."""

    if k < 0 or k > len(subset):
        return []
    return [SubsetId(c, subset.ground_size) for c in itertools.combinations(subset.members, k)]


# ---------------------------------------------------------------------------
# cyc(n, k, m): closed form
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class CycBreakdown:
    """Sizes of the disjoint families whose union ``cyc`` counts.

    ``k1``: position 1 inside, position n outside; ``k2``: the mirror image;
    ``k3``: both outside; ``k41``/``k42``: both inside, with the wrap-around
    run shorter than / at least ``m``.
    """

    k1: int
    k2: int
    k3: int
    k41: int
    k42: int
    total: int

    def __post_init__(self) -> None:
        parts = (self.k1, self.k2, self.k3, self.k41, self.k42)
        if any(p < 0 for p in parts) or sum(parts) != self.total:
            raise ParameterError(f"inconsistent cyc breakdown {parts} / {self.total}")

    def as_dict(self) -> dict[str, int]:
        return {
            "K1": self.k1,
            "K2": self.k2,
            "K3": self.k3,
            "K41": self.k41,
            "K42": self.k42,
            "total": self.total,
        }


def _runs_with_long_part(parts: int, total: int, m: int) -> int:
    """Compositions of ``total`` into ``parts`` positive parts, one part ``>= m``.

    Inclusion-exclusion over the parts forced to be at least ``m``.
    """

    count = 0
    for l in range(1, parts + 1):
        term = binom(parts, l) * binom(total - l * (m - 1) - 1, parts - 1)
        count += term if l % 2 == 1 else -term
    return count


def cyc_closed_form(n: int, k: int, m: int) -> CycBreakdown:
    """Evaluate ``cyc(n, k, m)`` in closed form, component by component.

    Defined for ``1 <= m <= k < n``.  ``k == n`` is accepted as an extension:
    the full circle is the only subset, it contains both ends and every run,
    so the breakdown is ``k42 = 1``.
    """

    if m < 1 or m > k or k > n:
        raise DomainError(
            f"cyc(n, k, m) is defined for 1 <= m <= k <= n; got n={n}, k={k}, m={m}"
        )
    if k == n:
        return CycBreakdown(0, 0, 0, 0, 1, 1)

    gaps = n - k  # number of positions outside the subset, >= 1 here

    k1 = 0
    k3 = 0
    for r in range(1, k + 1):
        inside = _runs_with_long_part(r, k, m)
        # r inside runs, r outside runs after them (n is outside)
        k1 += binom(gaps - 1, r - 1) * inside
        # r inside runs framed by r + 1 outside runs
        k3 += binom(gaps - 1, r) * inside
    k2 = k1

    # both ends inside: runs i_1 .. i_r with i_1 and i_r joined across the wrap
    k41 = 0
    k42 = k - 1  # r == 2: i_1 + i_2 == k >= m, a single outside run
    for r in range(3, k + 1):
        outside = binom(gaps - 1, r - 2)
        short_wrap = 0
        for s in range(2, m):
            short_wrap += (s - 1) * _runs_with_long_part(r - 2, k - s, m)
        long_wrap = 0
        for s in range(m, k - (r - 2) + 1):
            long_wrap += (s - 1) * binom(k - s - 1, r - 3)
        k41 += outside * short_wrap
        k42 += outside * long_wrap

    total = k1 + k2 + k3 + k41 + k42
    _check_u64(total)
    return CycBreakdown(k1, k2, k3, k41, k42, total)


# ---------------------------------------------------------------------------
# cyc(n, k, m): brute force
# ---------------------------------------------------------------------------
def cyc_oracle(n: int, k: int, m: int, *, cap: int = DEFAULT_ORACLE_CAP) -> int:
    """Count ``k``-subsets of an ``n``-circle holding ``m`` consecutive members.

    Pure enumeration over ``itertools.combinations``; refuses ``n > cap``.
    """

    if not 1 <= m <= k <= n:
        raise DomainError(f"cyc oracle needs 1 <= m <= k <= n; got n={n}, k={k}, m={m}")
    if n > cap:
        raise SizeLimitError(f"n = {n} exceeds the oracle enumeration cap of {cap}")

    windows = [
        frozenset(((start - 1 + offset) % n) + 1 for offset in range(m))
        for start in range(1, n + 1)
    ]
    count = 0
    for combo in itertools.combinations(range(1, n + 1), k):
        chosen = frozenset(combo)
        if any(window <= chosen for window in windows):
            count += 1
    return count
