"""Parking functions: validity, exhaustive enumeration and the brute-force law.

A parking function of size ``n`` is a sequence of ``n`` places in ``[1, n]``
whose nondecreasing rearrangement ``p'`` satisfies ``p'(i) <= i``.  The
enumeration here is the ground truth that every faster route in the package
is checked against.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterator, Sequence, Union

from .errors import InvalidInputError, SizeLimitError

ENUMERATE_MAX_N = 8
ORACLE_MAX_N = 7


@dataclass(frozen=True)
class ParkingFunction:
    """Places ``(pi(1), ..., pi(n))``, 1-based."""

    places: tuple[int, ...]

    def __post_init__(self):
        places = tuple(int(p) for p in self.places)
        object.__setattr__(self, "places", places)
        if not is_parking(places):
            raise InvalidInputError(f"not a parking function: {places}")

    @classmethod
    def _trusted(cls, places: tuple[int, ...]) -> "ParkingFunction":
        # Skips validation for internally generated sequences.
        obj = object.__new__(cls)
        object.__setattr__(obj, "places", places)
        return obj

    @property
    def n(self) -> int:
        return len(self.places)

    def __len__(self):
        return len(self.places)

    def __iter__(self):
        return iter(self.places)

    def __getitem__(self, i):
        return self.places[i]


PlacesLike = Union[ParkingFunction, Sequence[int]]


@dataclass
class ExactPmf:
    """Joint law of the first ``k`` places of a uniform parking function of size ``n``.

    ``table`` maps every k-tuple in ``[1, n]^k`` to its probability (zero
    entries included).  Values are :class:`~fractions.Fraction` for exact
    tables and ``float`` otherwise.
    """

    n: int
    k: int
    table: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.table[tuple(key)]

    def total(self):
        return sum(self.table.values())

    def marginal(self, keep: int) -> "ExactPmf":
        """Law of the first ``keep`` coordinates."""
        if not 1 <= keep <= self.k:
            raise InvalidInputError(f"keep={keep} outside [1, {self.k}]")
        out: dict = {}
        for key, p in self.table.items():
            short = key[:keep]
            out[short] = out.get(short, 0) + p
        return ExactPmf(self.n, keep, out)

    def as_float(self) -> dict:
        return {key: float(p) for key, p in self.table.items()}


def _as_places(p: PlacesLike) -> tuple[int, ...]:
    if isinstance(p, ParkingFunction):
        return p.places
    return tuple(int(x) for x in p)


def is_parking(places: Sequence[int]) -> bool:
    """Return True iff ``places`` is a parking function of size ``len(places)``.

    >>> is_parking((2, 2, 1, 1, 2, 1, 8, 4, 8))
    True
    >>> is_parking((2, 2))
    False
    """
    places = list(places)
    if not places:
        raise InvalidInputError("empty sequence")
    if any(int(p) < 1 for p in places):
        raise InvalidInputError(f"places must be positive integers: {places}")
    n = len(places)
    for i, p in enumerate(sorted(places), start=1):
        if p > i or p > n:
            return False
    return True


def _nondecreasing_parking(n: int) -> Iterator[list[int]]:
    """Yield the sorted parking functions of size n (there are Catalan(n))."""
    seq = [0] * n

    def rec(pos: int, lo: int):
        if pos == n:
            yield list(seq)
            return
        for v in range(lo, pos + 2):
            seq[pos] = v
            yield from rec(pos + 1, v)

    yield from rec(0, 1)


def _multiset_permutations(items: list[int]) -> Iterator[tuple[int, ...]]:
    counts = sorted(Counter(items).items())
    values = [v for v, _ in counts]
    remaining = [c for _, c in counts]
    n = len(items)
    out = [0] * n

    def rec(pos: int):
        if pos == n:
            yield tuple(out)
            return
        for idx, v in enumerate(values):
            if remaining[idx]:
                remaining[idx] -= 1
                out[pos] = v
                yield from rec(pos + 1)
                remaining[idx] += 1

    yield from rec(0)


def enumerate_parking(n: int) -> list[ParkingFunction]:
    """All parking functions of size ``n`` in lexicographic order.

    Built from the Catalan-many sorted parking functions, each expanded into
    its distinct rearrangements.
    """
    if not 1 <= n <= ENUMERATE_MAX_N:
        raise SizeLimitError(f"enumerate_parking requires 1 <= n <= {ENUMERATE_MAX_N}, got {n}")
    places = [perm for base in _nondecreasing_parking(n) for perm in _multiset_permutations(base)]
    places.sort()
    return [ParkingFunction._trusted(p) for p in places]


def count_parking(n: int) -> int:
    """Closed-form count ``(n + 1) ** (n - 1)``."""
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    return (n + 1) ** (n - 1)


def oracle_joint_pmf(n: int, k: int) -> ExactPmf:
    """Exact law of ``(pi(1), ..., pi(k))`` by counting over all parking functions."""
    if not 1 <= n <= ORACLE_MAX_N:
        raise SizeLimitError(f"oracle_joint_pmf requires 1 <= n <= {ORACLE_MAX_N}, got {n}")
    if not 1 <= k <= n:
        raise InvalidInputError(f"k must lie in [1, {n}], got {k}")
    counts = Counter(p.places[:k] for p in enumerate_parking(n))
    total = count_parking(n)
    table = {key: Fraction(counts.get(key, 0), total) for key in product(range(1, n + 1), repeat=k)}
    return ExactPmf(n, k, table)


def _check_k(places: tuple[int, ...], k: int) -> None:
    if not 1 <= k <= len(places):
        raise InvalidInputError(f"k must lie in [1, {len(places)}], got {k}")


def statistic_sum(p: PlacesLike, k: int) -> int:
    """Sum of the first ``k`` places."""
    places = _as_places(p)
    _check_k(places, k)
    return sum(places[:k])


def statistic_max(p: PlacesLike, k: int) -> int:
    """Largest of the first ``k`` places."""
    places = _as_places(p)
    _check_k(places, k)
    return max(places[:k])
