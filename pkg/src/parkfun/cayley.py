"""Cayley trees rooted at 0, the largest-leaf Prufer codec and the map to parking functions.

Vertex ``i`` of a tree on ``{0..n}`` is sent to the breadth-first rank of its
parent, children being visited in increasing label order with the root at
rank 1.  This is a bijection onto parking functions of size ``n``; composed
with a uniform Prufer code it gives an exact uniform sampler.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from itertools import product
from typing import Iterator, Mapping, Sequence

import numpy as np

from . import _kernels
from .errors import InvalidCodeError, InvalidInputError, InvalidTreeError, SizeLimitError
from .parking import ParkingFunction

ENUMERATE_TREES_MAX_N = 6


@dataclass(frozen=True)
class CayleyTree:
    """Labeled tree on ``{0..n}`` rooted at 0.

    ``parent[v]`` is the parent label of vertex ``v`` for ``v >= 1``;
    ``parent[0]`` is ``-1``.
    """

    parent: tuple[int, ...]

    def __post_init__(self):
        parent = tuple(int(p) for p in self.parent)
        object.__setattr__(self, "parent", parent)
        _validate_parent(parent)

    @classmethod
    def from_parent_map(cls, parents: Mapping[int, int]) -> "CayleyTree":
        n = len(parents)
        if set(parents) != set(range(1, n + 1)):
            raise InvalidTreeError("parent map must cover exactly the labels 1..n")
        return cls((-1,) + tuple(parents[v] for v in range(1, n + 1)))

    @classmethod
    def _trusted(cls, parent: tuple[int, ...]) -> "CayleyTree":
        obj = object.__new__(cls)
        object.__setattr__(obj, "parent", parent)
        return obj

    @property
    def n_plus_1(self) -> int:
        return len(self.parent)

    @property
    def n(self) -> int:
        return len(self.parent) - 1

    def parent_map(self) -> dict[int, int]:
        return {v: self.parent[v] for v in range(1, len(self.parent))}

    def children(self) -> list[list[int]]:
        """Children of every vertex, sorted by label."""
        kids: list[list[int]] = [[] for _ in self.parent]
        for v in range(1, len(self.parent)):
            kids[self.parent[v]].append(v)
        return kids


def _validate_parent(parent: tuple[int, ...]) -> None:
    m = len(parent)
    if m < 1 or parent[0] != -1:
        raise InvalidTreeError("vertex 0 must be the root (parent[0] == -1)")
    for v in range(1, m):
        if not 0 <= parent[v] < m or parent[v] == v:
            raise InvalidTreeError(f"vertex {v} has invalid parent {parent[v]}")
    # 0: unvisited, 1: on current chain, 2: known to reach the root
    state = [0] * m
    state[0] = 2
    for v in range(1, m):
        chain = []
        u = v
        while state[u] == 0:
            state[u] = 1
            chain.append(u)
            u = parent[u]
        if state[u] == 1:
            raise InvalidTreeError(f"cycle through vertex {u}")
        for w in chain:
            state[w] = 2


@dataclass(frozen=True)
class PruferCode:
    """Largest-leaf Prufer code of a tree with ``len(code) + 2`` vertices.

    The terminal entry 0 (the parent of the last surviving non-root vertex) is
    implicit.
    """

    code: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "code", tuple(int(c) for c in self.code))

    @property
    def vertex_count(self) -> int:
        return len(self.code) + 2

    def __len__(self):
        return len(self.code)

    def __iter__(self):
        return iter(self.code)


@dataclass(frozen=True)
class BfsRanks:
    rank: dict[int, int]
    parent_rank: dict[int, int]


def prufer_encode(t: CayleyTree) -> PruferCode:
    """Repeatedly delete the largest-labelled leaf and record its parent.

    >>> fig1 = CayleyTree.from_parent_map({1: 3, 2: 3, 3: 0, 4: 0, 5: 3, 6: 0, 7: 8, 8: 6, 9: 8})
    >>> prufer_encode(fig1).code
    (8, 8, 6, 0, 3, 0, 3, 3)
    """
    parent = t.parent
    m = len(parent)
    if m < 2:
        raise InvalidTreeError("need at least 2 vertices")
    deg = [0] * m
    for v in range(1, m):
        deg[v] += 1
        deg[parent[v]] += 1
    # The root is never the largest leaf while three or more vertices remain.
    heap = [-v for v in range(1, m) if deg[v] == 1]
    heapq.heapify(heap)
    code = []
    for _ in range(m - 2):
        leaf = -heapq.heappop(heap)
        p = parent[leaf]
        code.append(p)
        deg[p] -= 1
        if p != 0 and deg[p] == 1:
            heapq.heappush(heap, -p)
    return PruferCode(tuple(code))


def prufer_decode(code: PruferCode | Sequence[int]) -> CayleyTree:
    """Inverse of :func:`prufer_encode` (max-heap of current leaves)."""
    code = tuple(code.code if isinstance(code, PruferCode) else (int(c) for c in code))
    m = len(code) + 2
    for c in code:
        if not 0 <= c < m:
            raise InvalidCodeError(f"code entry {c} outside [0, {m - 1}]")
    deg = [1] * m
    for c in code:
        deg[c] += 1
    heap = [-v for v in range(1, m) if deg[v] == 1]
    heapq.heapify(heap)
    parent = [-1] * m
    for c in code:
        leaf = -heapq.heappop(heap)
        parent[leaf] = c
        deg[c] -= 1
        if c != 0 and deg[c] == 1:
            heapq.heappush(heap, -c)
    parent[-heapq.heappop(heap)] = 0
    return CayleyTree._trusted(tuple(parent))


def bfs_ranks(t: CayleyTree) -> BfsRanks:
    kids = t.children()
    rank: dict[int, int] = {}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        rank[u] = len(rank) + 1
        queue.extend(kids[u])
    parent_rank = {v: rank[t.parent[v]] for v in range(1, t.n_plus_1)}
    return BfsRanks(rank, parent_rank)


def tree_to_parking(t: CayleyTree) -> ParkingFunction:
    """``(r(1, t), ..., r(n, t))``, the parent ranks in label order."""
    if t.n < 1:
        raise InvalidTreeError("tree must have at least 2 vertices")
    pr = bfs_ranks(t).parent_rank
    return ParkingFunction._trusted(tuple(pr[v] for v in range(1, t.n_plus_1)))


def child_counts(t: CayleyTree) -> list[int]:
    """Entry ``i - 1`` counts the vertices whose parent has breadth-first rank ``i``."""
    counts = [0] * t.n_plus_1
    for r in bfs_ranks(t).parent_rank.values():
        counts[r - 1] += 1
    return counts


def enumerate_trees(n: int) -> Iterator[CayleyTree]:
    """Every tree on ``{0..n}`` rooted at 0, by filtering all parent assignments.

    Brute force and independent of the Prufer codec; used as an oracle.
    """
    if not 0 <= n <= ENUMERATE_TREES_MAX_N:
        raise SizeLimitError(f"enumerate_trees requires 0 <= n <= {ENUMERATE_TREES_MAX_N}")
    choices = [[p for p in range(n + 1) if p != v] for v in range(1, n + 1)]
    for assign in product(*choices):
        parent = (-1,) + assign
        try:
            _validate_parent(parent)
        except InvalidTreeError:
            continue
        yield CayleyTree._trusted(parent)


def random_code(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform code in ``[0, n]^(n-1)`` for a tree on ``n + 1`` vertices."""
    return rng.integers(0, n + 1, size=max(n - 1, 0), dtype=np.int64)


def sample_places(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform parking function of size ``n`` as an int64 array (compiled path)."""
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    return _kernels.code_to_places(random_code(n, rng), n)


def sample_uniform_parking(n: int, rng: np.random.Generator) -> ParkingFunction:
    """Exactly uniform parking function: uniform code, decode, map to parent ranks."""
    return ParkingFunction._trusted(tuple(int(x) for x in sample_places(n, rng)))


def sample_uniform_tree(n: int, rng: np.random.Generator) -> CayleyTree:
    """Uniform tree on ``{0..n}``."""
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    return prufer_decode(random_code(n, rng).tolist())


def places_from_code(code: Sequence[int], n: int) -> np.ndarray:
    code = np.asarray(code, dtype=np.int64)
    if code.shape != (max(n - 1, 0),):
        raise InvalidCodeError(f"code must have length {n - 1}")
    if code.size and (code.min() < 0 or code.max() > n):
        raise InvalidCodeError(f"code entries must lie in [0, {n}]")
    return _kernels.code_to_places(code, n)
