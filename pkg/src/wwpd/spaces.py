"""Finite graph spaces, four-point hyperbolicity, and the augmented path search.

The search engine minimises ``|alpha| - W * (copies of w used)`` over edge
paths by treating each traversed copy of ``w`` as a shortcut edge of cost
``|w| - W``.  Since that cost is at least 1, uniform-cost search is exact.
"""
from __future__ import annotations

import heapq
import itertools
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .words import ReducedWord, alphabet, words_up_to

__all__ = [
    "Disconnected",
    "RadiusTooSmall",
    "FiniteGraphSpace",
    "all_pairs_distances",
    "delta_four_point",
    "tree_ball",
    "load_edge_list",
    "AugmentedSearchProblem",
    "SearchResult",
    "min_cost_path",
]


class Disconnected(ValueError):
    pass


class RadiusTooSmall(RuntimeError):
    pass


@dataclass
class FiniteGraphSpace:
    n: int
    adjacency: list[set[int]]
    action: dict[Hashable, Sequence[int]] = field(default_factory=dict)
    labels: list[ReducedWord] | None = None  # vertex -> word, for tree balls

    def __post_init__(self) -> None:
        if len(self.adjacency) != self.n:
            raise ValueError("adjacency must list every vertex")
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if u not in self.adjacency[v]:
                    raise ValueError(f"adjacency is not symmetric at ({u}, {v})")
        for key, perm in self.action.items():
            if sorted(perm) != list(range(self.n)):
                raise ValueError(f"action of {key!r} is not a permutation")
            for u, nbrs in enumerate(self.adjacency):
                if {perm[v] for v in nbrs} != self.adjacency[perm[u]]:
                    raise ValueError(f"action of {key!r} does not preserve adjacency")
        self._index = None

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], **kw) -> "FiniteGraphSpace":
        adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                continue
            adj[u].add(v)
            adj[v].add(u)
        return cls(n, adj, **kw)

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]

    def vertex_of(self, word: ReducedWord) -> int:
        if self.labels is None:
            raise ValueError("this space has no word labels")
        if self._index is None:
            self._index = {w: i for i, w in enumerate(self.labels)}
        return self._index[word]

    def bfs(self, source: int) -> np.ndarray:
        dist = np.full(self.n, -1, dtype=np.int64)
        dist[source] = 0
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for v in self.adjacency[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist


def all_pairs_distances(G: FiniteGraphSpace) -> np.ndarray:
    if G.n == 0:
        raise Disconnected("the empty graph has no metric")
    D = np.stack([G.bfs(s) for s in range(G.n)])
    if (D < 0).any():
        raise Disconnected("graph is not connected")
    D.setflags(write=False)
    return D


def delta_four_point(G: FiniteGraphSpace | np.ndarray) -> float:
    """Least ``delta`` for the four-point condition, by exhaustion over quadruples.

    For each quadruple the three pair sums are formed; the excess of the
    largest over the median, halved, is that quadruple's delta.
    """
    D = G if isinstance(G, np.ndarray) else all_pairs_distances(G)
    n = D.shape[0]
    if n < 4:
        return 0.0
    D = D.astype(np.int32)
    best = 0
    for x in range(n):
        ys = D[x:, :]  # y ranges over x..n-1; the quadruple is symmetric in x, y
        dxy = D[x, x:][:, None, None]
        dzw = D[None, :, :]
        s1 = dxy + dzw
        s2 = D[x, :][None, :, None] + ys[:, None, :]
        s3 = D[x, :][None, None, :] + ys[:, :, None]
        hi = np.maximum(np.maximum(s1, s2), s3)
        lo = np.minimum(np.minimum(s1, s2), s3)
        mid = s1 + s2 + s3 - hi - lo
        best = max(best, int((hi - mid).max()))
    return best / 2


def tree_ball(r: int, rank: int = 2) -> FiniteGraphSpace:
    """Ball of radius ``r`` about the identity in the Cayley tree of F_rank."""
    if r < 0:
        raise ValueError("radius must be non-negative")
    labels = list(words_up_to(r, rank))
    index = {w.letters: i for i, w in enumerate(labels)}
    edges = [(index[w.letters[:-1]], i) for i, w in enumerate(labels) if w.letters]
    return FiniteGraphSpace.from_edges(len(labels), edges, labels=labels)


def load_edge_list(path: str | Path) -> FiniteGraphSpace:
    """Read ``u v`` pairs, one per line, 0-indexed.  Blank lines and ``#`` comments are skipped."""
    edges = []
    n = 0
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected two vertex indices")
        u, v = (int(p) for p in parts)
        if u < 0 or v < 0:
            raise ValueError(f"{path}:{lineno}: negative vertex index")
        edges.append((u, v))
        n = max(n, u + 1, v + 1)
    return FiniteGraphSpace.from_edges(n, edges)


# ---------------------------------------------------------------- search

Node = Hashable


@dataclass
class AugmentedSearchProblem:
    """Least-cost path problem with unit edges plus weighted shortcut edges.

    ``neighbors(v)`` yields unit-cost neighbours inside the region and
    ``shortcuts(v)`` yields ``(target, cost)`` pairs, each the far end of a
    copy of ``w`` starting at ``v`` that stays inside the region.
    """

    neighbors: Callable[[Node], Iterable[Node]]
    shortcuts: Callable[[Node], Iterable[tuple[Node, int]]]
    source: Node
    target: Node
    radius: int | None = None
    shortcut_length: int = 0  # edges in one shortcut, for path-length accounting

    @classmethod
    def on_graph(
        cls,
        G: FiniteGraphSpace,
        source: int,
        target: int,
        shortcuts: Iterable[tuple[int, int, int]] = (),
        shortcut_length: int = 0,
    ) -> "AugmentedSearchProblem":
        table: dict[int, list[tuple[int, int]]] = {}
        for u, v, cost in shortcuts:
            if cost < 1:
                raise ValueError("shortcut costs must be at least 1")
            table.setdefault(u, []).append((v, cost))
        return cls(
            neighbors=lambda v: G.adjacency[v],
            shortcuts=lambda v: table.get(v, ()),
            source=source,
            target=target,
            shortcut_length=shortcut_length,
        )

    @classmethod
    def on_tree(
        cls,
        x: ReducedWord,
        y: ReducedWord,
        w: ReducedWord,
        W: int,
        radius: int,
    ) -> "AugmentedSearchProblem":
        """Tree region: vertices within ``radius`` of the geodesic from ``x`` to ``y``.

        Copies of ``w`` are all paths labelled ``w`` (every vertex is a
        translate of every other).  A vertex is held as ``(i, beta)``: walk
        ``i`` letters along the geodesic label, then the branch word ``beta``.
        """
        if len(w) <= W:
            raise ValueError("shortcut cost |w| - W must be at least 1")
        g = (x.inverse() * y).letters
        d = len(g)
        letters = alphabet(x.rank)
        cost = len(w) - W

        def step(node, ch):
            i, beta = node
            if beta:
                if ch == beta[-1].swapcase():
                    return (i, beta[:-1])
                return (i, beta + ch) if len(beta) < radius else None
            if i < d and ch == g[i]:
                return (i + 1, "")
            if i > 0 and ch == g[i - 1].swapcase():
                return (i - 1, "")
            return (i, ch) if radius >= 1 else None

        def neighbors(node):
            for ch in letters:
                nxt = step(node, ch)
                if nxt is not None:
                    yield nxt

        def shortcuts(node):
            cur = node
            for ch in w.letters:
                cur = step(cur, ch)
                if cur is None:
                    return
            yield cur, cost

        return cls(neighbors, shortcuts, (0, ""), (d, ""), radius, len(w))


@dataclass
class SearchResult:
    cost: int
    path: list[Node]  # visited nodes, shortcut ends only for shortcut moves
    unit_edges: int
    shortcuts_used: int
    length: int  # edge length of the underlying path alpha


def min_cost_path(P: AugmentedSearchProblem) -> SearchResult:
    tie = itertools.count()
    best = {P.source: 0}
    parent: dict[Node, tuple[Node, bool] | None] = {P.source: None}
    heap = [(0, next(tie), P.source)]
    done = set()
    while heap:
        c, _, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == P.target:
            break
        moves = [(v, 1, False) for v in P.neighbors(u)]
        moves += [(v, k, True) for v, k in P.shortcuts(u)]
        for v, k, is_short in moves:
            nc = c + k
            if v not in best or nc < best[v]:
                best[v] = nc
                parent[v] = (u, is_short)
                heapq.heappush(heap, (nc, next(tie), v))
    if P.target not in done:
        raise RadiusTooSmall(f"target unreachable within radius {P.radius}")
    path = [P.target]
    units = shorts = 0
    while parent[path[-1]] is not None:
        prev, is_short = parent[path[-1]]
        if is_short:
            shorts += 1
        else:
            units += 1
        path.append(prev)
    path.reverse()
    return SearchResult(
        cost=best[P.target],
        path=path,
        unit_edges=units,
        shortcuts_used=shorts,
        length=units + shorts * P.shortcut_length,
    )
