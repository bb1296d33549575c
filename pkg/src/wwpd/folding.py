"""Stallings foldings for finitely generated subgroups of free groups."""
from __future__ import annotations

from dataclasses import dataclass, field

from .words import ReducedWord

__all__ = ["SubgroupGraph", "fold_subgroup"]


@dataclass
class SubgroupGraph:
    """Folded core graph of a subgroup, based at vertex 0.

    ``edges`` holds positively labelled edges ``(tail, generator, head)``;
    the inverse letter reads the same edge backwards.
    """

    rank_of_ambient: int
    vertices: set[int]
    edges: set[tuple[int, str, int]]
    basepoint: int = 0
    _out: dict[tuple[int, str], int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self._out.clear()
        for u, g, v in self.edges:
            self._out[(u, g)] = v
            self._out[(v, g.upper())] = u

    @property
    def rank(self) -> int:
        """Rank of the subgroup, ``E - V + 1`` of the (connected) core."""
        return len(self.edges) - len(self.vertices) + 1

    def is_folded(self) -> bool:
        seen: set[tuple[int, str]] = set()
        for u, g, v in self.edges:
            for key in ((u, g), (v, g.upper())):
                if key in seen:
                    return False
                seen.add(key)
        return True

    def read(self, w: ReducedWord) -> int | None:
        """Vertex reached by reading ``w`` from the basepoint, or None if stuck."""
        v = self.basepoint
        for ch in w.letters:
            nxt = self._out.get((v, ch))
            if nxt is None:
                return None
            v = nxt
        return v

    def contains(self, w: ReducedWord) -> bool:
        if w.rank != self.rank_of_ambient:
            raise ValueError("word rank differs from the subgroup's ambient rank")
        return self.read(w) == self.basepoint


def fold_subgroup(generators: list[ReducedWord]) -> SubgroupGraph:
    if not generators:
        raise ValueError("fold_subgroup needs at least one generator")
    rank = generators[0].rank
    # Bouquet of subdivided loops, one per non-trivial generator.
    parent: dict[int, int] = {0: 0}
    edges: set[tuple[int, str, int]] = set()
    nxt = 1
    for w in generators:
        if w.rank != rank:
            raise ValueError("generators of mixed rank")
        s = w.letters
        if not s:
            continue
        prev = 0
        for i, ch in enumerate(s):
            if i == len(s) - 1:
                cur = 0
            else:
                cur = nxt
                parent[cur] = cur
                nxt += 1
            if ch.islower():
                edges.add((prev, ch, cur))
            else:
                edges.add((cur, ch.lower(), prev))
            prev = cur

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    changed = True
    while changed:
        changed = False
        edges = {(find(u), g, find(v)) for u, g, v in edges}
        out: dict[tuple[int, str], int] = {}
        inn: dict[tuple[int, str], int] = {}
        for u, g, v in sorted(edges):
            for table, key, val in ((out, (u, g), v), (inn, (v, g), u)):
                other = table.get(key)
                if other is None:
                    table[key] = val
                elif find(other) != find(val):
                    a, b = sorted((find(other), find(val)))
                    parent[b] = a
                    changed = True
    vertices = {find(v) for v in parent}
    edges = {(find(u), g, find(v)) for u, g, v in edges}
    base = find(0)

    # Prune hanging trees; the basepoint always stays.
    while True:
        degree = {v: 0 for v in vertices}
        for u, _, v in edges:
            degree[u] += 1
            degree[v] += 1
        leaves = {v for v, d in degree.items() if d <= 1 and v != base}
        if not leaves:
            break
        vertices -= leaves
        edges = {e for e in edges if e[0] not in leaves and e[2] not in leaves}

    relabel = {base: 0}
    for v in sorted(vertices):
        if v not in relabel:
            relabel[v] = len(relabel)
    return SubgroupGraph(
        rank_of_ambient=rank,
        vertices=set(relabel.values()),
        edges={(relabel[u], g, relabel[v]) for u, g, v in edges},
    )
