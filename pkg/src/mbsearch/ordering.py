"""Moral graphs, min-degree orderings and induced width."""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from .network import BeliefNetwork


@dataclass(frozen=True)
class MoralGraph:
    adjacency: tuple[frozenset[int], ...]

    @property
    def n(self) -> int:
        return len(self.adjacency)

    @classmethod
    def from_edges(cls, n: int, edges) -> MoralGraph:
        adj = [set() for _ in range(n)]
        for u, v in edges:
            if u != v:
                adj[u].add(v)
                adj[v].add(u)
        return cls(tuple(frozenset(s) for s in adj))

    def edges(self) -> set[tuple[int, int]]:
        return {(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v}


@dataclass(frozen=True)
class Ordering:
    """``order[k]`` is the k-th variable (X1 first); ``position`` inverts it."""

    order: tuple[int, ...]

    def __post_init__(self):
        order = tuple(int(v) for v in self.order)
        if sorted(order) != list(range(len(order))):
            raise ValueError(f"{order} is not a permutation")
        object.__setattr__(self, "order", order)

    @property
    def position(self) -> tuple[int, ...]:
        pos = [0] * len(self.order)
        for k, v in enumerate(self.order):
            pos[v] = k
        return tuple(pos)

    def __len__(self):
        return len(self.order)


def moralize(net: BeliefNetwork) -> MoralGraph:
    """Connect every CPT scope into a clique and drop edge directions."""
    edges = []
    for f in net.cpts:
        edges.extend(combinations(f.scope, 2))
    return MoralGraph.from_edges(net.n, edges)


def min_degree_ordering(g: MoralGraph, seed: int | None = None) -> Ordering:
    """Fill the ordering from the back with minimum-degree nodes.

    Each chosen node's neighbours are connected pairwise before it is
    removed.  Ties go to the lowest variable index unless ``seed`` is
    given, in which case they are broken by a seeded random draw.
    """
    adj = [set(s) for s in g.adjacency]
    alive = set(range(g.n))
    rng = random.Random(seed) if seed is not None else None
    reverse = []
    while alive:
        best = min(len(adj[v]) for v in alive)
        ties = sorted(v for v in alive if len(adj[v]) == best)
        v = ties[0] if rng is None else rng.choice(ties)
        nbrs = adj[v]
        for a, b in combinations(nbrs, 2):
            adj[a].add(b)
            adj[b].add(a)
        for u in nbrs:
            adj[u].discard(v)
        alive.remove(v)
        adj[v] = set()
        reverse.append(v)
    return Ordering(tuple(reversed(reverse)))


def width(g: MoralGraph, d: Ordering) -> int:
    """Largest number of earlier neighbours, without fill-in."""
    pos = d.position
    return max(
        (sum(1 for u in g.adjacency[v] if pos[u] < pos[v]) for v in range(g.n)),
        default=0,
    )


def induced_width(g: MoralGraph, d: Ordering | Sequence[int]) -> int:
    if not isinstance(d, Ordering):
        d = Ordering(tuple(d))
    pos = d.position
    adj = [set(s) for s in g.adjacency]
    w = 0
    for v in reversed(d.order):
        earlier = [u for u in adj[v] if pos[u] < pos[v]]
        w = max(w, len(earlier))
        for a, b in combinations(earlier, 2):
            adj[a].add(b)
            adj[b].add(a)
    return w
