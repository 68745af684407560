"""Shared test utilities: independent oracles and random instance makers."""

from __future__ import annotations

from collections import deque
from itertools import combinations

from hplab.augment import philox_generator
from hplab.graphs import Graph


def random_graph(rng, n: int, p: float) -> Graph:
    edges = [e for e in combinations(range(n), 2) if rng.random() < p]
    return Graph(n, edges)


def seeded_rng(seed: int):
    return philox_generator(seed)


def bfs_all_distances(G: Graph) -> list[list[int]]:
    """Plain queue BFS from every vertex; the oracle for the power operator."""
    out = []
    adj = [list(G.neighbors(v)) for v in range(G.n)]
    for s in range(G.n):
        dist = [-1] * G.n
        dist[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if dist[v] == -1:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        out.append(dist)
    return out


def power_oracle(G: Graph, k: int) -> set[tuple[int, int]]:
    dists = bfs_all_distances(G)
    return {
        (u, v)
        for u in range(G.n)
        for v in range(u + 1, G.n)
        if 1 <= dists[u][v] <= k
    }
