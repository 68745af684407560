"""Seeded binomial random graphs and unions with a deterministic base graph.

Sampling uses the counter-based Philox 4x64 generator from numpy, which is
bit-exact across platforms; ``GENERATOR_VERSION`` names the generator plus
the pair-enumeration convention and goes into every run manifest.  One
uniform is drawn per vertex pair in lexicographic order, so re-sampling
with the same seed and a larger p only ever adds edges (a monotone
coupling the threshold experiments rely on).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .graphs import Graph

GENERATOR_VERSION = "philox4x64-numpy/lex-pairs/v1"

_MASK64 = (1 << 64) - 1


def subseed(master: int, *labels: int | str) -> int:
    """Derive an independent 64-bit stream seed from a master seed.

    Hash-based (BLAKE2b) so that per-trial and per-stage streams never
    overlap and the derivation is stable across platforms and runs.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(master)).encode())
    for label in labels:
        h.update(b"/")
        h.update(str(label).encode())
    return int.from_bytes(h.digest(), "big")


def philox_generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & _MASK64))


@dataclass(frozen=True)
class RandomPart:
    """A sampled binomial random graph together with its provenance."""

    graph: Graph
    p: float
    seed: int
    generator: str = GENERATOR_VERSION

    @property
    def n(self) -> int:
        return self.graph.n

    def manifest(self) -> dict:
        return {
            "n": self.graph.n,
            "edges": self.graph.num_edges,
            "p": self.p,
            "seed": self.seed,
            "generator": self.generator,
        }


def sample_gnp(n: int, p: float, seed: int) -> RandomPart:
    """Binomial random graph: each of the C(n,2) pairs kept independently
    with probability p.  Reproducible from (n, p, seed)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0,1]")
    if n < 0:
        raise ValueError("n must be >= 0")
    count = n * (n - 1) // 2
    if count == 0 or p == 0.0:
        return RandomPart(Graph(n), p, seed)
    rng = philox_generator(seed)
    hits = np.nonzero(rng.random(count) < p)[0]
    row_starts = np.cumsum([0] + [n - 1 - i for i in range(n)])
    us = np.searchsorted(row_starts, hits, side="right") - 1
    vs = hits - row_starts[us] + us + 1
    edges = list(zip(us.tolist(), vs.tolist()))
    return RandomPart(Graph(n, edges), p, seed)


@dataclass(frozen=True)
class AugmentedGraph:
    """Union H of a deterministic graph and a random part.

    Membership of an edge in the random part stays queryable even when the
    edge is also deterministic.
    """

    det: Graph
    rnd: RandomPart
    graph: Graph = field(init=False)

    def __post_init__(self) -> None:
        if self.det.n != self.rnd.graph.n:
            raise ValueError(
                f"vertex count mismatch: {self.det.n} vs {self.rnd.graph.n}"
            )
        merged = Graph.__new__(Graph)
        rows = tuple(a | b for a, b in zip(self.det.rows, self.rnd.graph.rows))
        merged.n = self.det.n
        merged.rows = rows
        merged.num_edges = sum(
            (rows[u] >> (u + 1)).bit_count() for u in range(self.det.n)
        )
        object.__setattr__(self, "graph", merged)

    @property
    def n(self) -> int:
        return self.det.n

    def is_random_edge(self, u: int, v: int) -> bool:
        return self.rnd.graph.adjacent(u, v)


def union(det: Graph, rnd: RandomPart) -> AugmentedGraph:
    return AugmentedGraph(det, rnd)


def ordered_intersecting_pairs(G: Graph) -> int:
    """Number of ordered pairs (e, e') of distinct edges sharing a vertex.

    In a simple graph two distinct edges share at most one vertex, so the
    count is sum_v d(v) * (d(v) - 1).
    """
    return sum(d * (d - 1) for d in (row.bit_count() for row in G.rows))


@dataclass(frozen=True)
class PropertyCheck:
    name: str
    passed: bool
    observed: float
    bound: float
    detail: str = ""


@dataclass(frozen=True)
class RandomPropertiesReport:
    checks: tuple[PropertyCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> PropertyCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def check_random_properties(
    H: AugmentedGraph,
    C: float,
    beta: float,
    gamma: float,
    bx_family: Mapping[int, Iterable[tuple[int, int]]],
    R: Iterable[int],
) -> RandomPropertiesReport:
    """Check the three properties the sparse random part must supply.

    (i)   the random part has at most C*n edges;
    (ii)  it contains at most 2*C^2*n ordered pairs of intersecting edges;
    (iii) for the given excluded set R and every supplied auxiliary pair
          graph, at least beta*C*n/4 of its pairs avoiding R land in the
          random part.

    The declared edge probability must match C/n.
    """
    n = H.n
    if n > 0 and abs(H.rnd.p - C / n) > 1e-9:
        raise ValueError(f"declared p={H.rnd.p} does not match C/n={C / n}")
    rnd = H.rnd.graph
    checks = []

    edge_cap = C * n
    checks.append(
        PropertyCheck("edge-count", rnd.num_edges <= edge_cap, rnd.num_edges, edge_cap)
    )

    pair_cap = 2 * C * C * n
    pairs = ordered_intersecting_pairs(rnd)
    checks.append(PropertyCheck("intersecting-pairs", pairs <= pair_cap, pairs, pair_cap))

    r_mask = 0
    for v in R:
        r_mask |= 1 << v
    floor = beta * C * n / 4
    worst = None
    ok = True
    for x, pairs_x in bx_family.items():
        hit = 0
        for u, v in pairs_x:
            if (r_mask >> u) & 1 or (r_mask >> v) & 1:
                continue
            if rnd.adjacent(u, v):
                hit += 1
        if worst is None or hit < worst[1]:
            worst = (x, hit)
        if hit < floor:
            ok = False
    observed = worst[1] if worst is not None else 0
    detail = f"min over x at x={worst[0]}" if worst is not None else "empty family"
    checks.append(PropertyCheck("absorber-pairs", ok, observed, floor, detail))

    return RandomPropertiesReport(tuple(checks))


def write_manifest(part: RandomPart, path, extra: dict | None = None) -> None:
    data = part.manifest()
    if extra:
        data.update(extra)
    with open(path, "w", encoding="ascii") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def graph_fingerprint(G: Graph) -> str:
    """Stable short identifier of a graph's exact edge set."""
    h = hashlib.blake2b(digest_size=8)
    h.update(f"{G.n}".encode())
    for u, v in G.edges():
        h.update(f",{u}-{v}".encode())
    return h.hexdigest()


__all__ = [
    "GENERATOR_VERSION",
    "RandomPart",
    "AugmentedGraph",
    "subseed",
    "philox_generator",
    "sample_gnp",
    "union",
    "ordered_intersecting_pairs",
    "check_random_properties",
    "RandomPropertiesReport",
    "PropertyCheck",
    "write_manifest",
    "graph_fingerprint",
]
