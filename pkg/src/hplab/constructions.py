"""Deterministic graph generators used across the laboratory.

Four families:

* the extremal lower-bound witness: a complete multipartite graph with a
  thin bipartite "collar" inside each part, which has high minimum degree
  yet admits only O(eps * n) disjoint (k+2)-cliques;
* the gadget ``pminus(k)``: the (k+1)-st power of a path on 2k+2 vertices
  with its middle edge removed (the shape every absorber must span);
* blow-ups of a (k+2)-clique minus one edge, the tiles of the covering
  stage;
* seeded dense host graphs for Monte Carlo experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graphs import Graph, MAX_VERTICES


class InvalidSpecError(ValueError):
    """Construction parameters violate a structural requirement."""


@dataclass(frozen=True)
class ExtremalSpec:
    """Parameters of the extremal witness graph.

    Requires (k+1) | n so the parts have exact size n/(k+1), and the collar
    size ceil(eps*n) must fit inside a part.
    """

    k: int
    n: int
    eps: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "eps", Fraction(self.eps))
        if self.k < 0:
            raise InvalidSpecError("k must be >= 0")
        if self.n <= 0 or self.n % (self.k + 1) != 0:
            raise InvalidSpecError(f"(k+1)={self.k + 1} must divide n={self.n}")
        if not 0 < self.eps < 1:
            raise InvalidSpecError("eps must lie in (0,1)")
        if self.w_size > self.part_size:
            raise InvalidSpecError(
                f"collar size {self.w_size} exceeds part size {self.part_size}"
            )

    @property
    def part_size(self) -> int:
        return self.n // (self.k + 1)

    @property
    def w_size(self) -> int:
        return math.ceil(self.eps * self.n)


def extremal_layout(spec: ExtremalSpec) -> tuple[tuple[tuple[int, ...], ...], tuple[tuple[int, ...], ...]]:
    """Vertex layout of the extremal graph: (parts, collars).

    Part i is the contiguous block [i*s, (i+1)*s) and its collar is the
    first ceil(eps*n) vertices of the block.
    """
    s = spec.part_size
    parts = tuple(tuple(range(i * s, (i + 1) * s)) for i in range(spec.k + 1))
    collars = tuple(p[: spec.w_size] for p in parts)
    return parts, collars


def extremal_graph(spec: ExtremalSpec) -> Graph:
    """Complete (k+1)-partite graph plus a complete bipartite graph between
    each part's collar W_i and the rest of the part.

    Every collar vertex ends with degree n - ceil(eps*n) and every other
    vertex with degree n - n/(k+1) + ceil(eps*n), so the minimum degree is
    at least (k/(k+1) + eps) * n.
    """
    parts, collars = extremal_layout(spec)
    edges: list[tuple[int, int]] = []
    for i, part in enumerate(parts):
        for other in parts[i + 1 :]:
            edges.extend((u, v) for u in part for v in other)
        w = set(collars[i])
        rest = [v for v in part if v not in w]
        edges.extend((u, v) for u in collars[i] for v in rest)
    return Graph(spec.n, edges)


def pminus(k: int) -> Graph:
    """Power-of-path gadget on 2k+2 vertices with the middle edge deleted.

    Vertices 0..2k+1 are joined whenever their index distance is at most
    k+1, except for the pair (k, k+1).  Built directly from the index
    arithmetic (not via ``power``) so the two constructions can check each
    other.  For k = 0 this is two isolated vertices.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    size = 2 * k + 2
    edges = [
        (i, j)
        for i in range(size)
        for j in range(i + 1, min(i + k + 1, size - 1) + 1)
        if (i, j) != (k, k + 1)
    ]
    return Graph(size, edges)


def pminus_coloring(k: int) -> tuple[int, ...]:
    """A proper (k+1)-colouring of pminus(k).

    Colour pattern 0,...,k,k,0,...,k-1 down the vertex order: the two
    middle vertices share a colour, which is exactly what deleting the
    middle edge permits.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    colors = []
    for j in range(2 * k + 2):
        if j <= k:
            colors.append(j)
        elif j == k + 1:
            colors.append(k)
        else:
            colors.append(j - k - 2)
    return tuple(colors)


def blowup_kminus(k: int, m: int) -> Graph:
    """m-blow-up of the (k+2)-clique minus one edge.

    Class c occupies vertices [c*m, (c+1)*m); classes are independent sets,
    all class pairs are completely joined except the fixed missing pair
    (0, 1).  Edge count is (C(k+2,2) - 1) * m^2.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if m < 1:
        raise ValueError("blow-up size m must be >= 1")
    r = k + 2
    edges = [
        (a * m + i, b * m + j)
        for a in range(r)
        for b in range(a + 1, r)
        if (a, b) != (0, 1)
        for i in range(m)
        for j in range(m)
    ]
    return Graph(r * m, edges)


DENSE_HOST_MARGIN = 0.05


def dense_host(n: int, alpha: Fraction | float, seed: int) -> Graph:
    """Reproducible host graph with minimum degree >= ceil(alpha * n).

    Samples a binomial graph of density alpha + 0.05 and then patches every
    vertex below the target degree by connecting it to its lowest-indexed
    non-neighbours.  The patching is deterministic, so the whole graph is a
    pure function of (n, alpha, seed).
    """
    from .augment import philox_generator  # local import to avoid a cycle

    if n < 1 or n > MAX_VERTICES:
        raise ValueError(f"n={n} outside [1, {MAX_VERTICES}]")
    alpha = Fraction(alpha)
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0,1)")
    target = math.ceil(alpha * n)
    if target >= n:
        raise ValueError(f"target degree {target} infeasible for n={n}")

    p = min(1.0, float(alpha) + DENSE_HOST_MARGIN)
    rng = philox_generator(seed)
    count = n * (n - 1) // 2
    hits = np.nonzero(rng.random(count) < p)[0]
    row_starts = np.cumsum([0] + [n - 1 - i for i in range(n)])
    us = np.searchsorted(row_starts, hits, side="right") - 1
    vs = hits - row_starts[us] + us + 1

    rows = [0] * n
    for u, v in zip(us.tolist(), vs.tolist()):
        rows[u] |= 1 << v
        rows[v] |= 1 << u

    full = (1 << n) - 1
    for v in range(n):
        missing = full & ~rows[v] & ~(1 << v)
        while rows[v].bit_count() < target:
            low = missing & -missing
            u = low.bit_length() - 1
            missing ^= low
            rows[v] |= 1 << u
            rows[u] |= 1 << v

    edges = [
        (u, v)
        for u in range(n)
        for v in range(u + 1, n)
        if (rows[u] >> v) & 1
    ]
    return Graph(n, edges)
