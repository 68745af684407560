"""Bitset-backed simple graphs, graph powers, and neighbourhood degree checks.

Vertices are always 0..n-1.  Adjacency is stored as one Python integer per
vertex, so a joint neighbourhood is a chain of ANDs and a degree is a
popcount.  That keeps the exact searches elsewhere in the package fast
enough for desk-scale instances; ``MAX_VERTICES`` caps the row width.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Literal, Sequence

MAX_VERTICES = 4096

Kind = Literal["path", "walk"]


class PreconditionError(ValueError):
    """A stated hypothesis of an operation does not hold for the input."""


def _bits(mask: int) -> Iterator[int]:
    """Yield the set bit positions of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class Graph:
    """Immutable simple undirected graph on vertex set {0, ..., n-1}.

    Self-loops are rejected and duplicate edges are collapsed.  Instances
    are safe to share between concurrent readers; every operation in this
    module is pure.
    """

    __slots__ = ("n", "rows", "num_edges")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()) -> None:
        if not 0 <= n <= MAX_VERTICES:
            raise ValueError(f"vertex count {n} outside [0, {MAX_VERTICES}]")
        rows = [0] * n
        m = 0
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (rows[u] >> v) & 1:
                m += 1
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        self.n = n
        self.rows = tuple(rows)
        self.num_edges = m

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def adjacent(self, u: int, v: int) -> bool:
        return bool((self.rows[u] >> v) & 1)

    def degree(self, v: int) -> int:
        return self.rows[v].bit_count()

    def neighbors_mask(self, v: int) -> int:
        return self.rows[v]

    def neighbors(self, v: int) -> tuple[int, ...]:
        return tuple(_bits(self.rows[v]))

    def edges(self) -> Iterator[tuple[int, int]]:
        for u in range(self.n):
            row = self.rows[u] >> (u + 1)
            for off in _bits(row):
                yield (u, u + 1 + off)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.rows == other.rows

    __hash__ = None  # equality is structural, so identity hashing would lie

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.num_edges})"


def complete_graph(n: int) -> Graph:
    return Graph(n, ((u, v) for u in range(n) for v in range(u + 1, n)))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycle needs at least 3 vertices")
    return Graph(n, ((i, (i + 1) % n) for i in range(n)))


def path_graph(n: int) -> Graph:
    return Graph(n, ((i, i + 1) for i in range(n - 1)))


def min_degree(G: Graph) -> int:
    if G.n == 0:
        return 0
    return min(row.bit_count() for row in G.rows)


def is_clique(G: Graph, vertices: Sequence[int]) -> bool:
    """True iff the listed vertices are distinct and pairwise adjacent.

    The empty tuple and single vertices count as cliques (the order-0
    convention used throughout: an empty clique imposes no constraint).
    """
    vs = tuple(vertices)
    if len(set(vs)) != len(vs):
        return False
    for i, u in enumerate(vs):
        for v in vs[i + 1 :]:
            if not G.adjacent(u, v):
                return False
    return True


def joint_neighborhood_mask(G: Graph, J: Iterable[int]) -> int:
    """Bitmask of the common neighbourhood of J; the full set for J = {}."""
    mask = G.full_mask
    for u in J:
        mask &= G.rows[u]
    return mask


def joint_neighborhood(G: Graph, J: Iterable[int]) -> set[int]:
    """Common neighbourhood of the vertices in J.

    The empty set of constraints yields all of V, matching the convention
    that a 0-clique extends to anything.
    """
    return set(_bits(joint_neighborhood_mask(G, J)))


def power(H: Graph, k: int) -> Graph:
    """The k-th power of H: join vertices at H-distance between 1 and k.

    k = 0 gives the edgeless graph on V(H).  Implemented as a bit-parallel
    layered expansion from each vertex.
    """
    if k < 0:
        raise ValueError("power order must be >= 0")
    n = H.n
    G = Graph.__new__(Graph)
    rows = [0] * n
    m = 0
    for u in range(n):
        reached = 1 << u
        frontier = 1 << u
        for _ in range(k):
            grow = 0
            for v in _bits(frontier):
                grow |= H.rows[v]
            frontier = grow & ~reached
            if not frontier:
                break
            reached |= frontier
        rows[u] = reached & ~(1 << u)
    for u in range(n):
        m += (rows[u] >> (u + 1)).bit_count()
    G.n = n
    G.rows = tuple(rows)
    G.num_edges = m
    return G


@dataclass(frozen=True)
class PowerSeq:
    """A vertex sequence claimed to form an r-th power of a path or walk.

    For kind="path" all vertices are distinct; for kind="walk" repetitions
    are allowed as long as the adjacency requirement below holds.  In both
    cases every pair of entries at sequence distance <= power must be
    adjacent in the graph against which the sequence is validated.
    """

    vertices: tuple[int, ...]
    power: int
    kind: Kind = "path"

    def __post_init__(self) -> None:
        if self.power < 0:
            raise ValueError("power must be >= 0")
        if self.kind not in ("path", "walk"):
            raise ValueError(f"unknown kind {self.kind!r}")

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def head(self) -> tuple[int, ...]:
        """Ordered end-set at the start: the first `power` vertices."""
        return self.vertices[: self.power]

    @property
    def tail(self) -> tuple[int, ...]:
        """Ordered end-set at the end: the last `power` vertices."""
        if self.power == 0:
            return ()
        return self.vertices[-self.power :]

    @property
    def internal(self) -> tuple[int, ...]:
        if self.power == 0:
            return self.vertices
        return self.vertices[self.power : -self.power or None]


def is_power_seq(G: Graph, seq: Sequence[int], r: int, kind: Kind = "path") -> bool:
    """Check the power-sequence conditions for ``seq`` against G.

    Every pair at sequence distance <= r must be adjacent (which, absent
    self-loops, already forces any r+1 consecutive entries to be distinct);
    kind="path" additionally requires global distinctness.
    """
    if r < 0:
        raise ValueError("power must be >= 0")
    vs = tuple(seq)
    if any(not 0 <= v < G.n for v in vs):
        return False
    if kind == "path" and len(set(vs)) != len(vs):
        return False
    for i, u in enumerate(vs):
        for j in range(i + 1, min(i + r, len(vs) - 1) + 1):
            if not G.adjacent(u, vs[j]):
                return False
    return True


# ---------------------------------------------------------------------------
# Joint-neighbourhood degree inequalities
# ---------------------------------------------------------------------------

SAMPLED_SETS_PER_SIZE = 10_000
EXHAUSTIVE_LIMIT = 14


@dataclass(frozen=True)
class NeighborhoodViolation:
    check: str  # "joint-size" or "induced-degree"
    subset: tuple[int, ...]
    observed: int
    required: Fraction


@dataclass(frozen=True)
class NeighborhoodDegreeReport:
    k: int
    eps: Fraction
    n: int
    exhaustive: bool
    checked: int
    violations: tuple[NeighborhoodViolation, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.violations


def check_neighborhood_degrees(
    G: Graph,
    k: int,
    eps: Fraction | float | int,
    *,
    exhaustive_limit: int = EXHAUSTIVE_LIMIT,
    samples: int = SAMPLED_SETS_PER_SIZE,
    seed: int = 0,
) -> NeighborhoodDegreeReport:
    """Verify the two degree inequalities that dense graphs pass down to
    joint neighbourhoods.

    For a graph with delta(G) >= (k/(k+1) + eps) n it must hold, for every
    j in 1..k+1 and every j-set J, that

        |N(J)| >= ((k+1-j)/(k+1) + j*eps) * n

    and for j in 1..k additionally

        delta(G[N(J)]) >= ((k-j)/(k-j+1) + eps) * |N(J)|.

    All comparisons are exact over rationals.  For n <= exhaustive_limit
    every J is checked; beyond that, `samples` sets per size are drawn from
    a generator seeded with `seed` (the combinatorial explosion of j-sets
    makes exhaustion hopeless at larger n).
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    eps = Fraction(eps)
    n = G.n
    hypothesis = (Fraction(k, k + 1) + eps) * n
    if min_degree(G) < hypothesis:
        raise PreconditionError(
            f"min degree {min_degree(G)} below hypothesis "
            f"({float(hypothesis):.3f} for k={k}, eps={eps})"
        )

    exhaustive = n <= exhaustive_limit
    rng = random.Random(seed)
    violations: list[NeighborhoodViolation] = []
    checked = 0

    def subsets(j: int) -> Iterator[tuple[int, ...]]:
        if exhaustive:
            from itertools import combinations

            yield from combinations(range(n), j)
        else:
            for _ in range(samples):
                yield tuple(sorted(rng.sample(range(n), j)))

    for j in range(1, k + 2):
        size_required = (Fraction(k + 1 - j, k + 1) + j * eps) * n
        check_induced = j <= k
        induced_ratio = Fraction(k - j, k - j + 1) + eps if check_induced else None
        for J in subsets(j):
            checked += 1
            mask = joint_neighborhood_mask(G, J)
            size = mask.bit_count()
            if size < size_required:
                violations.append(
                    NeighborhoodViolation("joint-size", J, size, size_required)
                )
                continue
            if check_induced:
                dmin = min((G.rows[v] & mask).bit_count() for v in _bits(mask))
                if dmin < induced_ratio * size:
                    violations.append(
                        NeighborhoodViolation(
                            "induced-degree", J, dmin, induced_ratio * size
                        )
                    )

    return NeighborhoodDegreeReport(
        k=k,
        eps=eps,
        n=n,
        exhaustive=exhaustive,
        checked=checked,
        violations=tuple(violations),
    )


# ---------------------------------------------------------------------------
# Edge-list text format
# ---------------------------------------------------------------------------


def write_edge_list(G: Graph, path) -> None:
    """Write the plain text edge-list format: "n m" then one "u v" per edge."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{G.n} {G.num_edges}\n")
        for u, v in G.edges():
            fh.write(f"{u} {v}\n")


def parse_edge_list(text: str) -> Graph:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty edge-list input")
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError("header must be 'n m'")
    n, m = int(header[0]), int(header[1])
    if len(lines) - 1 != m:
        raise ValueError(f"expected {m} edge lines, found {len(lines) - 1}")
    seen: set[tuple[int, int]] = set()
    edges: list[tuple[int, int]] = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"bad edge line {ln!r}")
        u, v = int(parts[0]), int(parts[1])
        if not 0 <= u < v < n:
            raise ValueError(f"edge ({u},{v}) violates 0 <= u < v < n")
        if (u, v) in seen:
            raise ValueError(f"duplicate edge ({u},{v})")
        seen.add((u, v))
        edges.append((u, v))
    return Graph(n, edges)


def read_edge_list(path) -> Graph:
    with open(path, "r", encoding="ascii") as fh:
        return parse_edge_list(fh.read())
