"""Exact backtracking search for powers of Hamiltonian cycles and paths.

This is the ground-truth side of the laboratory: a found certificate always
re-verifies, and an ``absent`` answer means the search space was exhausted.
Budgets make the third outcome ("budget_exhausted") explicit so Monte Carlo
statistics never conflate "no" with "don't know".

Pruning choices:

* candidates must be adjacent to the last min(depth, r) placed vertices,
  with wrap-around constraints for a cycle checked incrementally over the
  final r positions rather than post-hoc;
* candidates are ordered by ascending degree into the remaining vertex set
  (fail fast in sparse neighbourhoods), ties by vertex index;
* cycle symmetry is broken by pinning vertex 0 first and orienting so the
  second vertex is smaller than the last.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Iterable, Optional, Sequence

from .graphs import Graph, PowerSeq, _bits, is_clique, is_power_seq

FOUND = "found"
ABSENT = "absent"
EXHAUSTED = "budget_exhausted"


@dataclass(frozen=True)
class SearchBudget:
    """Caps for one backtracking run; both must be positive."""

    node_cap: int = 5_000_000
    time_cap: float | None = None

    def __post_init__(self) -> None:
        if self.node_cap <= 0:
            raise ValueError("node_cap must be positive")
        if self.time_cap is not None and self.time_cap <= 0:
            raise ValueError("time_cap must be positive")


GENEROUS = SearchBudget()


@dataclass(frozen=True)
class CycleCertificate:
    """Cyclic ordering of all n vertices claimed to realise the r-th power
    of a Hamiltonian cycle."""

    order: tuple[int, ...]
    power: int


@dataclass(frozen=True)
class CycleSearchResult:
    status: str
    certificate: Optional[CycleCertificate]
    nodes: int
    elapsed: float

    @property
    def found(self) -> bool:
        return self.status == FOUND


@dataclass(frozen=True)
class PathSearchResult:
    status: str
    seq: Optional[PowerSeq]
    nodes: int
    elapsed: float

    @property
    def found(self) -> bool:
        return self.status == FOUND


def verify_certificate(H: Graph, cert: CycleCertificate) -> bool:
    """True iff cert.order is a permutation of V(H) and every pair at cyclic
    distance <= cert.power is adjacent."""
    n = H.n
    order = cert.order
    if sorted(order) != list(range(n)):
        return False
    r = min(cert.power, n - 1)
    for i in range(n):
        u = order[i]
        for d in range(1, r + 1):
            if not H.adjacent(u, order[(i + d) % n]):
                return False
    return True


def find_power_ham_cycle(
    H: Graph, r: int, budget: SearchBudget = GENEROUS
) -> CycleSearchResult:
    """Search for the r-th power of a Hamiltonian cycle in H.

    Returns FOUND with a verified certificate, ABSENT after exhausting the
    (symmetry-reduced) search space, or EXHAUSTED when the budget runs out.
    """
    if r < 0:
        raise ValueError("power must be >= 0")
    n = H.n
    if n < r + 2:
        raise ValueError(f"need n >= r+2 (n={n}, r={r})")

    start = time.perf_counter()
    if r == 0:
        cert = CycleCertificate(tuple(range(n)), 0)
        return CycleSearchResult(FOUND, cert, 0, time.perf_counter() - start)

    rows = H.rows
    full = (1 << n) - 1
    seq = [0]
    remaining = full & ~1
    nodes = 0
    deadline = None if budget.time_cap is None else start + budget.time_cap

    def candidates(depth: int) -> list[int]:
        # depth = position about to be filled (1 .. n-1)
        mask = remaining
        for q in seq[-min(depth, r) :]:
            mask &= rows[q]
        if depth >= n - r:
            for q in range(r - (n - depth) + 1):
                mask &= rows[seq[q]]
        if depth == n - 1:
            mask &= full ^ ((1 << (seq[1] + 1)) - 1)
        out = list(_bits(mask))
        out.sort(key=lambda v: ((rows[v] & remaining).bit_count(), v))
        return out

    # stack frame j fills position j; seq[0] is pinned
    stack = [iter(candidates(1))]
    while stack:
        while len(seq) > len(stack):
            remaining |= 1 << seq.pop()
        if nodes > budget.node_cap or (
            deadline is not None and nodes % 1024 == 0 and time.perf_counter() > deadline
        ):
            return CycleSearchResult(EXHAUSTED, None, nodes, time.perf_counter() - start)
        try:
            v = next(stack[-1])
        except StopIteration:
            stack.pop()
            continue
        nodes += 1
        seq.append(v)
        remaining &= ~(1 << v)
        if len(seq) == n:
            cert = CycleCertificate(tuple(seq), r)
            assert verify_certificate(H, cert)
            return CycleSearchResult(FOUND, cert, nodes, time.perf_counter() - start)
        stack.append(iter(candidates(len(seq))))

    return CycleSearchResult(ABSENT, None, nodes, time.perf_counter() - start)


def find_power_path(
    H: Graph,
    r: int,
    frm: Sequence[int],
    to: Sequence[int],
    avoid: Iterable[int] = (),
    internal_count: int = 0,
    budget: SearchBudget = GENEROUS,
) -> PathSearchResult:
    """Search for an r-th power of a path that starts with the ordered
    clique ``frm``, ends with the ordered clique ``to``, and has exactly
    ``internal_count`` internal vertices, none of them in ``avoid``.

    ``frm`` and ``to`` must be disjoint r-cliques (empty tuples when r=0).
    """
    if r < 0:
        raise ValueError("power must be >= 0")
    if internal_count < 0:
        raise ValueError("internal_count must be >= 0")
    frm = tuple(frm)
    to = tuple(to)
    if len(frm) != r or len(to) != r:
        raise ValueError(f"end tuples must have length r={r}")
    if set(frm) & set(to):
        raise ValueError("overlapping end-cliques")
    if not is_clique(H, frm) or not is_clique(H, to):
        raise ValueError("end tuples must be cliques")
    avoid_set = set(avoid)
    if avoid_set & (set(frm) | set(to)):
        raise ValueError("avoid set intersects an end-clique")

    start = time.perf_counter()
    t = internal_count
    rows = H.rows
    full = (1 << H.n) - 1

    # adjacency between the two fixed ends: to[j] must see frm[i] whenever
    # their final distance (r + t + j) - i is at most r, i.e. i >= t + j
    for j in range(r):
        for i in range(t + j, r):
            if not H.adjacent(frm[i], to[j]):
                return PathSearchResult(ABSENT, None, 0, time.perf_counter() - start)

    allowed = full
    for v in avoid_set:
        allowed &= ~(1 << v)
    for v in frm + to:
        allowed &= ~(1 << v)

    if t == 0:
        seq = PowerSeq(frm + to, r, "path")
        assert is_power_seq(H, seq.vertices, r, "path")
        return PathSearchResult(FOUND, seq, 0, time.perf_counter() - start)

    if r == 0:
        picks: list[int] = []
        for v in _bits(allowed):
            picks.append(v)
            if len(picks) == t:
                return PathSearchResult(
                    FOUND, PowerSeq(tuple(picks), 0, "path"), t, time.perf_counter() - start
                )
        return PathSearchResult(ABSENT, None, 0, time.perf_counter() - start)

    seq: list[int] = list(frm)
    remaining = allowed
    nodes = 0
    deadline = None if budget.time_cap is None else start + budget.time_cap

    def candidates() -> list[int]:
        pos = len(seq)  # next position to fill, in r .. r+t-1
        mask = remaining
        for q in seq[-min(pos, r) :]:
            mask &= rows[q]
        # look ahead to the fixed suffix: to[j] sits at position r+t+j and
        # constrains pos whenever j <= pos - t
        for j in range(min(pos - t, r - 1) + 1):
            mask &= rows[to[j]]
        out = list(_bits(mask))
        out.sort(key=lambda v: ((rows[v] & remaining).bit_count(), v))
        return out

    # stack frame j fills internal position r + j - 1
    stack = [iter(candidates())]
    while stack:
        while len(seq) > r + len(stack) - 1:
            remaining |= 1 << seq.pop()
        if nodes > budget.node_cap or (
            deadline is not None and nodes % 1024 == 0 and time.perf_counter() > deadline
        ):
            return PathSearchResult(EXHAUSTED, None, nodes, time.perf_counter() - start)
        try:
            v = next(stack[-1])
        except StopIteration:
            stack.pop()
            continue
        nodes += 1
        seq.append(v)
        remaining &= ~(1 << v)
        if len(seq) == r + t:
            result = PowerSeq(tuple(seq) + to, r, "path")
            assert is_power_seq(H, result.vertices, r, "path")
            return PathSearchResult(FOUND, result, nodes, time.perf_counter() - start)
        stack.append(iter(candidates()))

    return PathSearchResult(ABSENT, None, nodes, time.perf_counter() - start)


@dataclass(frozen=True)
class PackingResult:
    size: int
    exact: bool


def max_disjoint_cliques(G: Graph, r: int, exact_limit: int = 14) -> PackingResult:
    """Maximum number of vertex-disjoint r-cliques.

    Exact (memoised search over vertex subsets) for n <= exact_limit;
    beyond that a greedy lower bound is returned and flagged as such.
    """
    if r < 1:
        raise ValueError("clique order must be >= 1")
    n = G.n
    if n <= exact_limit:
        by_min: dict[int, list[int]] = {}
        for c in combinations(range(n), r):
            if is_clique(G, c):
                mask = 0
                for v in c:
                    mask |= 1 << v
                by_min.setdefault(c[0], []).append(mask)
        memo: dict[int, int] = {}

        def best(avail: int) -> int:
            if avail == 0:
                return 0
            cached = memo.get(avail)
            if cached is not None:
                return cached
            v = (avail & -avail).bit_length() - 1
            result = best(avail & ~(1 << v))
            for cmask in by_min.get(v, ()):
                if cmask & avail == cmask:
                    result = max(result, 1 + best(avail & ~cmask))
            memo[avail] = result
            return result

        return PackingResult(best((1 << n) - 1), True)

    avail = (1 << n) - 1
    count = 0
    while True:
        clique = first_clique_in_mask(G, r, avail)
        if clique is None:
            return PackingResult(count, False)
        count += 1
        for v in clique:
            avail &= ~(1 << v)


def first_clique_in_mask(G: Graph, r: int, avail: int) -> tuple[int, ...] | None:
    """Lexicographically first r-clique inside the vertex mask, or None."""
    rows = G.rows
    chosen: list[int] = []

    def extend(candidates: int) -> bool:
        if len(chosen) == r:
            return True
        mask = candidates
        while mask:
            low = mask & -mask
            v = low.bit_length() - 1
            mask ^= low
            chosen.append(v)
            if extend(candidates & rows[v] & ~((1 << (v + 1)) - 1)):
                return True
            chosen.pop()
        return False

    if extend(avail):
        return tuple(chosen)
    return None


def brute_force_oracle(H: Graph, r: int) -> bool:
    """Decide the r-th power of a Hamiltonian cycle by enumerating cyclic
    orders.  Only meant to validate the backtracking search; capped at
    n <= 9 because the enumeration is factorial."""
    n = H.n
    if n > 9:
        raise ValueError("brute-force oracle capped at n <= 9")
    if n < 3:
        return False
    if r == 0:
        return True
    rr = min(r, n - 1)
    adj = H.rows
    rest = list(range(1, n))
    for perm in permutations(rest):
        if perm[0] > perm[-1]:
            continue  # skip the reflected copy
        order = (0,) + perm
        ok = True
        for i in range(n):
            u = order[i]
            for d in range(1, rr + 1):
                if not (adj[u] >> order[(i + d) % n]) & 1:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return True
    return False
