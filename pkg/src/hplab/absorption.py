"""The constructive absorption pipeline.

Given a dense deterministic graph G and a sparse random part, the pipeline
builds the (k+1)-st power of a Hamiltonian cycle in the union H in stages:

1. reserve a small vertex set R whose intersection with every
   neighbourhood stays proportionally large (the reservoir);
2. select a vertex-disjoint family of absorbers: ordered (2k+2)-tuples
   spanning the middle-edge-deleted path power in G - R whose middle edge
   comes from the random part;
3. connect the absorbers into one absorbing path A inside H - R;
4. cover most of H - (R u V(A)) by vertex-disjoint (k+1)-paths, first by
   turning blow-up tiles into paths with an alternating random-edge path,
   then by direct greedy extension with single-vertex insertion repair;
5. stitch A and the cover paths into a cycle, drawing every connector's
   internal vertices from the reservoir, exactly (k+1)*2^(k+1) per stitch;
6. absorb whatever is left (uncovered vertices plus unused reservoir)
   into A, one distinct absorber per vertex, and re-verify the result.

The asymptotic constant hierarchy behind the method is vacuous at desk
scale (a reservoir of size gamma^2*n with gamma < eps/4^(k+2) would be
empty for any feasible n), so every magnitude-style floor and cap is a
parameter with the asymptotic expression as its default and per-experiment
presets supplying workable values.  Structural requirements - exact
internal counts, disjointness, avoidance sets, end-set preservation,
middle edges from the random part - are always enforced and re-checked.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .augment import AugmentedGraph, philox_generator, subseed
from .graphs import (
    Graph,
    PowerSeq,
    PreconditionError,
    _bits,
    is_clique,
    is_power_seq,
    joint_neighborhood_mask,
    min_degree,
)
from .search import (
    CycleCertificate,
    SearchBudget,
    find_power_path,
    first_clique_in_mask,
    verify_certificate,
)


class PipelineError(Exception):
    """Base class for stage failures inside the pipeline."""


class ReservoirError(PipelineError):
    pass


class ReservoirExhaustedError(PipelineError):
    pass


class ConnectError(PipelineError):
    pass


class AbsorberShortfallError(PipelineError):
    pass


class AbsorptionError(PipelineError):
    pass


class CoverShortfallError(PipelineError):
    pass


@dataclass(frozen=True)
class RetryCaps:
    reservoir: int = 30
    family: int = 30
    cover: int = 4
    assemble: int = 6


@dataclass(frozen=True)
class PipelineParams:
    """All pipeline constants plus the desk-scale overrides.

    Fields with a ``*_cap``/``*_size``/``floor`` flavour default to the
    asymptotic expressions (gamma^2*n, gamma*n/2, ...) when left at None;
    presets override them with values that are meaningful at the instance
    sizes actually run.  ``tau`` and ``delta`` are recorded in run
    manifests but not consumed by the greedy tiling that replaces the
    regularity machinery.
    """

    k: int
    eps: float
    gamma: float
    C: float
    beta: float = 0.01
    m: int = 2
    tau: float = 0.0
    delta: float = 0.0
    q: float | None = None
    family_target: int | None = None
    seed: int = 0
    retries: RetryCaps = field(default_factory=RetryCaps)
    budget_nodes: int = 200_000
    reservoir_size: int | None = None
    reservoir_degree_frac: float | None = None
    prune: str = "pair"  # "pair": delete both of every overlapping pair;
    # "greedy": afterwards re-add skipped absorbers that fit disjointly
    per_x_floor: int = 0
    family_min: int = 1
    family_max: int | None = None
    path_cap: int | None = None
    used_cap_frac: float | None = None
    absorb_cap: int | None = None
    leftover_cap: int | None = None

    def __post_init__(self) -> None:
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if self.k > 2:
            raise ValueError("absorber enumeration is desk-scale only (k <= 2)")
        if not 0 < self.eps:
            raise ValueError("eps must be positive")
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0,1)")
        if self.C < 0:
            raise ValueError("C must be >= 0")
        if not 0 < self.beta <= 1:
            raise ValueError("beta must lie in (0,1]")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.q is not None and not 0 <= self.q <= 1:
            raise ValueError("q must lie in [0,1]")
        if self.prune not in ("pair", "greedy"):
            raise ValueError("prune must be 'pair' or 'greedy'")

    @property
    def internal_count(self) -> int:
        """Internal vertices of every connector path: (k+1) * 2^(k+1)."""
        return (self.k + 1) * 2 ** (self.k + 1)

    @property
    def walk_internals(self) -> int:
        """Internal vertices of the diagnostic walks: (k+1) * (2^(k+1)-2)."""
        return (self.k + 1) * (2 ** (self.k + 1) - 2)

    def budget(self) -> SearchBudget:
        return SearchBudget(node_cap=self.budget_nodes)

    def reservoir_target(self, n: int) -> int:
        if self.reservoir_size is not None:
            return self.reservoir_size
        return int(self.gamma * self.gamma * n)

    def path_cap_value(self, n: int) -> int:
        if self.path_cap is not None:
            return self.path_cap
        return int(self.gamma * n / 2)

    def absorb_cap_value(self, n: int) -> int:
        if self.absorb_cap is not None:
            return self.absorb_cap
        return int(2 * self.gamma * self.gamma * n)

    def leftover_cap_value(self, n: int) -> int:
        if self.leftover_cap is not None:
            return self.leftover_cap
        return int(self.gamma * self.gamma * n)

    def used_cap(self, reservoir_size: int) -> int:
        frac = self.used_cap_frac if self.used_cap_frac is not None else self.eps / 4
        return int(frac * reservoir_size)

    def q_value(self, n: int, total_candidates: int) -> float:
        """Absorber selection probability: explicit q, else adaptive from
        ``family_target``, else the auto-derived gamma^(3/2)/(C n^(2k))."""
        if self.q is not None:
            return self.q
        if self.family_target is not None and total_candidates > 0:
            return min(1.0, self.family_target / total_candidates)
        if self.C <= 0 or n == 0:
            return 0.0
        return min(1.0, self.gamma**1.5 / (self.C * n ** (2 * self.k)))

    def reservoir_degree_fraction(self) -> Fraction:
        """Required |N(v) & R| / |R|.  Defaults to the asymptotic
        k/(k+1) + eps/2; presets relax it for k >= 1, where a uniform
        desk-scale sample cannot clear the k/(k+1) floor reliably."""
        if self.reservoir_degree_frac is not None:
            return Fraction(self.reservoir_degree_frac)
        return Fraction(self.k, self.k + 1) + Fraction(self.eps) / 2

    def respects_asymptotic_hierarchy(self) -> bool:
        """Whether gamma sits below eps/4^(k+2); recorded, not enforced."""
        return self.gamma < self.eps / 4 ** (self.k + 2)


# ---------------------------------------------------------------------------
# Reservoir
# ---------------------------------------------------------------------------


@dataclass
class Reservoir:
    """Reserved vertex set with bookkeeping of consumed connector internals."""

    members: tuple[int, ...]
    mask: int
    used: set[int] = field(default_factory=set)

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def used_count(self) -> int:
        return len(self.used)

    def free_mask(self) -> int:
        mask = self.mask
        for v in self.used:
            mask &= ~(1 << v)
        return mask


def reservoir_degree_ok(G: Graph, mask: int, size: int, required_frac: Fraction) -> bool:
    """Every vertex must keep at least the required fraction of the
    reservoir in its neighbourhood."""
    required = required_frac * size
    return all((row & mask).bit_count() >= required for row in G.rows)


def build_reservoir(
    G: Graph, params: PipelineParams, *, seed: int | None = None
) -> Reservoir:
    """Sample a uniformly random reservoir satisfying the degree condition,
    re-sampling up to the retry cap."""
    n = G.n
    k, eps = params.k, params.eps
    hypothesis = (k / (k + 1) + eps) * n
    if min_degree(G) + 1e-9 < hypothesis:
        raise PreconditionError(
            f"min degree {min_degree(G)} below (k/(k+1)+eps)n = {hypothesis:.2f}"
        )
    size = params.reservoir_target(n)
    if size < 1:
        raise ReservoirError(f"degenerate reservoir: target size {size} < 1")
    if size > n:
        raise ReservoirError(f"reservoir size {size} exceeds n={n}")
    rng = philox_generator(seed if seed is not None else subseed(params.seed, "reservoir"))
    frac = params.reservoir_degree_fraction()
    for _ in range(params.retries.reservoir):
        members = tuple(sorted(rng.choice(n, size=size, replace=False).tolist()))
        mask = 0
        for v in members:
            mask |= 1 << v
        if reservoir_degree_ok(G, mask, size, frac):
            return Reservoir(members=members, mask=mask)
    raise ReservoirError(
        f"no reservoir of size {size} passed the degree condition in "
        f"{params.retries.reservoir} samples (n too small for gamma, eps?)"
    )


# ---------------------------------------------------------------------------
# Connectors
# ---------------------------------------------------------------------------


def connect(
    H: AugmentedGraph,
    K: Sequence[int],
    Kp: Sequence[int],
    Z: Iterable[int],
    params: PipelineParams,
    budget: SearchBudget | None = None,
) -> PowerSeq:
    """Connect two disjoint ordered (k+1)-cliques by a (k+1)-path with
    exactly (k+1)*2^(k+1) internal vertices avoiding Z.

    The asymptotic statement also asks |Z| <= eps*n/2; at desk scale the
    avoidance sets are far larger, so that cap is not enforced here.
    """
    result = find_power_path(
        H.graph,
        params.k + 1,
        tuple(K),
        tuple(Kp),
        avoid=Z,
        internal_count=params.internal_count,
        budget=budget or params.budget(),
    )
    if not result.found:
        raise ConnectError(f"connector search ended with {result.status}")
    return result.seq


def connect_through_reservoir(
    H: AugmentedGraph,
    K: Sequence[int],
    Kp: Sequence[int],
    res: Reservoir,
    params: PipelineParams,
    budget: SearchBudget | None = None,
) -> PowerSeq:
    """As ``connect`` but drawing all internal vertices from the unused part
    of the reservoir, which they are then marked as consuming."""
    inner = params.internal_count
    cap = params.used_cap(res.size)
    if res.used_count > cap:
        raise ReservoirExhaustedError(
            f"used set {res.used_count} already exceeds cap {cap}"
        )
    if res.size - res.used_count < inner:
        raise ReservoirExhaustedError(
            f"only {res.size - res.used_count} free reservoir vertices, need {inner}"
        )
    full = (1 << H.n) - 1
    free = res.free_mask()
    avoid = set(_bits(full & ~free)) - set(K) - set(Kp)
    seq = connect(H, K, Kp, avoid, params, budget)
    r = params.k + 1
    internals = seq.vertices[r:-r]
    assert all((free >> v) & 1 for v in internals)
    res.used.update(internals)
    return seq


# ---------------------------------------------------------------------------
# Diagnostic walk counting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KWalkCount:
    supported: bool
    k: int
    ell: int
    count: int | None = None
    rho_hat: float | None = None
    exact: bool = False
    samples: tuple[tuple[int, ...], ...] = ()
    reason: str = ""


def enumerate_kwalks(
    G: Graph,
    k: int,
    K: Sequence[int],
    Kp: Sequence[int],
    *,
    work_cap: int = 50_000_000,
    max_samples: int = 0,
) -> KWalkCount:
    """Count k-walks connecting the ordered k-cliques K and K' that use
    exactly (k+1)*(2^(k+1)-2) internal vertices (with multiplicity).

    Exact dynamic programming over the last-k-vertices state; the walk
    condition is that every new vertex is adjacent to the k preceding
    ones.  When the n^k state space exceeds the work cap the table is
    truncated to the heaviest states per level, which turns the count
    into a certified lower bound (``exact=False``, no density estimate).
    k >= 3 is unsupported: the walk length alone reaches 56 internals.
    """
    if k < 1:
        raise ValueError("walk connection diagnostics need k >= 1")
    ell = (k + 1) * (2 ** (k + 1) - 2)
    if k > 2:
        return KWalkCount(False, k, ell, reason=f"state space infeasible for k={k}")
    K = tuple(K)
    Kp = tuple(Kp)
    if len(K) != k or len(Kp) != k:
        raise ValueError(f"end cliques must have k={k} vertices")
    if set(K) & set(Kp):
        raise ValueError("end cliques must be disjoint")
    if not is_clique(G, K) or not is_clique(G, Kp):
        raise ValueError("end tuples must be cliques")
    n = G.n
    total_steps = ell + k  # internals, then the forced suffix Kp
    state_cap = None
    if n > 0 and n**k * (ell + k) * 8 > work_cap:
        state_cap = max(64, work_cap // ((ell + k) * 8 * n))

    rows = G.rows

    def successors(state: tuple[int, ...]) -> int:
        mask = (1 << n) - 1
        for v in state:
            mask &= rows[v]
        return mask

    forward: list[dict[tuple[int, ...], int]] = [{K: 1}]
    for step in range(total_steps):
        cur = forward[-1]
        nxt: dict[tuple[int, ...], int] = {}
        forced = Kp[step - ell] if step >= ell else None
        for state, cnt in cur.items():
            mask = successors(state)
            if forced is not None:
                if (mask >> forced) & 1:
                    key = state[1:] + (forced,)
                    nxt[key] = nxt.get(key, 0) + cnt
            else:
                for u in _bits(mask):
                    key = state[1:] + (u,)
                    nxt[key] = nxt.get(key, 0) + cnt
        if state_cap is not None and len(nxt) > state_cap:
            # dropping states only loses walks, never invents them
            keep = sorted(nxt.items(), key=lambda kv: (-kv[1], kv[0]))[:state_cap]
            nxt = dict(keep)
        forward.append(nxt)

    count = sum(forward[-1].values())
    exact = state_cap is None
    rho_hat = (count / float(n) ** ell) if (exact and n > 0) else None

    samples: list[tuple[int, ...]] = []
    if max_samples > 0 and count > 0:
        backward: list[dict[tuple[int, ...], int]] = [
            {s: 1 for s in forward[total_steps]}
        ]
        for step in range(total_steps - 1, -1, -1):
            nxt = backward[0]
            cur: dict[tuple[int, ...], int] = {}
            forced = Kp[step - ell] if step >= ell else None
            for state in forward[step]:
                mask = successors(state)
                ways = 0
                if forced is not None:
                    if (mask >> forced) & 1:
                        ways = nxt.get(state[1:] + (forced,), 0)
                else:
                    for u in _bits(mask):
                        ways += nxt.get(state[1:] + (u,), 0)
                if ways:
                    cur[state] = ways
            backward.insert(0, cur)
        assert backward[0].get(K, 0) == count

        walk = list(K)

        def emit(step: int, state: tuple[int, ...]) -> bool:
            if len(samples) >= max_samples:
                return True
            if step == total_steps:
                samples.append(tuple(walk))
                return len(samples) >= max_samples
            mask = successors(state)
            choices = (
                [Kp[step - ell]]
                if step >= ell
                else list(_bits(mask))
            )
            for u in choices:
                if step >= ell and not (mask >> u) & 1:
                    continue
                nstate = state[1:] + (u,)
                if backward[step + 1].get(nstate, 0) == 0:
                    continue
                walk.append(u)
                if emit(step + 1, nstate):
                    return True
                walk.pop()
            return False

        emit(0, K)

    return KWalkCount(True, k, ell, count, rho_hat, exact, tuple(samples))


# ---------------------------------------------------------------------------
# Absorbers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Absorber:
    """Ordered (2k+2)-tuple spanning the gadget in the deterministic part
    outside the reservoir, with its middle edge in the random part."""

    vertices: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.vertices) // 2 - 1

    @property
    def middle(self) -> tuple[int, int]:
        k = self.k
        return (self.vertices[k], self.vertices[k + 1])


def is_absorber(H: AugmentedGraph, vertices: Sequence[int], R: Iterable[int] = ()) -> bool:
    """Validate the absorber conditions for an ordered tuple."""
    vs = tuple(vertices)
    if len(vs) < 2 or len(vs) % 2 != 0:
        return False
    k = len(vs) // 2 - 1
    if len(set(vs)) != len(vs):
        return False
    r_set = set(R)
    if r_set & set(vs):
        return False
    for i in range(len(vs)):
        for j in range(i + 1, min(i + k + 1, len(vs) - 1) + 1):
            if (i, j) == (k, k + 1):
                continue
            if not H.det.adjacent(vs[i], vs[j]):
                return False
    return H.is_random_edge(vs[k], vs[k + 1])


def serves_mask(graph: Graph, absorber: Absorber) -> int:
    """Bitmask of the vertices x that this absorber can absorb: x must be
    a common neighbour of the whole tuple.

    Insertion validity only needs the edges (x, v_i) to exist in the graph
    the certificate is verified against, so the family selection evaluates
    this against the union graph; every extra absorber gained over the
    deterministic-only reading is still sound.
    """
    return joint_neighborhood_mask(graph, absorber.vertices)


def _completion_count(G: Graph, jmask: int, k: int) -> int:
    """Number of ways to fill the free absorber positions given the common
    neighbourhood of a fixed middle edge.

    k=0 has no free positions; k=1 needs an ordered pair of distinct
    vertices from the common neighbourhood; k=2 needs an ordered 4-vertex
    path inside it (counted by an exact degree/codegree formula rather
    than brute enumeration).
    """
    if k == 0:
        return 1
    j = jmask.bit_count()
    if k == 1:
        return j * (j - 1)
    total = 0
    for a in _bits(jmask):
        na = G.rows[a] & jmask
        da = na.bit_count()
        if da == 0:
            continue
        for b in _bits(na):
            nb = G.rows[b] & jmask
            db = nb.bit_count()
            common = (na & nb).bit_count()
            total += (da - 1) * (db - 1) - common
    return total


def _completion_by_index(G: Graph, jmask: int, k: int, index: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Decode the index-th completion into (prefix, suffix) free vertices."""
    if k == 0:
        return (), ()
    js = list(_bits(jmask))
    j = len(js)
    if k == 1:
        a, rem = divmod(index, j - 1)
        b = rem if rem < a else rem + 1
        return (js[a],), (js[b],)
    # k == 2: completions are ordered paths (f1, f2, f5, f6) with
    # f2 adjacent f5; walk the same order as _completion_count
    for a in js:
        na = G.rows[a] & jmask
        da = na.bit_count()
        if da == 0:
            continue
        for b in _bits(na):
            nb = G.rows[b] & jmask
            db = nb.bit_count()
            common = (na & nb).bit_count()
            block = (da - 1) * (db - 1) - common
            if index >= block:
                index -= block
                continue
            for f1 in _bits(na & ~(1 << b)):
                opts = nb & ~(1 << a) & ~(1 << f1)
                cnt = opts.bit_count()
                if index >= cnt:
                    index -= cnt
                    continue
                f6 = list(_bits(opts))[index]
                return (f1, a), (b, f6)
    raise IndexError("completion index out of range")


@dataclass(frozen=True)
class AbsorberGraph:
    """Auxiliary pair graph of a vertex x: the pairs (v, v') that carry at
    least ``threshold`` injective embeddings of the absorber gadget into
    the deterministic neighbourhood of x with v, v' in the middle
    positions.  A random edge landing on such a pair completes an
    x-absorber."""

    x: int
    pairs: frozenset[tuple[int, int]]
    threshold: float
    support: dict

    def __len__(self) -> int:
        return len(self.pairs)


def build_absorber_graph(
    H: AugmentedGraph,
    x: int,
    R: Iterable[int] = (),
    params: PipelineParams | None = None,
    *,
    k: int | None = None,
    beta: float | None = None,
) -> AbsorberGraph:
    """Build the pair graph of x from the deterministic part alone.

    The support of a pair (u, v) is the exact number of injective gadget
    embeddings into G[N(x)] with u, v in the two middle positions (for
    k=0 every pair of distinct neighbours has support 1).  Pairs touching
    R are dropped, so the result is already the R-punctured pair graph
    that the random-part property check consumes; the support counting
    itself is unrestricted, as the pair graph depends only on G.
    """
    if params is not None:
        k = params.k
        beta = params.beta
    if k is None or beta is None:
        raise ValueError("need params or explicit k and beta")
    if k > 2:
        raise ValueError("gadget support counting is desk-scale only (k <= 2)")
    G = H.det
    n = H.n
    threshold = beta * n ** (2 * k)
    r_mask = 0
    for v in R:
        r_mask |= 1 << v
    nx_mask = G.rows[x] & ~r_mask
    support: dict[tuple[int, int], int] = {}
    pairs: set[tuple[int, int]] = set()
    neighbors = list(_bits(nx_mask))
    for i, u in enumerate(neighbors):
        for v in neighbors[i + 1 :]:
            jm = G.rows[x] & G.rows[u] & G.rows[v] & ~(1 << u) & ~(1 << v)
            cnt = _completion_count(G, jm, k)
            if cnt >= threshold:
                pairs.add((u, v))
                support[(u, v)] = cnt
    return AbsorberGraph(x=x, pairs=frozenset(pairs), threshold=threshold, support=support)


def prune_family(chosen: Sequence[Absorber], mode: str = "pair") -> list[Absorber]:
    """Overlap-prune a selected absorber list.

    "pair" deletes every absorber belonging to an overlapping pair, so a
    vertex-disjoint input passes through unchanged; "greedy" additionally
    re-admits deleted absorbers that still fit disjointly (in selection
    order), trading the symmetric rule for yield at desk scale.  Either
    way the result is pairwise vertex-disjoint.
    """
    owner: dict[int, list[int]] = {}
    for i, a in enumerate(chosen):
        for v in a.vertices:
            owner.setdefault(v, []).append(i)
    overlapping = {i for ids in owner.values() if len(ids) > 1 for i in ids}
    kept = [a for i, a in enumerate(chosen) if i not in overlapping]
    if mode == "greedy":
        used = 0
        for a in kept:
            for v in a.vertices:
                used |= 1 << v
        for i in sorted(overlapping):
            amask = 0
            for v in chosen[i].vertices:
                amask |= 1 << v
            if not amask & used:
                kept.append(chosen[i])
                used |= amask
    return kept


@dataclass(frozen=True)
class AbsorberFamily:
    absorbers: tuple[Absorber, ...]
    serves: tuple[int, ...]  # per-absorber bitmask of absorbable vertices
    per_x_counts: tuple[int, ...]
    q: float
    attempts: int
    total_candidates: int

    def __len__(self) -> int:
        return len(self.absorbers)

    @property
    def min_per_x(self) -> int:
        return min(self.per_x_counts) if self.per_x_counts else 0


def select_absorber_family(
    H: AugmentedGraph,
    R: Iterable[int],
    params: PipelineParams,
    *,
    seed: int | None = None,
) -> AbsorberFamily:
    """Random q-selection of absorbers followed by overlap pruning.

    Selection is an exact binomial thinning: absorbers are grouped by
    their ordered middle edge, the group sizes are counted in closed form,
    and per group a Binomial(count, q) number of completions is drawn
    uniformly without materialising the Theta(n^(2k+1)) candidate list.
    Both orders of every random edge are groups, matching the ordered
    tuple count.  Retries with fresh randomness until the family size and
    the per-vertex absorber floor are met.
    """
    n = H.n
    k = params.k
    G = H.det
    r_mask = 0
    for v in R:
        r_mask |= 1 << v

    middles: list[tuple[int, int]] = []
    for u, v in H.rnd.graph.edges():
        if (r_mask >> u) & 1 or (r_mask >> v) & 1:
            continue
        middles.append((u, v))
        middles.append((v, u))
    jmasks: list[int] = []
    counts: list[int] = []
    for u, v in middles:
        jm = G.rows[u] & G.rows[v] & ~r_mask & ~(1 << u) & ~(1 << v)
        jmasks.append(jm)
        counts.append(_completion_count(G, jm, k))
    total = sum(counts)
    q = params.q_value(n, total)

    base = seed if seed is not None else subseed(params.seed, "family")
    shortfall = ""
    for attempt in range(params.retries.family):
        rng = philox_generator(subseed(base, attempt))
        chosen: list[Absorber] = []
        if total > 0 and q > 0:
            draws = rng.binomial(counts, q) if counts else []
            for i, take in enumerate(draws):
                if take == 0:
                    continue
                u, v = middles[i]
                c = counts[i]
                idxs = sorted(rng.choice(c, size=min(int(take), c), replace=False).tolist())
                for idx in idxs:
                    prefix, suffix = _completion_by_index(G, jmasks[i], k, idx)
                    tup = prefix + (u, v) + suffix
                    if len(set(tup)) == len(tup):
                        chosen.append(Absorber(tup))

        kept = prune_family(chosen, params.prune)
        if params.family_max is not None and len(kept) > params.family_max:
            kept = kept[: params.family_max]

        masks = tuple(serves_mask(H.graph, a) for a in kept)
        per_x = tuple(
            sum((mk >> x) & 1 for mk in masks) for x in range(n)
        )
        for a in kept:
            assert is_absorber(H, a.vertices, R)
        if len(kept) >= params.family_min and (
            not per_x or min(per_x) >= params.per_x_floor
        ):
            return AbsorberFamily(
                absorbers=tuple(kept),
                serves=masks,
                per_x_counts=per_x,
                q=q,
                attempts=attempt + 1,
                total_candidates=total,
            )
        worst = min(range(n), key=lambda x: per_x[x]) if per_x else -1
        shortfall = (
            f"size {len(kept)} (need >= {params.family_min}), "
            f"min per-x count {min(per_x) if per_x else 0} at x={worst} "
            f"(floor {params.per_x_floor})"
        )
    raise AbsorberShortfallError(
        f"absorber selection failed after {params.retries.family} attempts: {shortfall}"
    )


# ---------------------------------------------------------------------------
# Absorbing path
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AbsorbingPath:
    path: PowerSeq
    placements: tuple[int, ...]  # offset of each absorber inside the path
    family: AbsorberFamily

    @property
    def k(self) -> int:
        return self.path.power - 1


def build_absorbing_path(
    H: AugmentedGraph,
    R: Iterable[int],
    family: AbsorberFamily,
    params: PipelineParams,
) -> AbsorbingPath:
    """Connect the absorber family, in index order, into one (k+1)-path in
    H - R.  Every connector avoids the reservoir, all other family members
    and the path built so far."""
    if not family.absorbers:
        raise AbsorberShortfallError("cannot build an absorbing path from an empty family")
    k = params.k
    r = k + 1
    family_vertices = {v for a in family.absorbers for v in a.vertices}
    r_set = set(R)

    seq: list[int] = list(family.absorbers[0].vertices)
    placements = [0]
    for nxt in family.absorbers[1:]:
        K = tuple(seq[-r:])
        Kp = nxt.vertices[:r]
        Z = (r_set | family_vertices | set(seq)) - set(K) - set(Kp)
        conn = connect(H, K, Kp, Z, params)
        internals = conn.vertices[r:-r]
        seq.extend(internals)
        placements.append(len(seq))
        seq.extend(nxt.vertices)

    cap = params.path_cap_value(H.n)
    if len(seq) > cap:
        raise PipelineError(
            f"absorbing path has {len(seq)} vertices, cap is {cap}; "
            "shrink the family or raise the cap"
        )
    path = PowerSeq(tuple(seq), r, "path")
    assert is_power_seq(H.graph, path.vertices, r, "path")
    return AbsorbingPath(path=path, placements=tuple(placements), family=family)


def absorb(H: AugmentedGraph, A: AbsorbingPath, U: Iterable[int]) -> PowerSeq:
    """Insert every vertex of U into a distinct absorber of A, preserving
    the end-sets.

    Vertex x goes into the middle of an absorber all of whose vertices are
    deterministic neighbours of x; the gap left by the deleted middle edge
    widens to distance two, which is exactly what the insertion needs.
    A maximum bipartite matching between U and the available absorbers
    picks the assignment; failure names the vertex that cannot be placed.
    """
    targets = sorted(set(U))
    if not targets:
        return A.path
    k = A.k
    r = k + 1
    in_path = set(A.path.vertices)
    clash = [x for x in targets if x in in_path]
    if clash:
        raise AbsorptionError(f"vertices {clash} already lie on the absorbing path")

    options = [
        [i for i, mk in enumerate(A.family.serves) if (mk >> x) & 1]
        for x in targets
    ]
    match_of_absorber: dict[int, int] = {}

    def try_assign(xi: int, visited: set[int]) -> bool:
        for i in options[xi]:
            if i in visited:
                continue
            visited.add(i)
            if i not in match_of_absorber or try_assign(match_of_absorber[i], visited):
                match_of_absorber[i] = xi
                return True
        return False

    for xi, x in enumerate(targets):
        if not try_assign(xi, set()):
            raise AbsorptionError(f"no free absorber for vertex {x}")

    seq = list(A.path.vertices)
    assignment = sorted(
        ((A.placements[i], targets[xi]) for i, xi in match_of_absorber.items()),
        reverse=True,
    )
    for offset, x in assignment:
        seq.insert(offset + r, x)

    out = PowerSeq(tuple(seq), r, "path")
    assert is_power_seq(H.graph, out.vertices, r, "path")
    assert out.head == A.path.head and out.tail == A.path.tail
    return out


# ---------------------------------------------------------------------------
# Covering
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoverFamily:
    paths: tuple[PowerSeq, ...]
    leftover: tuple[int, ...]
    tiles: int
    fallback: int


def _find_tile(
    det: Graph, pool_mask: int, k: int, m: int, order: Sequence[int], node_cap: int = 4000
) -> tuple[tuple[int, ...], ...] | None:
    """Greedy backtracking search for a blow-up tile inside the pool:
    k+2 classes of m vertices with all deterministic cross-class edges
    except between classes 0 and 1."""
    classes = k + 2
    slots = classes * m
    rank = {v: i for i, v in enumerate(order)}
    chosen: list[int] = []
    nodes = 0

    def constraint_mask(ci: int) -> int:
        mask = pool_mask
        for j, v in enumerate(chosen):
            cj = j // m
            if cj == ci or {cj, ci} == {0, 1}:
                continue
            mask &= det.rows[v]
        for v in chosen:
            mask &= ~(1 << v)
        return mask

    def fill(slot: int) -> bool:
        nonlocal nodes
        if slot == slots:
            return True
        ci = slot // m
        within = slot % m
        mask = constraint_mask(ci)
        if within:
            # class members ascend, killing the permutation symmetry; the
            # seeded rank only steers the first pick of each class
            mask &= ~((1 << (chosen[-1] + 1)) - 1)
            cands = list(_bits(mask))
        else:
            cands = sorted(_bits(mask), key=lambda v: rank.get(v, v))
        if len(cands) < m - within:
            return False
        for v in cands:
            nodes += 1
            if nodes > node_cap:
                return False
            chosen.append(v)
            if fill(slot + 1):
                return True
            chosen.pop()
        return False

    if fill(0):
        return tuple(
            tuple(chosen[c * m : (c + 1) * m]) for c in range(classes)
        )
    return None


def _alternating_random_path(
    rnd: Graph, y1: Sequence[int], y2: Sequence[int], node_cap: int = 20000
) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
    """Order the two classes as a1..am / b1..bm so that a1 b1 a2 b2 ... is a
    path in the random part.  Returns the reordered classes, or None."""
    m = len(y1)
    seq: list[int] = []
    used: set[int] = set()
    nodes = 0

    def extend() -> bool:
        nonlocal nodes
        if len(seq) == 2 * m:
            return True
        side = y1 if len(seq) % 2 == 0 else y2
        for v in side:
            if v in used:
                continue
            if seq and not rnd.adjacent(seq[-1], v):
                continue
            nodes += 1
            if nodes > node_cap:
                return False
            seq.append(v)
            used.add(v)
            if extend():
                return True
            seq.pop()
            used.remove(v)
        return False

    if not extend():
        return None
    return tuple(seq[0::2]), tuple(seq[1::2])


def _tile_to_path(
    H: AugmentedGraph, classes: Sequence[Sequence[int]], k: int
) -> PowerSeq | None:
    """Turn a blow-up tile into a spanning (k+1)-path, using an alternating
    random-edge path on classes 0 and 1 and interleaving the rest:
    block j is (a_j, c2_j, ..., c_{k+1}_j, b_j)."""
    ordered = _alternating_random_path(H.rnd.graph, classes[0], classes[1])
    if ordered is None:
        return None
    ys1, ys2 = ordered
    m = len(ys1)
    seq: list[int] = []
    for j in range(m):
        seq.append(ys1[j])
        for c in range(2, k + 2):
            seq.append(classes[c][j])
        seq.append(ys2[j])
    path = PowerSeq(tuple(seq), k + 1, "path")
    if not is_power_seq(H.graph, path.vertices, k + 1, "path"):
        return None
    return path


def _greedy_power_path(Hg: Graph, start: Sequence[int], pool_mask: int, r: int) -> list[int]:
    """Extend a clique greedily in both directions inside the pool, always
    taking the candidate with the fewest remaining options."""
    seq = list(start)
    used = 0
    for v in seq:
        used |= 1 << v

    def grow() -> None:
        nonlocal used
        while True:
            mask = pool_mask & ~used
            for v in seq[-min(len(seq), r) :]:
                mask &= Hg.rows[v]
            if not mask:
                return
            best = min(_bits(mask), key=lambda v: ((Hg.rows[v] & pool_mask & ~used).bit_count(), v))
            seq.append(best)
            used |= 1 << best

    grow()
    seq.reverse()
    grow()
    return seq


def _insertion_repair(Hg: Graph, paths: list[list[int]], stray: list[int], r: int) -> list[int]:
    """Try to place stray vertices inside existing paths: x can be inserted
    at a cut if it is adjacent to the r vertices on each side (stretching
    the cut only relaxes the remaining window constraints)."""
    remaining: list[int] = []
    for x in sorted(stray):
        placed = False
        row = Hg.rows[x]
        for path in paths:
            for cut in range(r, len(path) - r + 1):
                window = path[cut - r : cut + r]
                if all((row >> v) & 1 for v in window):
                    path.insert(cut, x)
                    placed = True
                    break
            if placed:
                break
        if not placed:
            remaining.append(x)
    return remaining


def cover(
    H: AugmentedGraph,
    Q: Iterable[int],
    params: PipelineParams,
    *,
    seed: int | None = None,
) -> CoverFamily:
    """Cover most of H - Q by vertex-disjoint (k+1)-paths.

    Strategy: (a) pack blow-up tiles of the clique-minus-an-edge in the
    deterministic part, (b) convert each tile into a spanning (k+1)-path
    via an alternating path of random edges between its two special
    classes, (c) cover what is left by greedy path extension plus
    single-vertex insertion repair.  Raises when the leftover exceeds the
    configured cap.
    """
    n = H.n
    k = params.k
    r = k + 1
    m = params.m
    full = (1 << n) - 1
    pool = full
    for v in Q:
        pool &= ~(1 << v)
    rng = philox_generator(seed if seed is not None else subseed(params.seed, "cover"))

    paths: list[PowerSeq] = []
    tiles = 0
    tile_size = (k + 2) * m
    failures = 0
    while pool.bit_count() >= tile_size and failures < 4:
        order = [v for v in map(int, rng.permutation(n)) if (pool >> v) & 1]
        tile = _find_tile(H.det, pool, k, m, order)
        if tile is None:
            break
        path = _tile_to_path(H, tile, k)
        if path is None:
            failures += 1
            continue
        paths.append(path)
        tiles += 1
        failures = 0
        for v in path.vertices:
            pool &= ~(1 << v)

    fallback_lists: list[list[int]] = []
    while True:
        clique = first_clique_in_mask(H.graph, r, pool)
        if clique is None:
            break
        seq = _greedy_power_path(H.graph, clique, pool, r)
        if len(seq) < 2 * r:
            break
        fallback_lists.append(seq)
        for v in seq:
            pool &= ~(1 << v)

    stray = list(_bits(pool))
    stray = _insertion_repair(H.graph, fallback_lists, stray, r)
    pool = 0
    for v in stray:
        pool |= 1 << v

    fallback = len(fallback_lists)
    for seq in fallback_lists:
        path = PowerSeq(tuple(seq), r, "path")
        assert is_power_seq(H.graph, path.vertices, r, "path")
        paths.append(path)

    leftover = tuple(_bits(pool))
    cap = params.leftover_cap_value(n)
    if len(leftover) > cap:
        raise CoverShortfallError(
            f"cover left {len(leftover)} vertices uncovered (cap {cap})"
        )
    return CoverFamily(tuple(paths), leftover, tiles, fallback)


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AssembleAudit:
    """Everything a test needs to re-check the structural invariants of a
    successful run."""

    reservoir: tuple[int, ...]
    reservoir_used: tuple[int, ...]
    family: tuple[tuple[int, ...], ...]
    per_x_counts: tuple[int, ...]
    absorbing_path: tuple[int, ...]
    placements: tuple[int, ...]
    cover_paths: tuple[tuple[int, ...], ...]
    connectors: tuple[tuple[int, ...], ...]
    absorbed: tuple[int, ...]
    leftover: tuple[int, ...]
    splits: int
    tiles: int


@dataclass(frozen=True)
class AssembleResult:
    status: str  # "success" | "stage_failure"
    certificate: Optional[CycleCertificate]
    stage: Optional[str]
    detail: str
    attempts: int
    stage_retries: dict
    audit: Optional[AssembleAudit]
    trace: tuple[dict, ...]
    timings: dict

    @property
    def success(self) -> bool:
        return self.status == "success"


def _split_for_reservoir(paths: list[PowerSeq], target_segments: int, r: int) -> int:
    """Split cover paths until the ring has target_segments pieces (the
    absorbing path counts as one), so the stitching consumes the reservoir
    in full internal-count chunks.  Pieces keep >= 2r vertices so their two
    end-sets stay disjoint.  Returns the number of splits performed."""
    splits = 0
    while len(paths) + 1 < target_segments:
        idx = max(range(len(paths)), key=lambda i: len(paths[i].vertices), default=None)
        if idx is None or len(paths[idx].vertices) < 4 * r:
            break
        vs = paths[idx].vertices
        cut = max(2 * r, min(len(vs) - 2 * r, len(vs) // 2))
        paths[idx : idx + 1] = [
            PowerSeq(vs[:cut], r, "path"),
            PowerSeq(vs[cut:], r, "path"),
        ]
        splits += 1
    return splits


def assemble(
    H: AugmentedGraph, params: PipelineParams, *, collect_trace: bool = False
) -> AssembleResult:
    """Run the full pipeline and return a verified certificate or the
    failing stage.  Each attempt reruns every randomised stage with fresh
    sub-seeds derived from (params.seed, attempt)."""
    n = H.n
    k = params.k
    r = k + 1
    inner = params.internal_count
    hypothesis = (k / (k + 1) + params.eps) * n
    if min_degree(H.det) + 1e-9 < hypothesis:
        raise PreconditionError(
            f"deterministic part has min degree {min_degree(H.det)} < "
            f"{hypothesis:.2f}"
        )

    trace: list[dict] = []
    timings: dict[str, float] = {}

    def tick(stage: str, t0: float, **info) -> None:
        dt = time.perf_counter() - t0
        timings[stage] = timings.get(stage, 0.0) + dt
        if collect_trace:
            trace.append({"stage": stage, "ms": round(dt * 1000, 3), **info})

    last_stage = "reservoir"
    last_detail = ""
    for attempt in range(params.retries.assemble):
        stage = "reservoir"
        try:
            t0 = time.perf_counter()
            res = build_reservoir(
                H.det, params, seed=subseed(params.seed, "reservoir", attempt)
            )
            tick("reservoir", t0, attempt=attempt, size=res.size)

            stage = "family"
            t0 = time.perf_counter()
            family = select_absorber_family(
                H, res.members, params, seed=subseed(params.seed, "family", attempt)
            )
            tick("family", t0, attempt=attempt, size=len(family), q=family.q)

            stage = "absorbing-path"
            t0 = time.perf_counter()
            A = build_absorbing_path(H, res.members, family, params)
            tick("absorbing-path", t0, attempt=attempt, vertices=len(A.path))

            stage = "cover"
            t0 = time.perf_counter()
            Q = set(res.members) | set(A.path.vertices)
            cov = None
            cover_error: CoverShortfallError | None = None
            for c_try in range(params.retries.cover):
                try:
                    cov = cover(
                        H, Q, params, seed=subseed(params.seed, "cover", attempt, c_try)
                    )
                    break
                except CoverShortfallError as exc:
                    cover_error = exc
            if cov is None:
                raise cover_error or CoverShortfallError("cover never attempted")
            tick(
                "cover",
                t0,
                attempt=attempt,
                paths=len(cov.paths),
                leftover=len(cov.leftover),
                tiles=cov.tiles,
            )

            stage = "stitch"
            t0 = time.perf_counter()
            paths = list(cov.paths)
            target_segments = res.size // inner
            if target_segments < 1:
                raise ReservoirExhaustedError(
                    f"reservoir of {res.size} cannot host a single {inner}-internal stitch"
                )
            if len(paths) + 1 > target_segments:
                raise ReservoirExhaustedError(
                    f"{len(paths)} cover paths need {len(paths) + 1} stitches, "
                    f"reservoir affords {target_segments}"
                )
            splits = _split_for_reservoir(paths, target_segments, r)

            segments: list[PowerSeq] = [A.path] + paths
            cyc: list[int] = list(A.path.vertices)
            connectors: list[tuple[int, ...]] = []
            for i, cur in enumerate(segments):
                nxt = segments[(i + 1) % len(segments)]
                conn = connect_through_reservoir(H, cur.tail, nxt.head, res, params)
                connectors.append(conn.vertices)
                internals = conn.vertices[r:-r]
                if i < len(segments) - 1:
                    cyc.extend(internals)
                    cyc.extend(nxt.vertices)
                else:
                    cyc.extend(internals)
            assert res.used_count == inner * len(segments)
            tick("stitch", t0, attempt=attempt, stitches=len(segments), splits=splits)

            stage = "absorb"
            t0 = time.perf_counter()
            U = sorted(set(range(n)) - set(cyc))
            if len(U) > params.absorb_cap_value(n):
                raise AbsorptionError(
                    f"{len(U)} leftover vertices exceed the absorb cap "
                    f"{params.absorb_cap_value(n)}"
                )
            newA = absorb(H, A, U)
            cyc_final = list(newA.vertices) + cyc[len(A.path) :]
            tick("absorb", t0, attempt=attempt, absorbed=len(U))

            stage = "verify"
            t0 = time.perf_counter()
            cert = CycleCertificate(tuple(cyc_final), r)
            if not verify_certificate(H.graph, cert):
                raise PipelineError("assembled certificate failed re-verification")
            tick("verify", t0, attempt=attempt)

            audit = AssembleAudit(
                reservoir=res.members,
                reservoir_used=tuple(sorted(res.used)),
                family=tuple(a.vertices for a in family.absorbers),
                per_x_counts=family.per_x_counts,
                absorbing_path=A.path.vertices,
                placements=A.placements,
                cover_paths=tuple(p.vertices for p in paths),
                connectors=tuple(connectors),
                absorbed=tuple(U),
                leftover=cov.leftover,
                splits=splits,
                tiles=cov.tiles,
            )
            return AssembleResult(
                status="success",
                certificate=cert,
                stage=None,
                detail="",
                attempts=attempt + 1,
                stage_retries={
                    "assemble": attempt + 1,
                    "family": family.attempts,
                    "cover": c_try + 1,
                },
                audit=audit,
                trace=tuple(trace),
                timings=timings,
            )
        except PipelineError as exc:
            last_stage = stage
            last_detail = str(exc)
            if collect_trace:
                trace.append({"stage": stage, "attempt": attempt, "error": last_detail})

    return AssembleResult(
        status="stage_failure",
        certificate=None,
        stage=last_stage,
        detail=last_detail,
        attempts=params.retries.assemble,
        stage_retries={"assemble": params.retries.assemble},
        audit=None,
        trace=tuple(trace),
        timings=timings,
    )
