import math

import pytest

from helpers import seeded_rng
from hplab.augment import (
    GENERATOR_VERSION,
    check_random_properties,
    graph_fingerprint,
    ordered_intersecting_pairs,
    sample_gnp,
    subseed,
    union,
)
from hplab.constructions import dense_host
from hplab.graphs import Graph, complete_graph


def test_gnp_extremes():
    assert sample_gnp(10, 0.0, 1).graph.num_edges == 0
    assert sample_gnp(10, 1.0, 1).graph.num_edges == 45


def test_gnp_reproducible_and_coupled():
    a = sample_gnp(40, 0.3, 9)
    b = sample_gnp(40, 0.3, 9)
    assert a.graph == b.graph
    assert a.generator == GENERATOR_VERSION
    # same seed at higher p only adds edges
    c = sample_gnp(40, 0.6, 9)
    assert set(a.graph.edges()) <= set(c.graph.edges())


def test_gnp_mean_edge_count():
    n, p, samples = 100, 0.1, 10_000
    total = 0
    for i in range(samples):
        total += sample_gnp(n, p, subseed(123, i)).graph.num_edges
    pairs = n * (n - 1) // 2
    mean = total / samples
    sigma_mean = math.sqrt(pairs * p * (1 - p) / samples)
    assert abs(mean - pairs * p) <= 4 * sigma_mean


def test_union_membership_bookkeeping():
    det = complete_graph(6)
    rnd = sample_gnp(6, 0.5, 4)
    H = union(det, rnd)
    assert H.graph == det  # union with a subgraph of K6 is K6
    resampled = sample_gnp(6, 0.5, 4).graph
    for u in range(6):
        for v in range(u + 1, 6):
            assert H.is_random_edge(u, v) == resampled.adjacent(u, v)


def test_union_identities():
    G = dense_host(20, 0.5, 2)
    empty = sample_gnp(20, 0.0, 0)
    assert union(G, empty).graph == G
    R = sample_gnp(20, 0.4, 1)
    assert union(Graph(20), R).graph == R.graph
    H = union(G, R)
    assert H.graph.num_edges <= G.num_edges + R.graph.num_edges


def test_union_size_mismatch():
    with pytest.raises(ValueError):
        union(Graph(5), sample_gnp(6, 0.1, 0))


def test_ordered_intersecting_pairs_brute_force():
    rng = seeded_rng(77)
    for _ in range(20):
        n = 5 + int(rng.integers(0, 46))
        G = sample_gnp(n, 0.15, int(rng.integers(0, 2**31))).graph
        edges = list(G.edges())
        brute = 0
        for e in edges:
            for f in edges:
                if e != f and set(e) & set(f):
                    brute += 1
        assert ordered_intersecting_pairs(G) == brute


def test_check_random_properties_basic():
    n, C = 30, 5.0
    det = dense_host(n, 0.6, 1)
    rnd = sample_gnp(n, C / n, 2)
    H = union(det, rnd)
    report = check_random_properties(H, C, beta=0.001, gamma=0.3, bx_family={}, R=())
    assert report["edge-count"].observed == rnd.graph.num_edges
    assert report["intersecting-pairs"].bound == 2 * C * C * n

    empty = union(det, sample_gnp(n, 0.0, 3))
    rep2 = check_random_properties(empty, 0.0, 0.001, 0.3, {}, ())
    assert rep2["edge-count"].passed and rep2["edge-count"].observed == 0

    # a random part claiming p = C/n but actually complete busts the cap
    from hplab.augment import RandomPart
    from hplab.graphs import complete_graph

    lying = RandomPart(complete_graph(n), p=2.0 / n, seed=0)
    rep3 = check_random_properties(union(det, lying), 2.0, 0.001, 0.3, {}, ())
    assert not rep3["edge-count"].passed  # C(n,2) edges against a 2n cap


def test_check_random_properties_declared_p():
    det = dense_host(20, 0.6, 1)
    H = union(det, sample_gnp(20, 0.5, 2))
    with pytest.raises(ValueError):
        check_random_properties(H, 5.0, 0.01, 0.3, {}, ())  # 5/20 != 0.5


def test_edge_count_property_frequency():
    # at p = C/n the edge count concentrates well below C*n
    n, C = 200, 30.0
    hold = 0
    for i in range(100):
        part = sample_gnp(n, C / n, subseed(5, i))
        hold += part.graph.num_edges <= C * n
    assert hold >= 95


def test_subseed_stable_and_distinct():
    assert subseed(1, "a") == subseed(1, "a")
    assert subseed(1, "a") != subseed(1, "b")
    assert subseed(1, "a", 0) != subseed(1, "a", 1)
    assert 0 <= subseed(42, "x") < 2**64


def test_graph_fingerprint():
    a = dense_host(20, 0.5, 7)
    assert graph_fingerprint(a) == graph_fingerprint(dense_host(20, 0.5, 7))
    assert graph_fingerprint(a) != graph_fingerprint(dense_host(20, 0.5, 8))
