import math
from fractions import Fraction

import pytest

from hplab.constructions import (
    ExtremalSpec,
    InvalidSpecError,
    blowup_kminus,
    dense_host,
    extremal_graph,
    extremal_layout,
    pminus,
    pminus_coloring,
)
from hplab.graphs import complete_graph, min_degree, path_graph, power
from hplab.search import find_power_ham_cycle, max_disjoint_cliques


def test_extremal_spec_validation():
    with pytest.raises(InvalidSpecError):
        ExtremalSpec(1, 13, Fraction(1, 13))  # 2 does not divide 13
    with pytest.raises(InvalidSpecError):
        ExtremalSpec(1, 4, Fraction(9, 10))  # collar larger than part
    with pytest.raises(InvalidSpecError):
        ExtremalSpec(-1, 4, Fraction(1, 4))


def test_extremal_degrees_exact():
    for k, n, eps in [(0, 6, Fraction(1, 6)), (1, 12, Fraction(1, 12)), (2, 12, Fraction(1, 12))]:
        spec = ExtremalSpec(k, n, eps)
        G = extremal_graph(spec)
        parts, collars = extremal_layout(spec)
        s, w = spec.part_size, spec.w_size
        collar_set = {v for c in collars for v in c}
        for v in range(n):
            if v in collar_set:
                assert G.degree(v) == n - s + (s - w), (k, n, v)
            else:
                assert G.degree(v) == n - s + w, (k, n, v)


def test_extremal_min_degree_example():
    G = extremal_graph(ExtremalSpec(1, 12, Fraction(1, 12)))
    assert min_degree(G) == 7  # (1/2 + 1/12) * 12


def test_extremal_triangle_packing():
    G = extremal_graph(ExtremalSpec(1, 12, Fraction(1, 12)))
    result = max_disjoint_cliques(G, 3)
    assert result.exact and result.size == 2  # (k+1) * ceil(eps*n)


def test_extremal_k0_has_no_hamilton_cycle():
    G = extremal_graph(ExtremalSpec(0, 6, Fraction(1, 6)))
    assert find_power_ham_cycle(G, 1).status == "absent"


def test_pminus_small():
    P0 = pminus(0)
    assert (P0.n, P0.num_edges) == (2, 0)
    assert sorted(pminus(1).edges()) == [(0, 1), (0, 2), (1, 3), (2, 3)]


def test_pminus_edge_count_vs_power():
    # built directly from index arithmetic, so the power operator is an
    # independent cross-check
    for k in range(6):
        full = power(path_graph(2 * k + 2), k + 1)
        P = pminus(k)
        assert P.num_edges == full.num_edges - 1
        assert set(full.edges()) - set(P.edges()) == {(k, k + 1)}


def test_pminus_coloring_proper_and_closed_form():
    for k in range(6):
        colors = pminus_coloring(k)
        assert len(colors) == 2 * k + 2
        assert set(colors) <= set(range(k + 1))
        # closed form: identity up to k, then repeat k, then shifted identity
        for j, c in enumerate(colors):
            if j <= k:
                assert c == j
            elif j == k + 1:
                assert c == k
            else:
                assert c == j - k - 2
        G = pminus(k)
        for u, v in G.edges():
            assert colors[u] != colors[v], (k, u, v)


def test_blowup_small():
    B = blowup_kminus(0, 1)
    assert (B.n, B.num_edges) == (2, 0)
    B = blowup_kminus(1, 1)
    assert sorted(B.edges()) == [(0, 2), (1, 2)]  # path: triangle minus an edge
    assert blowup_kminus(1, 2).num_edges == 8


def test_blowup_edge_formula():
    for k in range(5):
        for m in range(1, 4):
            B = blowup_kminus(k, m)
            expected = (math.comb(k + 2, 2) - 1) * m * m
            assert B.num_edges == expected, (k, m)
            assert B.n == (k + 2) * m


def test_dense_host_degree_and_determinism():
    G = dense_host(60, 0.55, seed=1)
    assert min_degree(G) >= 33
    assert G == dense_host(60, 0.55, seed=1)
    assert G != dense_host(60, 0.55, seed=2)


def test_dense_host_forced_complete():
    n = 12
    G = dense_host(n, (n - 1) / n, seed=3)
    assert G == complete_graph(n)


def test_dense_host_infeasible():
    with pytest.raises(ValueError):
        dense_host(10, 0.999, seed=0)
