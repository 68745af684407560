import math
from itertools import combinations

import pytest

from hplab.bounds import (
    chernoff_hypergeometric,
    implied_augmentation_constant,
    janson_forest_bound,
    janson_forest_report,
    janson_generic_bound,
    janson_inputs_from_family,
    union_bound,
)


def test_forest_bound_values():
    assert janson_forest_bound(1, 1, 1, 1) == pytest.approx(0.5)
    assert janson_forest_bound(1, 0, 100, 1) == 1.0
    # extreme parameters underflow cleanly, never NaN
    assert janson_forest_bound(10, 1, 10_000, 5) == 0.0


def test_forest_bound_monotone():
    base = janson_forest_bound(0.5, 0.3, 10, 1.0)
    assert janson_forest_bound(0.6, 0.3, 10, 1.0) <= base
    assert janson_forest_bound(0.5, 0.4, 10, 1.0) <= base
    assert janson_forest_bound(0.5, 0.3, 11, 1.0) <= base
    assert janson_forest_bound(0.5, 0.3, 10, 1.5) <= base


def test_forest_report_fields():
    rep = janson_forest_report(0.5, 0.2, 10, 2.0)
    assert set(rep) == {"bound", "exponent", "variant", "implied_C"}
    assert rep["exponent"] == pytest.approx(-2.0 * 0.25 * 0.2 * 100)
    assert rep["implied_C"] == pytest.approx(2 / (2.0 * 0.25))


def test_generic_bound_values():
    assert janson_generic_bound(3, 0) == pytest.approx(math.exp(-3))
    assert janson_generic_bound(0, 0) == 1.0
    assert janson_generic_bound(0, 5) == 1.0  # clamped
    with pytest.raises(ValueError):
        janson_generic_bound(-1, 0)


def test_chernoff_values():
    assert chernoff_hypergeometric(200, 0.5) == pytest.approx(math.exp(-25))
    assert chernoff_hypergeometric(100, 1e-9) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        chernoff_hypergeometric(10, 1.5)


def test_union_bound():
    assert union_bound([0.1, 0.2]) == pytest.approx(0.3)
    assert union_bound([1.0, 1.0]) == 1.0
    assert union_bound([]) == 0.0
    with pytest.raises(ValueError):
        union_bound([1.5])


def test_implied_constant():
    assert implied_augmentation_constant(0.5, 1.0) == pytest.approx(8.0)


def exact_no_copy_probability(n: int, p: float, family) -> float:
    """Enumerate all graphs on n labelled vertices and add up the
    probability of those containing no member of the family."""
    pairs = list(combinations(range(n), 2))
    family_sets = [frozenset(tuple(sorted(e)) for e in copy) for copy in family]
    total = 0.0
    for mask in range(1 << len(pairs)):
        present = {pairs[i] for i in range(len(pairs)) if (mask >> i) & 1}
        if any(fs <= present for fs in family_sets):
            continue
        prob = 1.0
        for i in range(len(pairs)):
            prob *= p if (mask >> i) & 1 else (1 - p)
        total += prob
    return total


def edge_family(n):
    return [[e] for e in combinations(range(n), 2)]


def triangle_family(n):
    return [
        [(a, b), (a, c), (b, c)] for a, b, c in combinations(range(n), 3)
    ]


@pytest.mark.parametrize("p", [0.1, 0.3, 0.5])
@pytest.mark.parametrize("family_fn", [edge_family, triangle_family])
def test_generic_bound_dominates_exact(p, family_fn):
    n = 4
    family = family_fn(n)
    lam, delta_bar = janson_inputs_from_family(p, family)
    bound = janson_generic_bound(lam, delta_bar)
    exact = exact_no_copy_probability(n, p, family)
    assert bound >= exact - 1e-12


def test_janson_inputs_single_edges():
    lam, delta_bar = janson_inputs_from_family(0.3, edge_family(4))
    assert lam == pytest.approx(6 * 0.3)
    assert delta_bar == 0.0  # distinct single edges never share an edge


def test_janson_inputs_triangles():
    p = 0.5
    lam, delta_bar = janson_inputs_from_family(p, triangle_family(4))
    assert lam == pytest.approx(4 * p**3)
    # any two of the four triangles in K4 share exactly one edge
    assert delta_bar == pytest.approx(12 * p**5)


def test_chernoff_bound_vs_hypergeometric_simulation():
    # draw 10^5 hypergeometric samples (urn 1000, 500 marked, 100 drawn)
    # and compare the observed lower-tail frequency with the bound
    import numpy as np

    ngood, nbad, draws, samples = 500, 500, 100, 100_000
    rng = np.random.Generator(np.random.Philox(key=20240501))
    xs = rng.hypergeometric(ngood, nbad, draws, size=samples)
    mu = draws * ngood / (ngood + nbad)
    t = 0.3
    observed = float(np.mean(xs <= (1 - t) * mu))
    assert observed <= chernoff_hypergeometric(mu, t)
