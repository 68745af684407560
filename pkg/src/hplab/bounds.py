"""Numeric tail and non-existence bounds used by the pipeline analyses.

Everything is evaluated exponent-first ("log space"), so extreme parameter
choices underflow cleanly to 0.0 instead of producing NaNs, and every
report carries the exponent alongside the clamped probability.
"""

from __future__ import annotations

import math
from itertools import combinations
from typing import Iterable, Sequence

VARIANT_FOREST = "2^(-c_F * rho^2 * p * n^2)"
VARIANT_GENERIC = "exp(-lambda + delta_bar / 2)"
VARIANT_CHERNOFF = "exp(-t^2 * mu / 2) lower tail"


def _sig6(x: float) -> float:
    """Reports carry six significant digits; the math stays in log space."""
    return float(f"{x:.6g}")


def janson_forest_bound(rho: float, p: float, n: int, c_f: float = 1.0) -> float:
    """Upper bound on the probability that a binomial random graph misses
    every member of a forest family of density rho.

    The constant c_f depends on the forest shape and is not pinned by
    theory here, so it is exposed as a parameter (default 1) and results
    should be read as parametric in it.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    if c_f <= 0:
        raise ValueError("c_f must be positive")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0,1]")
    if n < 0:
        raise ValueError("n must be >= 0")
    exponent = -c_f * rho * rho * p * n * n
    return min(1.0, 2.0**exponent)


def janson_forest_report(rho: float, p: float, n: int, c_f: float = 1.0) -> dict:
    bound = janson_forest_bound(rho, p, n, c_f)
    return {
        "bound": _sig6(bound),
        "exponent": _sig6(-c_f * rho * rho * p * n * n),
        "variant": VARIANT_FOREST,
        "implied_C": _sig6(implied_augmentation_constant(rho, c_f)),
    }


def implied_augmentation_constant(rho: float, c_f: float) -> float:
    """The edge-budget constant 2 / (c_f * rho^2) that the forest bound
    requires of p = C/n; reported rather than asserted because c_f is
    user-supplied."""
    if rho <= 0 or c_f <= 0:
        raise ValueError("rho and c_f must be positive")
    return 2.0 / (c_f * rho * rho)


def janson_generic_bound(lam: float, delta_bar: float) -> float:
    """Standard exponential bound exp(-lambda + delta_bar/2) on the
    probability that no copy from a family appears.

    lam is the expected number of copies, delta_bar the ordered sum of
    joint expectations over dependent pairs.
    """
    if lam < 0 or delta_bar < 0:
        raise ValueError("lambda and delta_bar must be >= 0")
    return min(1.0, math.exp(-lam + delta_bar / 2))


def janson_generic_report(lam: float, delta_bar: float) -> dict:
    return {
        "bound": _sig6(janson_generic_bound(lam, delta_bar)),
        "exponent": _sig6(-lam + delta_bar / 2),
        "variant": VARIANT_GENERIC,
    }


def chernoff_hypergeometric(mu: float, t: float) -> float:
    """Lower-tail bound exp(-t^2 mu / 2) for a hypergeometric (or binomial)
    variable with mean mu deviating a fraction t below it."""
    if mu < 0:
        raise ValueError("mu must be >= 0")
    if not 0.0 < t < 1.0:
        raise ValueError("t must lie in (0,1)")
    return min(1.0, math.exp(-t * t * mu / 2))


def chernoff_report(mu: float, t: float) -> dict:
    return {
        "bound": _sig6(chernoff_hypergeometric(mu, t)),
        "exponent": _sig6(-t * t * mu / 2),
        "variant": VARIANT_CHERNOFF,
    }


def union_bound(parts: Iterable[float]) -> float:
    """min(1, sum of the parts); each part must be a probability."""
    total = 0.0
    for x in parts:
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"probability {x} outside [0,1]")
        total += x
    return min(1.0, total)


def union_report(parts: Iterable[float]) -> dict:
    return {
        "bound": _sig6(union_bound(parts)),
        "exponent": None,
        "variant": "sum clamped to 1",
    }


def janson_inputs_from_family(
    p: float, family: Sequence[Iterable[tuple[int, int]]]
) -> tuple[float, float]:
    """Compute (lambda, delta_bar) for a family of subgraph copies given as
    edge sets.

    lambda = sum of p^{e(F)}; delta_bar = ordered sum over distinct pairs
    with at least one shared edge of p^{|E(F) union E(F')|}.
    """
    edge_sets = [frozenset(tuple(sorted(e)) for e in copy) for copy in family]
    lam = sum(p ** len(es) for es in edge_sets)
    delta_bar = 0.0
    for a, b in combinations(range(len(edge_sets)), 2):
        ea, eb = edge_sets[a], edge_sets[b]
        if ea & eb:
            delta_bar += 2 * p ** len(ea | eb)
    return lam, delta_bar
