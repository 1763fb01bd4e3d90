"""Shared helpers for the test suite: exact-arithmetic re-verification of
floating-point search decisions, and fixture paths."""

from __future__ import annotations

from fractions import Fraction
from importlib import resources

from policyts import ExactPolicy, SearchTrace, TrajectoryNode


def data_path(name: str) -> str:
    return str(resources.files("policyts").joinpath("data", "boxoban", name))


def exact_costs_of_trace(trace: SearchTrace, policy: ExactPolicy) -> list[Fraction]:
    """Exact cost of every popped node, in pop order (cuts included)."""
    probs: dict[int, Fraction] = {}

    def prob_of(node: TrajectoryNode) -> Fraction:
        cached = probs.get(id(node))
        if cached is not None:
            return cached
        if node.parent is None:
            value = Fraction(1)
        else:
            value = prob_of(node.parent) * policy.exact_conditionals(node.parent)[node.action]
        probs[id(node)] = value
        return value

    costs = []
    for event in trace.expanded:
        node = event.node
        costs.append(Fraction(node.depth) / prob_of(node) if node.depth else Fraction(0))
    return costs


def exact_cost_of_node(node: TrajectoryNode, policy: ExactPolicy) -> Fraction:
    prob = Fraction(1)
    for step in node.lineage():
        if step.action is not None:
            prob *= policy.exact_conditionals(step.parent)[step.action]
    return Fraction(node.depth) / prob if node.depth else Fraction(0)


# -- certified series evaluation for the schedule inequality checks ---------


def doubling_power_series(gamma: float, tol: float = 1e-9) -> tuple[float, float]:
    """sum of 2^n * gamma^(2^n) over n >= 0, with a certified tail bound.

    Once gamma^(2^n) <= 1/4 the term ratio is at most 1/2, so the tail
    after term n is at most that term itself.
    """
    assert 0.0 <= gamma < 1.0
    total = 0.0
    n = 0
    while True:
        g = gamma ** (2**n)
        term = (2**n) * g
        total += term
        if g <= 0.25 and term <= tol / 2:
            return total, term
        n += 1


def doubling_exponent_series(gamma: float, tol: float = 1e-9) -> tuple[float, float]:
    """sum of gamma^(2^n) over n >= 0, with a certified tail bound."""
    assert 0.0 <= gamma < 1.0
    total = 0.0
    n = 0
    while True:
        term = gamma ** (2**n)
        total += term
        if term <= min(0.25, tol / 2):
            return total, term
        n += 1


def schedule_weighted_series(gamma: float, tol: float = 1e-9) -> tuple[float, float]:
    """sum of gamma^k * f(k) for k >= 1 with f the largest power of two
    dividing k; tail certified via f(k) <= k."""
    from policyts import a6519

    assert 0.0 <= gamma < 1.0
    if gamma == 0.0:
        return 0.0, 0.0
    total = 0.0
    k = 0
    while True:
        k += 1
        total += gamma**k * a6519(k)
        if k % 64 == 0:
            # exact tail of sum_{j>k} j*gamma^j dominates the remainder
            tail = gamma ** (k + 1) * ((k + 1) * (1 - gamma) + gamma) / (1 - gamma) ** 2
            if tail <= tol:
                return total, tail


def empirical_mean_ci(values: list[float], z: float = 2.576) -> tuple[float, float]:
    """Sample mean and its z-sigma confidence half-width (z=2.576: 99%)."""
    import statistics

    mean = statistics.mean(values)
    if len(values) < 2:
        return mean, 0.0
    sem = statistics.stdev(values) / len(values) ** 0.5
    return mean, z * sem
