"""Verification gate for the package's guarantees.

Each test exercises one headline property end to end, at full scale and
at its stated tolerance, and prints a PASS line on success (run with
``pytest tests/test_acceptance.py -v -s`` to see them).  Empirical
checks use fixed seeds; statistical comparisons allow a 99% confidence
margin computed from the observed spread.

Counting convention for sampling searches: a sampled run performs one
goal test before its first step, so its report counts steps + 1
expansions per run.  Expectation bounds for restart strategies are
stated in steps; the comparisons below therefore subtract one expansion
per run from the reports on the empirical side.
"""

import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from policyts import (
    ChainAndBinDomain,
    CollapsedChainDomain,
    FullBinaryTreeDomain,
    GoalSpec,
    HaltingDistribution,
    SearchStatus,
    SearchTrace,
    TablePolicy,
    TrajectoryNode,
    UniformPolicy,
    a6519,
    a6519_recursive,
    bayes_mix,
    best_restart_runtime_bound,
    exact_min_cost,
    exact_min_goal_cost_search,
    exact_trajectory_probability,
    expected_runtime_universal,
    extend,
    greedy_prob_ts,
    levin_ts,
    local_mix_fixed,
    luby_ts,
    multi_ts,
    random_automaton_instance,
    random_tree_instance,
    replay,
    restart_runtime_bound,
)
from policyts.sokoban import (
    OracleBudgetExceeded,
    SokobanDomain,
    bfs_oracle,
    parse_boxoban,
)
from support import (
    data_path,
    doubling_exponent_series,
    doubling_power_series,
    empirical_mean_ci,
    exact_cost_of_node,
    exact_costs_of_trace,
    schedule_weighted_series,
)

Z99 = 2.576  # two-sided 99% normal quantile


def _report(name: str) -> None:
    print(f"[acceptance] {name}: PASS", flush=True)


# 1. restart schedule: exact laws of the power-of-two sequence ---------------


def test_restart_sequence_exact_laws():
    start = time.perf_counter()
    n = np.arange(1, 2**16 + 1, dtype=np.int64)
    f = n & -n

    # bit-trick and doubling-recurrence definitions agree everywhere
    assert all(a6519_recursive(int(k)) == int(f[k - 1]) for k in range(1, 2**16 + 1))

    # shifting by a multiple of a covering power of two never changes f
    for exp in range(0, 17):
        block = np.arange(1, 2**exp, dtype=np.int64)
        if len(block) == 0:
            continue
        fb = block & -block
        assert np.all(fb <= 2 ** (exp - 1))
        for k in range(0, 65):
            shifted = k * 2**exp + block
            assert np.array_equal(shifted & -shifted, fb)

    # partial sums: sum of f below 2^e equals e * 2^(e-1), for e = 1..20
    big = np.arange(1, 2**20, dtype=np.int64)
    cums = np.cumsum(big & -big)
    for e in range(1, 21):
        assert cums[2**e - 2] == e * 2 ** (e - 1)

    # f(k) is 2^e exactly when k is an odd multiple of 2^e
    quotient_odd = ((n // f) & 1) == 1
    assert np.all(quotient_odd)
    for e in range(0, 17):
        odd_multiples = (2 * np.arange(0, 2 ** (16 - e), dtype=np.int64) + 1) * 2**e
        odd_multiples = odd_multiples[odd_multiples <= 2**16]
        assert np.all((odd_multiples & -odd_multiples) == 2**e)

    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"sequence law checks took {elapsed:.1f}s"
    _report("restart sequence exact laws")


# 2 + 3. expansion bound and best-first order on random instances ------------


def test_enumeration_expansion_bound_on_random_instances():
    start = time.perf_counter()
    rng = random.Random(31337)
    order_violations = 0
    for _ in range(1000):
        domain, policy = random_tree_instance(
            rng, max_depth=14, max_nodes=300, goal_count=rng.randrange(1, 5)
        )
        bound = exact_min_cost(domain, policy)
        trace = SearchTrace()
        report = levin_ts(domain, policy, trace=trace)
        assert report.status is SearchStatus.SOLVED
        assert report.expansions <= math.ceil(bound), (
            f"expansions {report.expansions} exceed ceil({bound})"
        )
        costs = exact_costs_of_trace(trace, policy)
        order_violations += sum(1 for a, b in zip(costs, costs[1:]) if a > b)
    assert order_violations == 0
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0, f"bound verification took {elapsed:.1f}s"
    _report("expansion bound on 1000 random instances (exact rationals)")


def test_best_first_order_with_state_cuts():
    rng = random.Random(4242)
    for _ in range(200):
        domain, policy = random_automaton_instance(rng)
        trace = SearchTrace()
        with_cuts = levin_ts(domain, policy, budget=4000, trace=trace)
        costs = exact_costs_of_trace(trace, policy)
        assert all(a <= b for a, b in zip(costs, costs[1:]))
        without = levin_ts(domain, policy, budget=4000, state_cuts=False)
        if with_cuts.solved and without.solved:
            cost_a = exact_cost_of_node(
                _node_for(domain, policy, with_cuts.solution), policy
            )
            cost_b = exact_cost_of_node(
                _node_for(domain, policy, without.solution), policy
            )
            assert cost_a == cost_b
            assert cost_a == exact_min_goal_cost_search(domain, policy)
            assert with_cuts.expansions <= without.expansions
    _report("best-first order and cut soundness on shared-state instances")


def _node_for(domain, policy, actions):
    node = TrajectoryNode.root(domain)
    for action in actions:
        node = extend(node, action, policy, domain)
    return node


# 4. shared-start chain: cuts leave exactly two expansions per level ---------


def test_collapsed_chain_expansions_exactly_two_per_level():
    for d in (5, 10, 20, 50):
        domain = CollapsedChainDomain(d)
        report = levin_ts(domain, UniformPolicy(domain))
        assert report.status is SearchStatus.SOLVED
        assert report.expansions == 2 * d, (d, report.expansions)
    _report("collapsed chain solved in exactly 2d expansions")


# 5. probability-greedy enumeration starves; cost-ordered search does not ----


def test_greedy_starves_where_cost_ordered_search_succeeds():
    domain = ChainAndBinDomain(GoalSpec("bin", 2, (0,)))
    greedy = greedy_prob_ts(domain, UniformPolicy(domain), budget=100_000)
    assert greedy.status is SearchStatus.BUDGET_REACHED
    assert greedy.solution is None
    levin = levin_ts(domain, UniformPolicy(domain))
    assert levin.status is SearchStatus.SOLVED
    assert levin.expansions <= 8  # ceil of the depth/probability minimum
    _report("greedy starvation vs bounded cost-ordered search")


# 6. fixed-depth restarts: mean steps within cap / success-mass ---------------


def test_fixed_depth_restarts_expected_steps():
    domain = FullBinaryTreeDomain.layer(10)
    policy = UniformPolicy(domain)
    steps = []
    for seed in range(5000):
        report = multi_ts(domain, policy, None, 10, seed=seed)
        assert report.solved
        steps.append(report.expansions - report.runs)  # one goal test per run
    mean, margin = empirical_mean_ci(steps, Z99)
    bound = 10 / 0.5  # cap / cumulative goal probability within the cap
    assert mean <= bound + margin, (mean, bound, margin)
    _report("fixed-depth restart mean steps vs cap/success-mass bound")


# 7. universal restart schedule: series oracle and sampled search ------------


def test_schedule_expected_runtime_under_bound_on_random_distributions():
    rng = random.Random(97)
    for _ in range(50):
        times = sorted(rng.sample(range(1, 65), rng.randrange(1, 10)))
        masses = [rng.random() for _ in times]
        scale = rng.uniform(0.2, 1.0) / sum(masses)
        dist = HaltingDistribution({t: m * scale for t, m in zip(times, masses)})
        estimate = expected_runtime_universal(dist, tol=1e-9)
        bound = best_restart_runtime_bound(dist, 64)
        assert estimate.value + estimate.error <= bound, (estimate, bound)
    _report("schedule-simulated expected runtime under the anchored bound")


def test_universal_restart_search_mean_steps_under_bound():
    domain = FullBinaryTreeDomain.layer(10)
    policy = UniformPolicy(domain)
    steps = []
    for seed in range(5000):
        report = luby_ts(domain, policy, seed=seed)
        assert report.solved
        steps.append(report.expansions - report.runs)
    mean, margin = empirical_mean_ci(steps, Z99)
    bound = restart_runtime_bound(HaltingDistribution({10: 0.5}), 10)
    assert bound == pytest.approx(10 + 20 * (math.log2(20) + 6.1))
    assert mean <= bound + margin, (mean, bound, margin)
    _report("universal restart search mean steps vs 218.4 bound")


# 8. qualitative separations: one deep goal vs many goals --------------------


def test_single_goal_favors_enumeration_over_sampling():
    domain = FullBinaryTreeDomain.needle(12)
    policy = UniformPolicy(domain)
    enumerated = levin_ts(domain, policy)
    assert enumerated.solved
    sampled = [luby_ts(domain, policy, seed=seed).expansions for seed in range(3)]
    assert enumerated.expansions < min(sampled)
    _report("single deep goal: enumeration beats sampling")


def test_many_goals_favor_sampling_over_enumeration():
    domain = FullBinaryTreeDomain.layer(16)
    policy = UniformPolicy(domain)
    enumerated = levin_ts(domain, policy)
    assert enumerated.solved
    sampled = [luby_ts(domain, policy, seed=seed).expansions for seed in range(100)]
    mean, _ = empirical_mean_ci(sampled)
    assert mean < enumerated.expansions / 10
    _report("goal-rich layer: sampling beats enumeration tenfold")


# 9. numeric inequalities behind the schedule analysis ------------------------

GAMMA_GRID = [0.01] + [round(0.05 * i, 2) for i in range(1, 20)] + [0.99]


def test_schedule_series_inequalities():
    ln16 = math.log(16)
    for gamma in GAMMA_GRID:
        inv_ln = 1.0 / math.log(1.0 / gamma)

        total, tail = doubling_power_series(gamma, tol=1e-9)
        assert total + tail <= inv_ln * (1 / math.e + gamma / math.log(2))

        total, tail = doubling_exponent_series(gamma, tol=1e-9)
        level = max(0, math.ceil(math.log2(1.0 / math.log2(1.0 / gamma))))
        assert total + tail <= gamma * level + 1.0
        assert total + tail <= math.log2(1.0 / (1.0 - gamma)) + math.log2(ln16)

        total, tail = schedule_weighted_series(gamma, tol=1e-9)
        rhs = (1.0 / (1.0 - gamma)) * (
            1 / math.e
            + 1 / math.log(2)
            + 0.5 * math.log2(ln16)
            + 0.5 * math.log2(1.0 / (1.0 - gamma))
        )
        assert total + tail <= rhs

        for a in (1, 2, 4, 8):
            assert 1.0 / (1.0 - gamma**a) <= 1.0 + gamma / (a * (1.0 - gamma))
    _report("schedule series inequalities on the gamma grid")


# 10. Sokoban benchmark soundness ---------------------------------------------


def test_sokoban_uniform_benchmark_soundness():
    with open(data_path("levels_100.txt")) as fh:
        levels = parse_boxoban(fh.read())
    assert len(levels) == 100
    solved = 0
    oracle_budget_skips = 0
    for level in levels:
        domain = SokobanDomain(level)
        report = levin_ts(domain, UniformPolicy(domain), budget=100_000)
        if report.status is not SearchStatus.SOLVED:
            continue
        solved += 1
        assert domain.is_goal(replay(report.solution, domain))
        try:
            optimal = bfs_oracle(level, node_budget=500_000)
        except OracleBudgetExceeded:
            oracle_budget_skips += 1
            continue
        assert optimal is not None
        assert report.solution_length >= optimal
    rate = solved / len(levels)
    _report(
        f"sokoban soundness on 100 levels (solve rate {rate:.0%}, "
        f"oracle skips {oracle_budget_skips})"
    )


# 11. policy mixing exactness --------------------------------------------------


def test_mixture_guarantees():
    domain = FullBinaryTreeDomain.with_goals([])
    rng = random.Random(271828)

    rows = [
        (Fraction(1, 2), Fraction(1, 2)),
        (Fraction(1, 4), Fraction(3, 4)),
        (Fraction(3, 4), Fraction(1, 4)),
        (Fraction(7, 8), Fraction(1, 8)),
    ]

    from test_mixing import DepthTablePolicy

    pi1 = DepthTablePolicy([rng.choice(rows) for _ in range(8)])
    pi2 = DepthTablePolicy([rng.choice(rows) for _ in range(8)])
    alpha = Fraction(3, 8)
    mix = bayes_mix([pi1, pi2], [alpha, 1 - alpha])
    for _ in range(1000):
        actions = tuple(rng.randrange(2) for _ in range(rng.randrange(1, 21)))
        node = _node_for(domain, mix, actions)
        mixed = exact_trajectory_probability(node, mix)
        p1 = exact_trajectory_probability(_node_for(domain, pi1, actions), pi1)
        p2 = exact_trajectory_probability(_node_for(domain, pi2, actions), pi2)
        assert mixed == alpha * p1 + (1 - alpha) * p2
        assert mixed >= alpha * p1 and mixed >= (1 - alpha) * p2

    inst_rng = random.Random(512)
    for _ in range(200):
        tree, native = random_tree_instance(inst_rng, max_depth=10, max_nodes=150)
        uniform = UniformPolicy(tree)
        prior = Fraction(1, 2)
        mixed_policy = bayes_mix([native, uniform], [prior, 1 - prior])
        report = levin_ts(tree, mixed_policy)
        assert report.solved
        best = min(
            exact_min_cost(tree, native) / prior,
            exact_min_cost(tree, uniform) / (1 - prior),
        )
        assert report.expansions <= math.ceil(best)

    # 1%-noise construction: 0.99 * policy + 0.01 * uniform, per action
    sokoban_level = parse_boxoban(open(data_path("handcrafted.txt")).read())[0]
    sdomain = SokobanDomain(sokoban_level)
    base_rows = {}
    probe = SearchTrace()
    levin_ts(sdomain, UniformPolicy(sdomain), budget=64, trace=probe)
    feature_rng = random.Random(5)
    for event in probe.expanded:
        key = sdomain.render(event.node.state)
        weights = [feature_rng.randrange(1, 5) for _ in range(4)]
        base_rows[key] = [w / sum(weights) for w in weights]
    base = TablePolicy(base_rows, 4, sdomain.render)
    noisy = local_mix_fixed(UniformPolicy(sdomain), base, 0.01)
    node = TrajectoryNode.root(sdomain)
    for _ in range(30):
        base_row = base.conditionals(node)
        noisy_row = noisy.conditionals(node)
        for a in range(4):
            expected = 0.99 * base_row[a] + 0.01 * 0.25
            assert abs(noisy_row[a] - expected) <= 1e-12
        node = extend(node, feature_rng.randrange(4), noisy, sdomain)
    _report("mixture lower bounds, mixed-search bound, and 1%-noise construction")


# 12. bridge transparency -------------------------------------------------------


def test_bridge_search_identical_to_in_process():
    import sys
    from pathlib import Path

    from policyts.bridge import bridge_policy
    from test_bridge import build_table, dyadic_row, write_table  # reuse harness

    servers = Path(__file__).parent / "servers"
    with open(data_path("levels_100.txt")) as fh:
        levels = parse_boxoban(fh.read())[:20]
    rng = random.Random(1618)
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        for i, level in enumerate(levels):
            domain = SokobanDomain(level)
            table = build_table(level, rng, budget=300)
            table_file = Path(tmp) / f"table_{i}.tsv"
            write_table(table, table_file)
            in_process = TablePolicy(table, 4, domain.render)
            native_trace = SearchTrace()
            native = levin_ts(domain, in_process, budget=300, trace=native_trace)
            bridged_trace = SearchTrace()
            with bridge_policy(
                [sys.executable, str(servers / "table_server.py"), str(table_file)],
                domain.render,
                expected_action_count=4,
            ) as remote:
                bridged = levin_ts(domain, remote, budget=300, trace=bridged_trace)
            assert (bridged.status, bridged.expansions) == (native.status, native.expansions)
            assert bridged.solution == native.solution
            assert bridged.solution_length == native.solution_length
            native_seq = [(e.node.actions, e.cut) for e in native_trace.expanded]
            bridged_seq = [(e.node.actions, e.cut) for e in bridged_trace.expanded]
            assert native_seq == bridged_seq
    _report("bridged searches replay the in-process expansion traces")
