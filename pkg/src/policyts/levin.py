"""Best-first policy-guided enumeration with Markov state cuts.

``levin_ts`` expands nodes in non-decreasing order of depth/probability,
which bounds the number of expansions before reaching a goal by
``min over goal nodes of depth(n)/prob(n)``.  ``greedy_prob_ts`` expands
by probability alone (the baseline that can starve forever on goals of
probability below a competing chain's).

Cost comparisons run in floating point (``log(depth) - log_prob``, which
is order-isomorphic to depth/prob); the test suite re-verifies pop order
and bounds in exact rational arithmetic on small instances.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Hashable

from .core import (
    Policy,
    SearchDomain,
    SearchReport,
    SearchStatus,
    TrajectoryNode,
    expand_children,
)


@dataclass
class ExpansionEvent:
    """One fringe removal: the popped node, and whether a state cut skipped it."""

    node: TrajectoryNode
    cut: bool


@dataclass
class SearchTrace:
    """Optional instrumentation: everything popped and everything enqueued."""

    expanded: list[ExpansionEvent] = field(default_factory=list)
    enqueued: list[TrajectoryNode] = field(default_factory=list)


def _levin_key(node: TrajectoryNode) -> float:
    # Root: depth 0, cost 0; -inf sorts it first and keeps log() total.
    if node.depth == 0:
        return -math.inf
    return math.log(node.depth) - node.log_prob


def _greedy_key(node: TrajectoryNode) -> float:
    return -node.log_prob


def _best_first(
    domain: SearchDomain,
    policy: Policy,
    key: Callable[[TrajectoryNode], float],
    budget: int | None,
    state_cuts: bool,
    time_limit: float | None,
    trace: SearchTrace | None,
) -> SearchReport:
    start = time.perf_counter()
    counter = itertools.count()
    root = TrajectoryNode.root(domain)
    fringe: list[tuple[float, int, TrajectoryNode]] = [(key(root), next(counter), root)]
    cuts_active = state_cuts and policy.is_markov
    best_log_prob: dict[Hashable, float] = {}
    expansions = 0

    while fringe:
        if budget is not None and expansions >= budget:
            return SearchReport(
                SearchStatus.BUDGET_REACHED, expansions, wall_time=time.perf_counter() - start
            )
        if time_limit is not None and expansions % 1024 == 0:
            if time.perf_counter() - start > time_limit:
                return SearchReport(
                    SearchStatus.BUDGET_REACHED,
                    expansions,
                    wall_time=time.perf_counter() - start,
                )
        _, _, node = heapq.heappop(fringe)
        expansions += 1
        if domain.is_goal(node.state):
            if trace is not None:
                trace.expanded.append(ExpansionEvent(node, cut=False))
            solution = node.actions
            return SearchReport(
                SearchStatus.SOLVED,
                expansions,
                solution=solution,
                solution_length=len(solution),
                wall_time=time.perf_counter() - start,
            )
        if cuts_active:
            skey = domain.state_key(node.state)
            seen = best_log_prob.get(skey)
            if seen is not None and seen >= node.log_prob:
                # state already expanded from a trajectory at least as
                # probable: every continuation below it is cheaper there
                if trace is not None:
                    trace.expanded.append(ExpansionEvent(node, cut=True))
                continue
            best_log_prob[skey] = node.log_prob
        if trace is not None:
            trace.expanded.append(ExpansionEvent(node, cut=False))
        for child in expand_children(node, policy, domain):
            heapq.heappush(fringe, (key(child), next(counter), child))
            if trace is not None:
                trace.enqueued.append(child)
    return SearchReport(
        SearchStatus.EXHAUSTED, expansions, wall_time=time.perf_counter() - start
    )


def levin_ts(
    domain: SearchDomain,
    policy: Policy,
    budget: int | None = None,
    *,
    state_cuts: bool = True,
    time_limit: float | None = None,
    trace: SearchTrace | None = None,
) -> SearchReport:
    """Best-first enumeration ordered by depth/probability.

    Pops the fringe node minimizing ``depth(n)/prob(n)`` (ties broken by
    insertion order), goal-tests it, and otherwise enqueues its
    positive-probability children.  When the policy is Markovian a node
    is skipped if its state was already expanded from a trajectory of
    probability >= its own (``state_cuts=False`` disables this).

    On solvable instances the number of expansions is bounded by the
    minimum over goal nodes of (depth(n)+1)/prob(n); away from the
    degenerate boundary of near-probability-1 paths the familiar
    depth(n)/prob(n) form holds.  Returns EXHAUSTED only when the fringe
    empties, BUDGET_REACHED when ``budget`` expansions or ``time_limit``
    seconds elapse first.
    """
    return _best_first(domain, policy, _levin_key, budget, state_cuts, time_limit, trace)


def greedy_prob_ts(
    domain: SearchDomain,
    policy: Policy,
    budget: int | None = None,
    *,
    state_cuts: bool = True,
    time_limit: float | None = None,
    trace: SearchTrace | None = None,
) -> SearchReport:
    """Best-first enumeration by raw trajectory probability (no depth term).

    Kept as a demonstration baseline: on a domain with an infinite chain
    of probability-1/2 nodes it never reaches goals of probability 1/4,
    no matter the budget.
    """
    return _best_first(domain, policy, _greedy_key, budget, state_cuts, time_limit, trace)
