"""Restart sampling: single rollouts, fixed-depth restarts, and the
universal power-of-two restart schedule.

The schedule is OEIS A006519 (largest power of two dividing n):
1 2 1 4 1 2 1 8 1 2 1 4 1 2 1 16 ...  Restarting a randomized search
with depth caps drawn from this sequence is within a log factor of the
best fixed cap, without knowing the halting distribution in advance.

Randomness management: every sampling search derives one independent
substream per run index from a base seed (MT19937 seeded with the packed
pair, see :func:`run_rng`), so runs are reproducible and could be drawn
speculatively in parallel as long as results are consumed in schedule
order.
"""

from __future__ import annotations

import math
import random
import time
from bisect import bisect_right
from dataclasses import dataclass

from .core import (
    Policy,
    PolicyTSError,
    SearchDomain,
    SearchReport,
    SearchStatus,
    TrajectoryNode,
)

_MASK64 = (1 << 64) - 1


def a6519(n: int) -> int:
    """Largest power of two dividing ``n`` (OEIS A006519), via ``n AND -n``."""
    if n < 1:
        raise ValueError(f"a6519 is defined for n >= 1, got {n}")
    return n & -n


def a6519_recursive(n: int) -> int:
    """Same sequence by its doubling recurrence: 1 if n is odd, else 2*f(n/2).

    Kept alongside the bit-trick form so the two definitions can be
    cross-checked exhaustively.
    """
    if n < 1:
        raise ValueError(f"a6519 is defined for n >= 1, got {n}")
    f = 1
    while n % 2 == 0:
        f *= 2
        n //= 2
    return f


def run_rng(seed: int, run_index: int) -> random.Random:
    """Independent substream for run ``run_index`` of a search seeded ``seed``."""
    return random.Random(((seed & _MASK64) << 64) | (run_index & _MASK64))


@dataclass
class SampleResult:
    """Outcome of one sampled trajectory.

    ``expansions`` counts goal tests, i.e. steps taken plus one: the
    start state is tested before the first action, so a failed run with
    depth cap D costs D + 1 expansions and a success at depth k costs
    k + 1.
    """

    solved: bool
    actions: tuple[int, ...] | None
    expansions: int


def sample_traj(
    domain: SearchDomain,
    policy: Policy,
    depth_limit: int,
    rng: random.Random,
) -> SampleResult:
    """Sample one trajectory of at most ``depth_limit`` steps from the policy.

    The current node is goal-tested before each step and the walk stops
    at the first goal state.  Actions are drawn by inverting the
    cumulative conditional distribution with a fixed action ordering, so
    the sampled law is exact up to generator quality.  Failure (no goal
    within the cap, or a dead end) is a normal outcome.
    """
    node = TrajectoryNode.root(domain)
    expansions = 0
    for _ in range(depth_limit + 1):
        expansions += 1
        if domain.is_goal(node.state):
            return SampleResult(True, node.actions, expansions)
        if node.depth >= depth_limit:
            break
        conditionals = policy.conditionals(node)
        u = rng.random()
        acc = 0.0
        action = -1
        for a, p in enumerate(conditionals):
            if p > 0.0:
                acc += p
                action = a
                if u < acc:
                    break
        if action < 0:  # dead end: every action has probability zero
            break
        node = TrajectoryNode(
            parent=node,
            action=action,
            depth=node.depth + 1,
            log_prob=node.log_prob + math.log(conditionals[action]),
            state=domain.transition(node.state, action),
        )
    return SampleResult(False, None, expansions)


def _sampling_search(
    domain: SearchDomain,
    policy: Policy,
    nsims: int | None,
    depth_for_run,
    seed: int,
    budget: int | None,
    time_limit: float | None,
) -> SearchReport:
    start = time.perf_counter()
    expansions = 0
    k = 0
    while nsims is None or k < nsims:
        if budget is not None and expansions >= budget:
            return SearchReport(
                SearchStatus.BUDGET_REACHED,
                expansions,
                wall_time=time.perf_counter() - start,
                runs=k,
            )
        if time_limit is not None and time.perf_counter() - start > time_limit:
            return SearchReport(
                SearchStatus.BUDGET_REACHED,
                expansions,
                wall_time=time.perf_counter() - start,
                runs=k,
            )
        k += 1
        result = sample_traj(domain, policy, depth_for_run(k), run_rng(seed, k))
        expansions += result.expansions
        if result.solved:
            return SearchReport(
                SearchStatus.SOLVED,
                expansions,
                solution=result.actions,
                solution_length=len(result.actions),
                wall_time=time.perf_counter() - start,
                runs=k,
            )
    return SearchReport(
        SearchStatus.EXHAUSTED, expansions, wall_time=time.perf_counter() - start, runs=k
    )


def multi_ts(
    domain: SearchDomain,
    policy: Policy,
    nsims: int | None,
    depth_limit: int,
    seed: int = 0,
    *,
    budget: int | None = None,
    time_limit: float | None = None,
) -> SearchReport:
    """Restart sampling at a fixed depth cap.

    Runs up to ``nsims`` independent rollouts (unbounded when ``nsims``
    is None) of ``depth_limit`` steps each and stops at the first
    success.  With goals of cumulative probability q within the cap, the
    expected number of steps before success is at most depth_limit/q;
    if no goal lies within the cap the expectation is infinite and the
    finite mode reports EXHAUSTED after ``nsims`` failures.
    """
    if depth_limit < 1:
        raise ValueError("depth_limit must be >= 1")
    if nsims is not None and nsims < 1:
        raise ValueError("nsims must be >= 1 or None")
    return _sampling_search(
        domain, policy, nsims, lambda k: depth_limit, seed, budget, time_limit
    )


def luby_ts(
    domain: SearchDomain,
    policy: Policy,
    nsims: int | None = None,
    d_min: int = 1,
    seed: int = 0,
    *,
    budget: int | None = None,
    time_limit: float | None = None,
) -> SearchReport:
    """Restart sampling on the universal power-of-two schedule.

    Run k uses depth cap ``d_min * a6519(k)``.  In unbounded mode this
    halts with probability 1 whenever some goal node has positive
    probability, with expected step count within a log factor of the
    best fixed-cap restart strategy.  ``d_min`` scales the schedule up
    when a lower bound on solution depth is known.
    """
    if d_min < 1:
        raise ValueError("d_min must be >= 1")
    if nsims is not None and nsims < 1:
        raise ValueError("nsims must be >= 1 or None")
    return _sampling_search(
        domain, policy, nsims, lambda k: d_min * a6519(k), seed, budget, time_limit
    )


class HaltingDistribution:
    """Explicit distribution of a randomized program's halting time.

    ``probs`` maps time t (integer >= 1) to the probability of halting
    exactly at t; the total mass may be below 1 (a run then fails with
    the leftover probability).  ``q(t)`` is the cumulative distribution.
    Used as the analytic oracle for restart-strategy expectations.
    """

    def __init__(self, probs: dict[int, float]) -> None:
        cleaned: dict[int, float] = {}
        for t, p in probs.items():
            if not isinstance(t, int) or t < 1:
                raise ValueError(f"halting times must be integers >= 1, got {t!r}")
            if p < 0:
                raise ValueError(f"probability for t={t} is negative")
            if p > 0:
                cleaned[t] = float(p)
        self.times = sorted(cleaned)
        self.probs = [cleaned[t] for t in self.times]
        self._cum_q: list[float] = []
        self._cum_tp: list[float] = []
        acc_q = acc_tp = 0.0
        for t, p in zip(self.times, self.probs):
            acc_q += p
            acc_tp += t * p
            self._cum_q.append(acc_q)
            self._cum_tp.append(acc_tp)
        if acc_q > 1.0 + 1e-9:
            raise ValueError(f"total mass {acc_q} exceeds 1")
        self.total_mass = acc_q

    def q(self, t: int) -> float:
        """Probability of halting within ``t`` steps."""
        i = bisect_right(self.times, t)
        return self._cum_q[i - 1] if i else 0.0

    def expected_time_within(self, t: int) -> float:
        """Contribution of halting times <= t to the mean: sum of t'*p(t')."""
        i = bisect_right(self.times, t)
        return self._cum_tp[i - 1] if i else 0.0


class InfiniteExpectation(PolicyTSError):
    """The requested expectation diverges (no halting mass at all)."""


@dataclass
class RuntimeEstimate:
    """Series value plus a certified upper bound on the truncation error."""

    value: float
    error: float


def expected_runtime_universal(
    dist: HaltingDistribution,
    *,
    tol: float = 1e-9,
    max_runs: int = 50_000_000,
) -> RuntimeEstimate:
    """Expected total steps of the power-of-two restart schedule on ``dist``.

    Evaluates the exact series by simulating the schedule: run n has cap
    f(n) = a6519(n), consumes its halting time when it halts (probability
    q(f(n))) and the full cap otherwise.  The series is truncated once
    (residual survival probability) x (bound on the remaining expected
    schedule mass) drops below ``tol``; that certified remainder is
    returned alongside the value.

    Raises :class:`InfiniteExpectation` when the distribution has no
    halting mass (every restart fails, the expectation diverges).
    """
    if dist.total_mass <= 0.0:
        raise InfiniteExpectation("halting distribution has no mass")
    # Tail accounting uses the best fixed cap: runs with cap >= t_star
    # recur at least once every cap_bar indices and each fails with
    # probability at most gamma.
    t_star = min(dist.times, key=lambda t: t / dist.q(t))
    cap_bar = 1 << max(0, (t_star - 1).bit_length())
    gamma = 1.0 - dist.q(t_star)

    def tail_bound(n: int, survival: float) -> float:
        # consumption of run n+m is at most f(n+m) <= n+m; survival shrinks
        # by gamma at least once per cap_bar further runs
        per = 1.0 - gamma
        return survival * cap_bar * (n / per + cap_bar / per + cap_bar / per**2)

    value = 0.0
    survival = 1.0
    n = 0
    while n < max_runs:
        n += 1
        cap = n & -n
        q_cap = dist.q(cap)
        value += survival * (dist.expected_time_within(cap) + (1.0 - q_cap) * cap)
        survival *= 1.0 - q_cap
        if survival <= 0.0:
            return RuntimeEstimate(value, 0.0)
        if n % cap_bar == 0:
            err = tail_bound(n, survival)
            if err < tol:
                return RuntimeEstimate(value, err)
    return RuntimeEstimate(value, tail_bound(n, survival))


def restart_runtime_bound(dist: HaltingDistribution, t: int) -> float:
    """Guaranteed ceiling on the schedule's expected steps, anchored at cap t:
    ``t + (t/q(t)) * (log2(t/q(t)) + 6.1)``; infinite when q(t) = 0."""
    q = dist.q(t)
    if q <= 0.0:
        return math.inf
    ratio = t / q
    return t + ratio * (math.log2(ratio) + 6.1)


def best_restart_runtime_bound(dist: HaltingDistribution, t_max: int) -> float:
    """Minimum of :func:`restart_runtime_bound` over caps t <= t_max.

    The bound is increasing in t while q stays constant, so only the
    support points of the distribution can attain the minimum.
    """
    best = math.inf
    for t in dist.times:
        if t > t_max:
            break
        best = min(best, restart_runtime_bound(dist, t))
    return best
