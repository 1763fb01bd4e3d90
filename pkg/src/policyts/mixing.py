"""Policy combinators: Bayesian mixtures and local (per-step) mixing.

A Bayesian mixture behaves like running one search per component policy
with automatic weighted time sharing: the mixed trajectory probability
is the prior-weighted sum of the component trajectory probabilities, so
a search guided by the mixture is at most a factor 1/prior slower than
the same search guided by the best component.

Local mixing instead blends conditionals step by step: with rate eps the
searcher pays a factor eps whenever it uses the first policy and 1-eps
whenever it uses the second.  The varying-rate variant decays the first
policy's share with depth so the total discount after t steps is exactly
1/(t+1)**gamma.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from .core import ExactPolicy, Policy, TrajectoryNode


def _logsumexp(values: Sequence[float]) -> float:
    m = max(values)
    if m == -math.inf:
        return -math.inf
    return m + math.log(sum(math.exp(v - m) for v in values))


class BayesMixturePolicy(Policy):
    """Prior-weighted average of component policies.

    Conditionals are posterior-weighted sums of the component
    conditionals; the posterior weight of component i after a trajectory
    is prior_i * prob_i(trajectory) / prob_mix(trajectory).  Weights are
    maintained in log space, renormalized once per step, and cached on
    the trajectory nodes so each step costs O(components).

    Never Markovian: the posterior weights depend on the whole
    trajectory even when every component is Markov.
    """

    is_markov = False

    def __init__(self, components: Sequence[Policy], priors: Sequence[float] | None) -> None:
        if not components:
            raise ValueError("a mixture needs at least one component policy")
        if priors is None:
            priors = [1.0 / len(components)] * len(components)
        if len(priors) != len(components):
            raise ValueError("number of priors must match number of components")
        if any(p <= 0 for p in priors):
            raise ValueError("priors must be positive")
        if abs(sum(float(p) for p in priors) - 1.0) > 1e-9:
            raise ValueError("priors must sum to 1")
        self.components = list(components)
        self.priors = [float(p) for p in priors]
        self._exact_priors = [Fraction(p) for p in priors]
        self._log_priors = tuple(math.log(p) for p in self.priors)

    # -- posterior weights ------------------------------------------------

    def _store(self, node: TrajectoryNode, weights: tuple[float, ...]) -> None:
        if not isinstance(node.policy_memo, dict):
            node.policy_memo = {}
        node.policy_memo[self] = weights

    def _advance(
        self, log_w: tuple[float, ...], parent: TrajectoryNode, action: int
    ) -> tuple[float, ...]:
        stepped = []
        for lw, component in zip(log_w, self.components):
            c = component.conditionals(parent)[action]
            stepped.append(lw + math.log(c) if c > 0.0 else -math.inf)
        norm = _logsumexp(stepped)
        if norm == -math.inf:
            raise ValueError(
                "posterior weights undefined: trajectory has probability 0 "
                "under every component"
            )
        return tuple(lw - norm for lw in stepped)

    def posterior_weights(self, node: TrajectoryNode) -> tuple[float, ...]:
        """Posterior component weights at ``node`` (sum to 1)."""
        memo = node.policy_memo
        if isinstance(memo, dict) and self in memo:
            log_w = memo[self]
        else:
            chain: list[TrajectoryNode] = []
            cur = node
            log_w = None
            while True:
                m = cur.policy_memo
                if isinstance(m, dict) and self in m:
                    log_w = m[self]
                    break
                if cur.parent is None:
                    log_w = self._log_priors
                    self._store(cur, log_w)
                    break
                chain.append(cur)
                cur = cur.parent
            for step in reversed(chain):
                log_w = self._advance(log_w, step.parent, step.action)
                self._store(step, log_w)
        return tuple(math.exp(lw) for lw in log_w)

    # -- policy interface --------------------------------------------------

    def conditionals(self, node: TrajectoryNode) -> Sequence[float]:
        weights = self.posterior_weights(node)
        rows = [component.conditionals(node) for component in self.components]
        n = len(rows[0])
        return [
            sum(w * row[a] for w, row in zip(weights, rows)) for a in range(n)
        ]

    def exact_posterior_weights(self, node: TrajectoryNode) -> tuple[Fraction, ...]:
        """Posterior weights recomputed from the root in exact arithmetic."""
        weights = list(self._exact_priors)
        for step in node.lineage():
            if step.action is None:
                continue
            stepped = [
                w * component.exact_conditionals(step.parent)[step.action]  # type: ignore[attr-defined]
                for w, component in zip(weights, self.components)
            ]
            total = sum(stepped)
            if total == 0:
                raise ValueError("trajectory has probability 0 under every component")
            weights = [w / total for w in stepped]
        return tuple(weights)

    def exact_conditionals(self, node: TrajectoryNode) -> Sequence[Fraction]:
        weights = self.exact_posterior_weights(node)
        rows = [component.exact_conditionals(node) for component in self.components]  # type: ignore[attr-defined]
        n = len(rows[0])
        return [
            sum((w * row[a] for w, row in zip(weights, rows)), Fraction(0))
            for a in range(n)
        ]


def bayes_mix(
    policies: Sequence[Policy], priors: Sequence[float] | None = None
) -> BayesMixturePolicy:
    """Bayesian mixture of ``policies`` with the given prior weights.

    Priors default to uniform; they must be positive and sum to 1.  The
    mixed trajectory probability always dominates prior_i times the i-th
    component's trajectory probability.
    """
    return BayesMixturePolicy(policies, priors)


class LocalMixPolicy(Policy):
    """Per-step blend ``eps * pi1 + (1 - eps) * pi2``.

    With a fixed rate the blend is Markov iff both components are.  With
    a varying rate the share of ``pi2`` at the t-th action (t starting
    at 1) is (t/(t+1))**gamma, whose product over a trajectory of length
    t telescopes to 1/(t+1)**gamma; depth dependence makes the policy
    non-Markovian by construction.
    """

    def __init__(
        self,
        pi1: Policy,
        pi2: Policy,
        *,
        epsilon: float | None = None,
        gamma: float | None = None,
    ) -> None:
        if (epsilon is None) == (gamma is None):
            raise ValueError("exactly one of epsilon (fixed) or gamma (varying) required")
        if epsilon is not None and not 0.0 <= epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if gamma is not None and gamma < 0:
            raise ValueError("gamma must be >= 0")
        self.pi1 = pi1
        self.pi2 = pi2
        self.epsilon = epsilon
        self.gamma = gamma
        self.is_markov = epsilon is not None and pi1.is_markov and pi2.is_markov

    def _rate(self, node: TrajectoryNode) -> float:
        if self.epsilon is not None:
            return self.epsilon
        t = node.depth + 1  # index of the action about to be taken
        return 1.0 - (t / (t + 1)) ** self.gamma

    def conditionals(self, node: TrajectoryNode) -> Sequence[float]:
        eps = self._rate(node)
        row1 = self.pi1.conditionals(node)
        row2 = self.pi2.conditionals(node)
        return [eps * p1 + (1.0 - eps) * p2 for p1, p2 in zip(row1, row2)]

    def _exact_rate(self, node: TrajectoryNode) -> Fraction:
        if self.epsilon is not None:
            return Fraction(self.epsilon)
        if self.gamma != int(self.gamma):
            raise TypeError("exact conditionals need an integer varying-rate exponent")
        t = node.depth + 1
        return 1 - Fraction(t, t + 1) ** int(self.gamma)

    def exact_conditionals(self, node: TrajectoryNode) -> Sequence[Fraction]:
        eps = self._exact_rate(node)
        row1 = self.pi1.exact_conditionals(node)  # type: ignore[attr-defined]
        row2 = self.pi2.exact_conditionals(node)  # type: ignore[attr-defined]
        return [eps * p1 + (1 - eps) * p2 for p1, p2 in zip(row1, row2)]


def local_mix_fixed(pi1: Policy, pi2: Policy, epsilon: float) -> LocalMixPolicy:
    """Fixed-rate local mix; ``epsilon`` is the per-step share of ``pi1``.

    The 1%-noise policy used for benchmark runs is
    ``local_mix_fixed(uniform, learned_policy, 0.01)``.
    """
    return LocalMixPolicy(pi1, pi2, epsilon=epsilon)


def local_mix_varying(pi1: Policy, pi2: Policy, gamma: float) -> LocalMixPolicy:
    """Varying-rate local mix; the share of ``pi1`` at step t is
    1 - (t/(t+1))**gamma."""
    return LocalMixPolicy(pi1, pi2, gamma=gamma)
