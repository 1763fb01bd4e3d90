"""Core abstractions shared by every search algorithm.

A search problem is a deterministic environment (:class:`SearchDomain`)
plus a conditional action distribution (:class:`Policy`).  Nodes of the
search tree are sequences of actions; :class:`TrajectoryNode` stores them
as a parent-linked chain so that extending a node is O(1) and long
trajectories share their prefixes.

Conventions used throughout the package:

* the root is the empty action sequence, has depth 0 and probability 1;
* probabilities are composed in natural-log space (``log_prob``), which
  keeps trajectories of depth well beyond ~700 from underflowing;
* an *expansion* is the removal of a node from a fringe followed by a
  goal test; expansion counts include the goal node itself.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Hashable, Iterator, Sequence

ActionId = int
"""Dense action index in ``[0, action_count)``."""


class PolicyTSError(Exception):
    """Base class for errors raised by this package."""


class ZeroProbabilityAction(PolicyTSError):
    """Extending a trajectory with an action the policy assigns probability 0."""


class MalformedSolution(PolicyTSError):
    """An action sequence contains an index outside ``[0, action_count)``."""


class NoGoalError(PolicyTSError):
    """A computation over the goal set was requested but the goal set is empty."""


class SearchDomain(ABC):
    """Deterministic environment: states, transitions, and a goal test.

    ``transition`` must be a pure function (same state and action always
    produce the same state) and total: every action is applicable in
    every state, possibly as a no-op.  ``state_key`` must return equal
    keys exactly for identical environment states; the default assumes
    states themselves are hashable.

    Implementations must be safe for concurrent read-only use; they are
    shared between searches but never mutated by them.
    """

    @property
    @abstractmethod
    def action_count(self) -> int: ...

    @property
    @abstractmethod
    def initial_state(self) -> Any: ...

    @abstractmethod
    def transition(self, state: Any, action: ActionId) -> Any: ...

    @abstractmethod
    def is_goal(self, state: Any) -> bool: ...

    def state_key(self, state: Any) -> Hashable:
        return state

    def legal_actions(self, state: Any) -> Sequence[ActionId]:
        """Actions a policy may renormalize over; defaults to all of them."""
        return range(self.action_count)


class Policy(ABC):
    """Conditional action distribution given a trajectory.

    ``conditionals(node)`` returns a vector of ``action_count``
    non-negative reals summing to 1 (a dead end, where every action is
    illegal, yields the all-zero vector and callers treat the node as
    childless).  ``is_markov`` declares that the vector depends on the
    node only through its environment state, which licenses state cuts.
    """

    is_markov: bool = False

    @abstractmethod
    def conditionals(self, node: "TrajectoryNode") -> Sequence[float]: ...


class ExactPolicy(Policy):
    """Policy that can also report its conditionals as exact rationals.

    Test oracles use this to re-verify floating-point search decisions
    in exact arithmetic.  ``conditionals`` must equal
    ``exact_conditionals`` after conversion to float.
    """

    @abstractmethod
    def exact_conditionals(self, node: "TrajectoryNode") -> Sequence[Fraction]: ...


class TrajectoryNode:
    """A node of the search tree: an action sequence with cached facts.

    ``depth`` is the number of actions taken from the root, ``log_prob``
    the natural log of the trajectory probability under the guiding
    policy, and ``state`` the environment state reached by replaying the
    actions.  Nodes are immutable once created; ``policy_memo`` is an
    opaque slot policies may use to carry incremental per-trajectory
    bookkeeping (e.g. posterior weights) along with the node.
    """

    __slots__ = ("parent", "action", "depth", "log_prob", "state", "policy_memo")

    def __init__(
        self,
        parent: "TrajectoryNode | None",
        action: ActionId | None,
        depth: int,
        log_prob: float,
        state: Any,
    ) -> None:
        self.parent = parent
        self.action = action
        self.depth = depth
        self.log_prob = log_prob
        self.state = state
        self.policy_memo: Any = None

    @classmethod
    def root(cls, domain: SearchDomain) -> "TrajectoryNode":
        return cls(None, None, 0, 0.0, domain.initial_state)

    @property
    def actions(self) -> tuple[ActionId, ...]:
        """Materialize the action sequence (walks the parent chain, O(depth))."""
        out: list[ActionId] = []
        node: TrajectoryNode | None = self
        while node is not None and node.action is not None:
            out.append(node.action)
            node = node.parent
        out.reverse()
        return tuple(out)

    def lineage(self) -> Iterator["TrajectoryNode"]:
        """Yield the nodes from the root down to this node."""
        chain: list[TrajectoryNode] = []
        node: TrajectoryNode | None = self
        while node is not None:
            chain.append(node)
            node = node.parent
        return iter(reversed(chain))

    @property
    def probability(self) -> float:
        return math.exp(self.log_prob)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"TrajectoryNode(actions={self.actions!r}, log_prob={self.log_prob:.4f})"


class SearchStatus(Enum):
    SOLVED = "solved"
    EXHAUSTED = "exhausted"
    BUDGET_REACHED = "budget_reached"


@dataclass
class SearchReport:
    """Outcome of one search run.

    ``expansions`` counts every node removed from a fringe for goal
    testing, including the goal node itself.  ``solution`` is present
    exactly when ``status`` is SOLVED and replays from the initial state
    to a goal state.  For sampling searches ``runs`` counts trajectory
    samples (each costs one extra goal test on top of its steps).
    """

    status: SearchStatus
    expansions: int
    solution: tuple[ActionId, ...] | None = None
    solution_length: int | None = None
    wall_time: float = 0.0
    runs: int | None = None

    @property
    def solved(self) -> bool:
        return self.status is SearchStatus.SOLVED


def extend(
    node: TrajectoryNode,
    action: ActionId,
    policy: Policy,
    domain: SearchDomain,
    *,
    allow_zero: bool = False,
) -> TrajectoryNode:
    """Child of ``node`` after ``action``: depth+1, log_prob plus the action's
    log-conditional, state advanced by the domain transition.

    Raises :class:`ZeroProbabilityAction` when the policy assigns the
    action probability 0, unless ``allow_zero`` is set (the child then
    carries ``log_prob == -inf``).  Searches prune such children instead
    of enqueuing cost-infinite nodes.
    """
    if not 0 <= action < domain.action_count:
        raise MalformedSolution(f"action {action} out of range [0, {domain.action_count})")
    conditional = policy.conditionals(node)[action]
    if conditional <= 0.0:
        if not allow_zero:
            raise ZeroProbabilityAction(
                f"action {action} has zero probability at depth {node.depth}"
            )
        log_cond = -math.inf
    else:
        log_cond = math.log(conditional)
    return TrajectoryNode(
        parent=node,
        action=action,
        depth=node.depth + 1,
        log_prob=node.log_prob + log_cond,
        state=domain.transition(node.state, action),
    )


def expand_children(
    node: TrajectoryNode, policy: Policy, domain: SearchDomain
) -> list[TrajectoryNode]:
    """All positive-probability children of ``node``, in action order."""
    conditionals = policy.conditionals(node)
    children = []
    for action in range(domain.action_count):
        c = conditionals[action]
        if c > 0.0:
            children.append(
                TrajectoryNode(
                    parent=node,
                    action=action,
                    depth=node.depth + 1,
                    log_prob=node.log_prob + math.log(c),
                    state=domain.transition(node.state, action),
                )
            )
    return children


def replay(actions: Sequence[ActionId], domain: SearchDomain) -> Any:
    """Fold the transition function over ``actions`` from the initial state.

    This is the solution-validity oracle: a reported solution is correct
    iff ``domain.is_goal(replay(solution, domain))``.
    """
    state = domain.initial_state
    for action in actions:
        if not 0 <= action < domain.action_count:
            raise MalformedSolution(
                f"action {action} out of range [0, {domain.action_count})"
            )
        state = domain.transition(state, action)
    return state


def exact_trajectory_probability(node: TrajectoryNode, policy: ExactPolicy) -> Fraction:
    """Trajectory probability of ``node`` as an exact rational."""
    prob = Fraction(1)
    for step in node.lineage():
        if step.action is None:
            continue
        prob *= policy.exact_conditionals(step.parent)[step.action]
    return prob


def exact_cost(node: TrajectoryNode, policy: ExactPolicy) -> Fraction:
    """Exact expansion cost depth/probability of ``node`` (root costs 0)."""
    if node.depth == 0:
        return Fraction(0)
    prob = exact_trajectory_probability(node, policy)
    if prob == 0:
        raise ZeroProbabilityAction("cost undefined for zero-probability trajectory")
    return Fraction(node.depth) / prob
