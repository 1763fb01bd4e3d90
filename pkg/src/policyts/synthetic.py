"""Analytically tractable domains with exact rational oracles.

These domains make the package's guarantees checkable: goal sets are
explicitly enumerable, trajectory probabilities are exact rationals, and
a brute-force enumerator can recompute anything the fast search code
claims.  Trees are realized lazily; nothing is materialized beyond what
a search touches.
"""

from __future__ import annotations

import heapq
import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterator, Sequence

from .core import (
    ActionId,
    ExactPolicy,
    NoGoalError,
    SearchDomain,
    TrajectoryNode,
)
from .policies import UniformPolicy

_DEAD = ("dead",)


@dataclass(frozen=True)
class GoalSpec:
    """Target placement for :class:`ChainAndBinDomain`.

    ``side`` is ``"chain"`` or ``"bin"``; ``path`` gives the actions taken
    inside the bin subtree (the first action, entering the bin, is implied).
    """

    side: str
    depth: int
    path: tuple[ActionId, ...] = ()

    def __post_init__(self) -> None:
        if self.side not in ("chain", "bin"):
            raise ValueError("side must be 'chain' or 'bin'")
        if self.side == "bin" and self.depth != 1 + len(self.path):
            raise ValueError("bin goal depth must equal 1 + len(path)")
        if self.side == "chain" and self.depth < 1:
            raise ValueError("chain goal depth must be >= 1")


class ChainAndBinDomain(SearchDomain):
    """Root splits in two: an infinite single-successor chain and an
    infinite binary subtree.

    Under the uniform policy over legal actions the root's children each
    get probability 1/2, chain nodes continue with probability 1, and bin
    nodes split 1/2 each, so a chain node at depth d has probability 1/2
    while a bin node at depth d has probability 2^-d.  States coincide
    with nodes (no transpositions).  Action 0 stays on the entered side
    (chain continuation / bin-left), action 1 enters or branches right.
    """

    def __init__(self, goal: GoalSpec) -> None:
        self.goal = goal

    @property
    def action_count(self) -> int:
        return 2

    @property
    def initial_state(self) -> Hashable:
        return ("root",)

    def transition(self, state, action):
        kind = state[0]
        if kind == "root":
            return ("chain", 1) if action == 0 else ("bin", 1, 0)
        if kind == "chain":
            if action == 0:
                return ("chain", state[1] + 1)
            return _DEAD
        if kind == "bin":
            _, depth, bits = state
            return ("bin", depth + 1, bits * 2 + action)
        return _DEAD

    def legal_actions(self, state) -> Sequence[ActionId]:
        kind = state[0]
        if kind == "chain":
            return (0,)
        if kind == "dead":
            return ()
        return (0, 1)

    def is_goal(self, state) -> bool:
        if self.goal.side == "chain":
            return state == ("chain", self.goal.depth)
        bits = 0
        for a in self.goal.path:
            bits = bits * 2 + a
        return state == ("bin", self.goal.depth, bits)

    def goal_action_sequences(self) -> Iterator[tuple[ActionId, ...]]:
        if self.goal.side == "chain":
            yield (0,) * self.goal.depth
        else:
            yield (1,) + self.goal.path


class FullBinaryTreeDomain(SearchDomain):
    """Perfect binary tree; states are (depth, path-bits) pairs, so every
    node is its own state.

    Under the bundled uniform policy each node's probability is
    2^-depth.  ``max_depth`` turns the tree finite (nodes at the cap are
    dead ends), which makes exhaustion observable.
    """

    def __init__(
        self, goals: frozenset[tuple[int, int]], max_depth: int | None = None
    ) -> None:
        self._goals = goals
        self.max_depth = max_depth

    @classmethod
    def needle(cls, depth: int, path: tuple[ActionId, ...] | None = None,
               max_depth: int | None = None) -> "FullBinaryTreeDomain":
        """Single goal node at ``depth``; default path alternates 0,1,0,1,..."""
        if path is None:
            path = tuple(i % 2 for i in range(depth))
        if len(path) != depth:
            raise ValueError("path length must equal depth")
        bits = 0
        for a in path:
            bits = bits * 2 + a
        return cls(frozenset({(depth, bits)}), max_depth)

    @classmethod
    def layer(cls, depth: int, max_depth: int | None = None) -> "FullBinaryTreeDomain":
        """All 2^(depth-1) nodes at ``depth`` whose final action is 0.

        Their cumulative probability under the uniform policy is 1/2
        regardless of ``depth``.
        """
        if depth < 1:
            raise ValueError("layer depth must be >= 1")
        goals = frozenset((depth, bits) for bits in range(0, 2**depth, 2))
        return cls(goals, max_depth)

    @classmethod
    def with_goals(
        cls, goals: Sequence[tuple[int, int]], max_depth: int | None = None
    ) -> "FullBinaryTreeDomain":
        return cls(frozenset(goals), max_depth)

    @property
    def action_count(self) -> int:
        return 2

    @property
    def initial_state(self):
        return (0, 0)

    def transition(self, state, action):
        depth, bits = state
        return (depth + 1, bits * 2 + action)

    def legal_actions(self, state) -> Sequence[ActionId]:
        if self.max_depth is not None and state[0] >= self.max_depth:
            return ()
        return (0, 1)

    def is_goal(self, state) -> bool:
        return state in self._goals

    def goal_action_sequences(self) -> Iterator[tuple[ActionId, ...]]:
        for depth, bits in sorted(self._goals):
            yield tuple((bits >> (depth - 1 - i)) & 1 for i in range(depth))


class CollapsedChainDomain(SearchDomain):
    """Binary branching where one action advances along a chain and the
    other collapses back to the start state.

    Every "collapse" child of every node shares the start state, so a
    Markov search with state cuts prunes one of the two children popped
    per level and reaches the goal at depth d after exactly 2d
    expansions, while sampling needs on the order of 2^d.
    """

    def __init__(self, goal_depth: int) -> None:
        if goal_depth < 1:
            raise ValueError("goal_depth must be >= 1")
        self.goal_depth = goal_depth

    @property
    def action_count(self) -> int:
        return 2

    @property
    def initial_state(self) -> int:
        return 0

    def transition(self, state: int, action: ActionId) -> int:
        return state + 1 if action == 0 else 0

    def is_goal(self, state: int) -> bool:
        return state == self.goal_depth

    def goal_action_sequences(self) -> Iterator[tuple[ActionId, ...]]:
        # The minimum-cost target node; all others revisit the start first
        # and are strictly deeper with no higher probability.
        yield (0,) * self.goal_depth


class ExplicitTreeDomain(SearchDomain):
    """Finite tree given extensionally; node ids are the states.

    ``vectors[node]`` holds the exact conditional probabilities of that
    node's actions (entries may be zero: those branches do not exist).
    The matching :class:`ExplicitTreePolicy` reads the same vectors, so
    instances double as exact-arithmetic fixtures.
    """

    def __init__(
        self,
        children: Sequence[Sequence[int]],
        vectors: Sequence[Sequence[Fraction]],
        goals: frozenset[int],
        action_count: int,
    ) -> None:
        self.children = children
        self.vectors = vectors
        self.goals = goals
        self._action_count = action_count

    @property
    def action_count(self) -> int:
        return self._action_count

    @property
    def initial_state(self) -> int:
        return 0

    def transition(self, state: int, action: ActionId) -> int:
        if state < 0:
            return -1
        child = self.children[state][action]
        return child if child is not None else -1

    def is_goal(self, state: int) -> bool:
        return state in self.goals

    def legal_actions(self, state: int) -> Sequence[ActionId]:
        if state < 0:
            return ()
        return tuple(
            a for a in range(self._action_count) if self.children[state][a] is not None
        )

    def node_count(self) -> int:
        return len(self.children)

    def goal_action_sequences(self) -> Iterator[tuple[ActionId, ...]]:
        # Parent pointers are implicit; rebuild paths by one tree walk.
        paths: dict[int, tuple[ActionId, ...]] = {0: ()}
        stack = [0]
        while stack:
            node = stack.pop()
            for action, child in enumerate(self.children[node]):
                if child is not None:
                    paths[child] = paths[node] + (action,)
                    stack.append(child)
        for goal in sorted(self.goals):
            yield paths[goal]


class ExplicitTreePolicy(ExactPolicy):
    """Per-node conditional vectors of an :class:`ExplicitTreeDomain`."""

    is_markov = True  # states are nodes, so the condition is vacuous

    def __init__(self, domain: ExplicitTreeDomain) -> None:
        self._domain = domain
        self._float = [[float(p) for p in row] for row in domain.vectors]
        self._zero = [0.0] * domain.action_count

    def conditionals(self, node: TrajectoryNode) -> Sequence[float]:
        state = node.state
        return self._float[state] if state >= 0 else self._zero

    def exact_conditionals(self, node: TrajectoryNode) -> Sequence[Fraction]:
        state = node.state
        if state < 0:
            return [Fraction(0)] * self._domain.action_count
        return self._domain.vectors[state]


class AutomatonDomain(SearchDomain):
    """Deterministic finite automaton unrolled into an (infinite) tree.

    Different action sequences can reach the same automaton state, so
    this is the testbed for state cuts and Markov-policy properties.
    """

    def __init__(
        self,
        table: Sequence[Sequence[int]],
        goals: frozenset[int],
        action_count: int,
        initial: int = 0,
    ) -> None:
        self.table = table
        self.goals = goals
        self._action_count = action_count
        self._initial = initial

    @property
    def action_count(self) -> int:
        return self._action_count

    @property
    def initial_state(self) -> int:
        return self._initial

    def transition(self, state: int, action: ActionId) -> int:
        return self.table[state][action]

    def is_goal(self, state: int) -> bool:
        return state in self.goals


class AutomatonPolicy(ExactPolicy):
    """Markov policy: one exact conditional vector per automaton state."""

    is_markov = True

    def __init__(self, vectors: Sequence[Sequence[Fraction]]) -> None:
        self._vectors = vectors
        self._float = [[float(p) for p in row] for row in vectors]

    def conditionals(self, node: TrajectoryNode) -> Sequence[float]:
        return self._float[node.state]

    def exact_conditionals(self, node: TrajectoryNode) -> Sequence[Fraction]:
        return self._vectors[node.state]


def exact_min_cost(domain: SearchDomain, policy: ExactPolicy | None = None) -> Fraction:
    """Minimum of depth/probability over the domain's goal nodes, exactly.

    ``policy`` defaults to the uniform policy over legal actions.  The
    domain must enumerate its goal nodes via ``goal_action_sequences``.
    """
    sequences = getattr(domain, "goal_action_sequences", None)
    if sequences is None:
        raise TypeError(f"{type(domain).__name__} cannot enumerate its goal nodes")
    if policy is None:
        policy = UniformPolicy(domain)
    best: Fraction | None = None
    for actions in sequences():
        prob = Fraction(1)
        node = TrajectoryNode.root(domain)
        for action in actions:
            prob *= policy.exact_conditionals(node)[action]
            node = TrajectoryNode(
                node, action, node.depth + 1, 0.0, domain.transition(node.state, action)
            )
        if prob == 0:
            continue
        cost = Fraction(len(actions)) / prob
        if best is None or cost < best:
            best = cost
    if best is None:
        raise NoGoalError("domain has no positive-probability goal node")
    return best


def brute_force_min_cost(
    domain: SearchDomain, policy: ExactPolicy, depth_limit: int
) -> Fraction:
    """Exhaustive enumeration oracle: min depth/probability over every
    positive-probability goal node of depth <= ``depth_limit``.

    Only meaningful when the domain has no positive-probability node
    beyond the limit (e.g. a finite tree fully inside it).
    """
    best: Fraction | None = None
    root = TrajectoryNode.root(domain)
    stack: list[tuple[TrajectoryNode, Fraction]] = [(root, Fraction(1))]
    while stack:
        node, prob = stack.pop()
        if domain.is_goal(node.state):
            cost = Fraction(node.depth) / prob
            if best is None or cost < best:
                best = cost
            continue  # search trees stop below goal nodes
        if node.depth >= depth_limit:
            continue
        exact = policy.exact_conditionals(node)
        for action in range(domain.action_count):
            p = exact[action]
            if p > 0:
                child = TrajectoryNode(
                    node,
                    action,
                    node.depth + 1,
                    0.0,
                    domain.transition(node.state, action),
                )
                stack.append((child, prob * p))
    if best is None:
        raise NoGoalError(f"no goal within depth {depth_limit}")
    return best


def exact_min_goal_cost_search(
    domain: SearchDomain, policy: ExactPolicy, max_expansions: int = 200_000
) -> Fraction:
    """Exact-arithmetic lowest-cost-first enumeration until the first goal.

    Costs strictly increase along every path (conditionals are <= 1), so
    the first goal reached in exact cost order attains the global
    minimum even on infinite unrollings such as automaton domains.
    """
    counter = itertools.count()
    root = TrajectoryNode.root(domain)
    heap: list[tuple[Fraction, int, TrajectoryNode, Fraction]] = [
        (Fraction(0), next(counter), root, Fraction(1))
    ]
    for _ in range(max_expansions):
        if not heap:
            raise NoGoalError("fringe exhausted before reaching a goal")
        cost, _, node, prob = heapq.heappop(heap)
        if domain.is_goal(node.state):
            return cost
        exact = policy.exact_conditionals(node)
        for action in range(domain.action_count):
            p = exact[action]
            if p > 0:
                child_prob = prob * p
                child = TrajectoryNode(
                    node,
                    action,
                    node.depth + 1,
                    0.0,
                    domain.transition(node.state, action),
                )
                heapq.heappush(
                    heap,
                    (Fraction(child.depth) / child_prob, next(counter), child, child_prob),
                )
    raise NoGoalError(f"no goal within {max_expansions} exact expansions")


_DYADIC_ROWS_2 = (
    (Fraction(1, 2), Fraction(1, 2)),
    (Fraction(1, 4), Fraction(3, 4)),
    (Fraction(3, 4), Fraction(1, 4)),
    (Fraction(1), Fraction(0)),
    (Fraction(0), Fraction(1)),
)

# Tree rows always branch at least two ways with conditionals <= 3/4: a
# single-successor row would carry probability 1 and let a chain of goals
# sit exactly on the expansion bound's degenerate boundary.
_DYADIC_ROWS_3 = (
    (Fraction(1, 2), Fraction(1, 2), Fraction(0)),
    (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)),
    (Fraction(1, 4), Fraction(1, 4), Fraction(1, 2)),
    (Fraction(3, 4), Fraction(1, 8), Fraction(1, 8)),
    (Fraction(1, 2), Fraction(3, 8), Fraction(1, 8)),
    (Fraction(1, 4), Fraction(3, 4), Fraction(0)),
    (Fraction(3, 8), Fraction(5, 8), Fraction(0)),
    (Fraction(0), Fraction(1, 2), Fraction(1, 2)),
)


def random_tree_instance(
    rng: random.Random,
    *,
    max_depth: int = 14,
    max_nodes: int = 400,
    goal_count: int = 3,
) -> tuple[ExplicitTreeDomain, ExplicitTreePolicy]:
    """Random finite tree with dyadic conditionals and random goals.

    Dyadic probabilities keep exact costs well separated, so the
    floating-point search can be checked against rational arithmetic
    without ambiguity.  The root is never a goal; goals sit at depth 2
    or deeper (the depth/probability expansion bound counts the goal's
    path in units of depth, which a goal adjacent to the root can fail
    by the root expansion itself) and at least one goal is always
    reachable with positive probability.
    """
    zero_row = (Fraction(0), Fraction(0), Fraction(0))
    while True:
        children: list[list[int | None]] = [[None, None, None]]
        vectors: list[Sequence[Fraction]] = [rng.choice(_DYADIC_ROWS_3)]
        depths = [0]
        frontier = [0]
        while frontier:
            node = frontier.pop(rng.randrange(len(frontier)))
            row = vectors[node]
            wanted = sum(1 for p in row if p > 0)
            # A node either gets every positive-probability child or becomes
            # a dead end; partial allocation would leak probability mass.
            if depths[node] >= max_depth or len(children) + wanted > max_nodes:
                vectors[node] = zero_row
                continue
            for action in range(3):
                if row[action] > 0:
                    child = len(children)
                    children[node][action] = child
                    children.append([None, None, None])
                    depths.append(depths[node] + 1)
                    # bias toward leaves as the tree deepens to bound its size
                    if rng.random() < 0.20 + 0.04 * depths[node]:
                        vectors.append(zero_row)
                    else:
                        vectors.append(rng.choice(_DYADIC_ROWS_3))
                        frontier.append(child)
        candidates = [n for n in range(len(children)) if depths[n] >= 2]
        if not candidates:
            continue
        rng.shuffle(candidates)
        goals = frozenset(candidates[: max(1, min(goal_count, len(candidates)))])
        domain = ExplicitTreeDomain(children, [tuple(v) for v in vectors], goals, 3)
        return domain, ExplicitTreePolicy(domain)


def random_automaton_instance(
    rng: random.Random,
    *,
    state_count: int = 6,
) -> tuple[AutomatonDomain, AutomatonPolicy]:
    """Random deterministic automaton with a reachable non-initial goal."""
    while True:
        table = [
            [rng.randrange(state_count) for _ in range(2)] for _ in range(state_count)
        ]
        vectors = [rng.choice(_DYADIC_ROWS_2) for _ in range(state_count)]
        reachable: set[int] = set()
        frontier = [0]
        while frontier:
            state = frontier.pop()
            for action in range(2):
                if vectors[state][action] > 0:
                    nxt = table[state][action]
                    if nxt not in reachable:
                        reachable.add(nxt)
                        frontier.append(nxt)
        reachable.discard(0)
        if reachable:
            goal = rng.choice(sorted(reachable))
            domain = AutomatonDomain(table, frozenset({goal}), 2)
            return domain, AutomatonPolicy(vectors)
