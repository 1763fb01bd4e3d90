"""Ready-made policies: uniform over legal actions, and table lookups."""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .core import ExactPolicy, Policy, SearchDomain, TrajectoryNode


class UniformPolicy(ExactPolicy):
    """Equal probability over the domain's legal actions.

    Illegal actions get probability 0 and the remaining mass is
    renormalized; a dead end (no legal action) yields the all-zero
    vector.  Markovian because legality depends only on the state.
    """

    is_markov = True

    def __init__(self, domain: SearchDomain) -> None:
        self._domain = domain
        self._n = domain.action_count
        if self._n < 1:
            raise ValueError("domain must have at least one action")
        self._full = tuple([1.0 / self._n] * self._n)  # hot path, shared

    def conditionals(self, node: TrajectoryNode) -> Sequence[float]:
        legal = self._domain.legal_actions(node.state)
        if len(legal) == self._n:
            return self._full
        out = [0.0] * self._n
        if legal:
            p = 1.0 / len(legal)
            for a in legal:
                out[a] = p
        return out

    def exact_conditionals(self, node: TrajectoryNode) -> Sequence[Fraction]:
        legal = self._domain.legal_actions(node.state)
        out = [Fraction(0)] * self._n
        if legal:
            p = Fraction(1, len(legal))
            for a in legal:
                out[a] = p
        return out


def make_uniform_policy(domain: SearchDomain) -> UniformPolicy:
    """Uniform guiding policy for ``domain`` (the no-learning baseline)."""
    return UniformPolicy(domain)


class TablePolicy(Policy):
    """Markov policy backed by a ``rendered state -> probabilities`` table.

    ``render`` maps an environment state to the table key (for Sokoban,
    the ASCII grid).  States missing from the table fall back to the
    uniform vector, mirroring the reference bridge servers so that
    in-process and bridged searches see identical conditionals.
    """

    def __init__(
        self,
        table: Mapping[str, Sequence[float]],
        action_count: int,
        render: Callable[[object], str],
        *,
        is_markov: bool = True,
    ) -> None:
        self._table = {k: tuple(v) for k, v in table.items()}
        self._n = action_count
        self._render = render
        self.is_markov = is_markov
        self._uniform = tuple([1.0 / action_count] * action_count)
        for key, row in self._table.items():
            if len(row) != action_count:
                raise ValueError(f"table row for {key!r} has {len(row)} entries")
            if abs(sum(row) - 1.0) > 1e-9 or any(p < 0 for p in row):
                raise ValueError(f"table row for {key!r} is not a distribution")

    def conditionals(self, node: TrajectoryNode) -> Sequence[float]:
        return self._table.get(self._render(node.state), self._uniform)


class ConstantPolicy(ExactPolicy):
    """One fixed conditional vector applied at every node.

    Handy for small policy-combination tests; exact when the vector is
    given as rationals.
    """

    is_markov = True

    def __init__(self, vector: Sequence[Fraction | float | str]) -> None:
        self._exact = [Fraction(v) for v in vector]
        if sum(self._exact) != 1 or any(v < 0 for v in self._exact):
            raise ValueError("vector must be a probability distribution")
        self._float = [float(v) for v in self._exact]

    def conditionals(self, node: TrajectoryNode) -> Sequence[float]:
        return self._float

    def exact_conditionals(self, node: TrajectoryNode) -> Sequence[Fraction]:
        return self._exact
