"""Sokoban rules and boxoban-format level handling.

Levels use the boxoban ASCII encoding: ``#`` wall, `` `` floor, ``.``
goal, ``$`` box, ``@`` player, ``*`` box on goal, ``+`` player on goal;
each level is introduced by a ``; <id>`` line.  Action indices are fixed
as up=0, down=1, left=2, right=3 so external policy servers and
in-process policies agree on the ordering.

Blocked moves are no-ops rather than pruned actions: the transition
function stays total, and a uniform policy spends probability 1/4 per
action exactly like a 4-way network head would.  The domain performs no
deadlock pruning; search effort comes from the guiding policy and state
cuts alone.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass
from typing import Iterator, NamedTuple

from .core import PolicyTSError, SearchDomain

Cell = tuple[int, int]

UP, DOWN, LEFT, RIGHT = 0, 1, 2, 3
DELTAS: tuple[Cell, ...] = ((-1, 0), (1, 0), (0, -1), (0, 1))
ACTION_NAMES = ("up", "down", "left", "right")


class SokobanParseError(PolicyTSError):
    """Boxoban text that violates the format; names the level and line."""


class OracleBudgetExceeded(PolicyTSError):
    """The breadth-first oracle hit its node budget before an answer."""


class SokobanState(NamedTuple):
    player: Cell
    boxes: frozenset[Cell]


@dataclass(frozen=True)
class SokobanLevel:
    """Immutable level geometry; searches share it and move only states."""

    level_id: str
    width: int
    height: int
    walls: frozenset[Cell]
    goals: frozenset[Cell]
    boxes: frozenset[Cell]
    player: Cell

    def __post_init__(self) -> None:
        for name, cells in (("wall", self.walls), ("goal", self.goals), ("box", self.boxes)):
            for r, c in cells:
                if not (0 <= r < self.height and 0 <= c < self.width):
                    raise SokobanParseError(
                        f"level {self.level_id}: {name} at {(r, c)} out of bounds"
                    )
        if self.player in self.walls:
            raise SokobanParseError(f"level {self.level_id}: player on a wall")
        if self.walls & self.boxes:
            raise SokobanParseError(f"level {self.level_id}: box on a wall")
        if len(self.boxes) != len(self.goals):
            warnings.warn(
                f"level {self.level_id}: {len(self.boxes)} boxes vs "
                f"{len(self.goals)} goals",
                stacklevel=2,
            )

    def initial_state(self) -> SokobanState:
        return SokobanState(self.player, self.boxes)


_CHAR_BITS = {
    " ": (False, False, False, False),
    "#": (True, False, False, False),
    ".": (False, True, False, False),
    "$": (False, False, True, False),
    "*": (False, True, True, False),
    "@": (False, False, False, True),
    "+": (False, True, False, True),
}


def parse_boxoban(text: str) -> list[SokobanLevel]:
    """Parse a boxoban file into levels, preserving ids and file order.

    Raises :class:`SokobanParseError` on unknown characters, ragged rows,
    or a player count other than one, naming the level id and line.
    """
    levels: list[SokobanLevel] = []
    current_id: str | None = None
    rows: list[str] = []
    row_lines: list[int] = []

    def flush() -> None:
        nonlocal rows, row_lines
        if current_id is None:
            return
        if not rows:
            raise SokobanParseError(f"level {current_id}: no grid rows")
        width = len(rows[0])
        walls, goals, boxes, players = set(), set(), set(), []
        for r, row in enumerate(rows):
            if len(row) != width:
                raise SokobanParseError(
                    f"level {current_id}, line {row_lines[r]}: ragged row "
                    f"(length {len(row)}, expected {width})"
                )
            for c, ch in enumerate(row):
                bits = _CHAR_BITS.get(ch)
                if bits is None:
                    raise SokobanParseError(
                        f"level {current_id}, line {row_lines[r]}: unknown character {ch!r}"
                    )
                wall, goal, box, player = bits
                if wall:
                    walls.add((r, c))
                if goal:
                    goals.add((r, c))
                if box:
                    boxes.add((r, c))
                if player:
                    players.append((r, c))
        if len(players) != 1:
            raise SokobanParseError(
                f"level {current_id}: expected exactly one player, found {len(players)}"
            )
        levels.append(
            SokobanLevel(
                level_id=current_id,
                width=width,
                height=len(rows),
                walls=frozenset(walls),
                goals=frozenset(goals),
                boxes=frozenset(boxes),
                player=players[0],
            )
        )
        rows = []
        row_lines = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if line.startswith(";"):
            flush()
            current_id = line[1:].strip()
        elif line == "":
            continue
        else:
            if current_id is None:
                raise SokobanParseError(f"line {lineno}: grid row before any '; <id>' header")
            rows.append(line)
            row_lines.append(lineno)
    flush()
    return levels


def render_state(level: SokobanLevel, state: SokobanState) -> str:
    """ASCII grid of the level with the given boxes and player overlaid.

    This is also the state serialization used by the policy bridge.
    """
    lines = []
    for r in range(level.height):
        chars = []
        for c in range(level.width):
            cell = (r, c)
            if cell in level.walls:
                chars.append("#")
            elif cell in state.boxes:
                chars.append("*" if cell in level.goals else "$")
            elif cell == state.player:
                chars.append("+" if cell in level.goals else "@")
            elif cell in level.goals:
                chars.append(".")
            else:
                chars.append(" ")
        lines.append("".join(chars))
    return "\n".join(lines)


def serialize_level(level: SokobanLevel) -> str:
    """Boxoban text for ``level``: header line plus grid; round-trips
    byte-identically through :func:`parse_boxoban` (modulo trailing
    whitespace in the source)."""
    return f"; {level.level_id}\n" + render_state(level, level.initial_state()) + "\n"


def serialize_levels(levels: Iterator[SokobanLevel] | list[SokobanLevel]) -> str:
    return "".join(serialize_level(level) for level in levels)


def sokoban_transition(level: SokobanLevel, state: SokobanState, action: int) -> SokobanState:
    """One move; blocked moves (into walls, double boxes, or pushes against
    obstacles) leave the state unchanged."""
    dr, dc = DELTAS[action]
    pr, pc = state.player
    target = (pr + dr, pc + dc)
    if target in level.walls or not _in_bounds(level, target):
        return state
    if target in state.boxes:
        dest = (target[0] + dr, target[1] + dc)
        if dest in level.walls or dest in state.boxes or not _in_bounds(level, dest):
            return state
        moved = (state.boxes - {target}) | {dest}
        return SokobanState(target, moved)
    return SokobanState(target, state.boxes)


def _in_bounds(level: SokobanLevel, cell: Cell) -> bool:
    return 0 <= cell[0] < level.height and 0 <= cell[1] < level.width


def is_solved(level: SokobanLevel, state: SokobanState) -> bool:
    """True iff every box sits on a goal (vacuously true with zero boxes)."""
    return state.boxes <= level.goals


class SokobanDomain(SearchDomain):
    """Search-domain adapter around a :class:`SokobanLevel`."""

    def __init__(self, level: SokobanLevel) -> None:
        self.level = level

    @property
    def action_count(self) -> int:
        return 4

    @property
    def initial_state(self) -> SokobanState:
        return self.level.initial_state()

    def transition(self, state: SokobanState, action: int) -> SokobanState:
        return sokoban_transition(self.level, state, action)

    def is_goal(self, state: SokobanState) -> bool:
        return is_solved(self.level, state)

    def state_key(self, state: SokobanState):
        return (state.player, tuple(sorted(state.boxes)))

    def render(self, state: SokobanState) -> str:
        return render_state(self.level, state)


def bfs_oracle(level: SokobanLevel, node_budget: int = 1_000_000) -> int | None:
    """Shortest solution length by breadth-first search over state keys.

    Returns None when the reachable space is exhausted without a
    solution; raises :class:`OracleBudgetExceeded` after ``node_budget``
    dequeues, which is reported distinctly because it leaves
    solvability unknown.
    """
    domain = SokobanDomain(level)
    start = domain.initial_state
    if domain.is_goal(start):
        return 0
    visited = {domain.state_key(start)}
    queue: deque[tuple[SokobanState, int]] = deque([(start, 0)])
    dequeued = 0
    while queue:
        dequeued += 1
        if dequeued > node_budget:
            raise OracleBudgetExceeded(
                f"level {level.level_id}: budget of {node_budget} nodes exceeded"
            )
        state, depth = queue.popleft()
        for action in range(4):
            child = domain.transition(state, action)
            key = domain.state_key(child)
            if key in visited:
                continue
            visited.add(key)
            if domain.is_goal(child):
                return depth + 1
            queue.append((child, depth + 1))
    return None
