"""Grid-world maze trained with device-backed three-factor synapses.

Place cells (one per grid cell) connect to four action cells through a
place x action array of synapses.  Every action taken raises the eligibility
flag of its synapse; finding the cheese broadcasts an electrical reward to
the whole array, which potentiates exactly the synapses still flagged, i.e.
the last three place-action pairs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .neuro import ELIGIBILITY_STEPS, ThreeFactorSynapse

Cell = tuple[int, int]


class Action(enum.IntEnum):
    N = 0
    E = 1
    S = 2
    W = 3


ACTIONS = tuple(Action)
_MOVES = {Action.N: (-1, 0), Action.E: (0, 1), Action.S: (1, 0), Action.W: (0, -1)}


class Outcome(str, enum.Enum):
    MOVE = "Move"
    WALL = "Wall"
    TRAP = "Trap"
    CHEESE = "Cheese"


class End(str, enum.Enum):
    CHEESE = "Cheese"
    TRAP = "Trap"
    LOOP = "Loop"
    TIMEOUT = "Timeout"


@dataclass(frozen=True)
class MazeSpec:
    """Rows count from the north edge: ``(0, cols - 1)`` is the NE corner."""

    rows: int = 3
    cols: int = 3
    start: Cell = (1, 1)
    cheese: Cell = (0, 2)
    traps: frozenset = frozenset({(0, 0), (2, 0), (2, 2)})
    max_steps_per_trial: int = 30

    def __post_init__(self):
        object.__setattr__(self, "start", tuple(self.start))
        object.__setattr__(self, "cheese", tuple(self.cheese))
        object.__setattr__(self, "traps", frozenset(tuple(t) for t in self.traps))
        if self.rows < 1 or self.cols < 1 or self.max_steps_per_trial < 1:
            raise ValueError("maze dimensions and max_steps_per_trial must be positive")
        for cell in (self.start, self.cheese, *self.traps):
            if not self.in_bounds(cell):
                raise ValueError(f"cell {cell} outside the {self.rows}x{self.cols} grid")
        if self.start in self.traps or self.start == self.cheese:
            raise ValueError("start must not be a trap or the cheese")
        if self.cheese in self.traps:
            raise ValueError("cheese must not be a trap")

    def in_bounds(self, cell: Cell) -> bool:
        r, c = cell
        return 0 <= r < self.rows and 0 <= c < self.cols

    def cells(self) -> Iterator[Cell]:
        for r in range(self.rows):
            for c in range(self.cols):
                yield (r, c)


def env_step(maze: MazeSpec, place: Cell, action: Action) -> tuple[Cell, Outcome]:
    dr, dc = _MOVES[Action(action)]
    target = (place[0] + dr, place[1] + dc)
    if not maze.in_bounds(target):
        return place, Outcome.WALL
    if target in maze.traps:
        return maze.start, Outcome.TRAP
    if target == maze.cheese:
        return target, Outcome.CHEESE
    return target, Outcome.MOVE


@dataclass(frozen=True)
class Step:
    place: Cell
    action: Action
    outcome: Outcome


@dataclass
class Trajectory:
    steps: list[Step] = field(default_factory=list)
    end: End = End.TIMEOUT

    def __len__(self):
        return len(self.steps)

    def pairs(self) -> list[tuple[Cell, Action]]:
        return [(s.place, s.action) for s in self.steps]

    @property
    def hit_trap(self) -> bool:
        return any(s.outcome is Outcome.TRAP for s in self.steps)


@dataclass
class QTable:
    """Synaptic conductance per (place, action), shape ``(rows, cols, 4)``."""

    conductance: np.ndarray

    def row(self, place: Cell) -> np.ndarray:
        return self.conductance[place[0], place[1]]

    def greedy_action(self, place: Cell, tie_rng: np.random.Generator | None = None) -> Action:
        """Strongest action; ties resolve in N, E, S, W order unless ``tie_rng`` is given."""
        row = self.row(place)
        best = np.flatnonzero(row == row.max())
        if tie_rng is None or len(best) == 1:
            return Action(int(best[0]))
        return Action(int(tie_rng.choice(best)))

    def rows(self):
        r, c, _ = self.conductance.shape
        for i in range(r):
            for j in range(c):
                for a in ACTIONS:
                    yield i, j, a.name, float(self.conductance[i, j, a])


# -- synapse arrays ----------------------------------------------------------

class SynapseArray:
    """One :class:`ThreeFactorSynapse` per (place, action), sharing a device RNG."""

    def __init__(self, maze: MazeSpec, factory: Callable[[], ThreeFactorSynapse],
                 rng: np.random.Generator):
        self.shape = (maze.rows, maze.cols, len(ACTIONS))
        self.synapses: dict[tuple[Cell, Action], ThreeFactorSynapse] = {
            (cell, a): factory() for cell in maze.cells() for a in ACTIONS}
        self.rng = rng
        self._flagged: set[tuple[Cell, Action]] = set()
        any_params = next(iter(self.synapses.values())).device.params
        if any(s.device.state.step_index != 0 for s in self.synapses.values()):
            raise ValueError("synapse array must start fully in HRS")
        self.g_hrs, self.g_lrs = any_params.g_hrs, any_params.g_lrs

    def conductance_row(self, place: Cell) -> np.ndarray:
        return np.array([self.synapses[(place, a)].conductance for a in ACTIONS])

    def flag(self, place: Cell, action: Action) -> None:
        """Raise eligibility on one pair and tick every other flagged pair."""
        key = (place, Action(action))
        for other in list(self._flagged):
            if other != key:
                syn = self.synapses[other].tick_eligibility()
                if syn.eligibility_remaining == 0:
                    self._flagged.discard(other)
        self.synapses[key].raise_eligibility()
        self._flagged.add(key)

    def clear_eligibility(self) -> None:
        for key in self._flagged:
            self.synapses[key].eligibility_remaining = 0
        self._flagged.clear()

    def reward(self) -> set[tuple[Cell, Action]]:
        """Broadcast the reward pulse to every synapse; return those it latched."""
        switched = {key for key, syn in self.synapses.items() if syn.apply_reward(self.rng)}
        self._flagged.clear()
        return switched

    def eligible(self) -> set[tuple[Cell, Action]]:
        return {k for k, s in self.synapses.items() if s.eligibility_remaining > 0}

    def potentiated(self) -> set[tuple[Cell, Action]]:
        return {k for k, s in self.synapses.items() if s.potentiated}

    def qtable(self) -> QTable:
        g = np.empty(self.shape)
        for ((r, c), a), syn in self.synapses.items():
            g[r, c, a] = syn.conductance
        return QTable(g)


class BooleanSynapseArray:
    """Software reference: the eligibility-window rule on plain booleans."""

    def __init__(self, maze: MazeSpec, g_hrs: float = 1e-7, g_lrs: float = 1e-4):
        self.shape = (maze.rows, maze.cols, len(ACTIONS))
        self.g_hrs, self.g_lrs = g_hrs, g_lrs
        self.weights = np.zeros(self.shape, dtype=bool)
        self.trace = np.zeros(self.shape, dtype=int)

    def conductance_row(self, place: Cell) -> np.ndarray:
        return np.where(self.weights[place[0], place[1]], self.g_lrs, self.g_hrs)

    def flag(self, place: Cell, action: Action) -> None:
        np.subtract(self.trace, 1, out=self.trace, where=self.trace > 0)
        self.trace[place[0], place[1], int(action)] = ELIGIBILITY_STEPS

    def clear_eligibility(self) -> None:
        self.trace[:] = 0

    def reward(self) -> set[tuple[Cell, Action]]:
        fresh = (self.trace > 0) & ~self.weights
        self.weights |= self.trace > 0
        self.trace[:] = 0
        return {((int(r), int(c)), Action(int(a))) for r, c, a in zip(*np.nonzero(fresh))}

    def eligible(self) -> set[tuple[Cell, Action]]:
        return {((int(r), int(c)), Action(int(a))) for r, c, a in zip(*np.nonzero(self.trace))}

    def potentiated(self) -> set[tuple[Cell, Action]]:
        return {((int(r), int(c)), Action(int(a))) for r, c, a in zip(*np.nonzero(self.weights))}

    def qtable(self) -> QTable:
        return QTable(np.where(self.weights, self.g_lrs, self.g_hrs))


def device_synapse_array(maze: MazeSpec, params, rng: np.random.Generator, **protocol) -> SynapseArray:
    """Array of synapses built from a (non-volatile) device profile."""
    return SynapseArray(maze, lambda: ThreeFactorSynapse.from_params(params, **protocol), rng)


# -- agent -------------------------------------------------------------------

def select_action(qrow, rng: np.random.Generator, epsilon: float) -> Action:
    """Epsilon-greedy over conductances, with uniformly random tie-breaking."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    if rng.random() < epsilon:
        return Action(int(rng.integers(len(ACTIONS))))
    qrow = np.asarray(qrow)
    best = np.flatnonzero(qrow == qrow.max())
    if len(best) == 1:
        return Action(int(best[0]))
    return Action(int(rng.choice(best)))


def run_trial(maze: MazeSpec, synapses, rng: np.random.Generator,
              epsilon: float) -> tuple[Trajectory, bool]:
    """One exploration trial, ending at the cheese or after ``max_steps_per_trial``.

    Traps send the agent back to the start without ending the trial.
    """
    synapses.clear_eligibility()
    traj = Trajectory()
    place = maze.start
    for _ in range(maze.max_steps_per_trial):
        action = select_action(synapses.conductance_row(place), rng, epsilon)
        synapses.flag(place, action)
        nxt, outcome = env_step(maze, place, action)
        traj.steps.append(Step(place, action, outcome))
        place = nxt
        if outcome is Outcome.CHEESE:
            synapses.reward()
            traj.end = End.CHEESE
            return traj, True
    traj.end = End.TIMEOUT
    return traj, False


def linear_epsilon(start: float = 1.0, end: float = 0.1, fraction: float = 0.5):
    """Epsilon decaying linearly from ``start`` to ``end`` over the first ``fraction`` of trials."""

    def schedule(trial: int, n_trials: int) -> float:
        span = fraction * n_trials
        if span <= 0:
            return end
        return max(end, start - (start - end) * trial / span)

    return schedule


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    steps: int
    outcome: End
    potentiated: int


def train(maze: MazeSpec, synapses, n_trials: int, rng: np.random.Generator,
          epsilon_schedule=None, log: list | None = None,
          trajectories: list | None = None) -> QTable:
    """Run ``n_trials`` trials and return the learned conductance table.

    Pass a list as ``log`` to collect one :class:`TrialRecord` per trial and as
    ``trajectories`` to keep every :class:`Trajectory`.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    schedule = epsilon_schedule or linear_epsilon()
    for i in range(n_trials):
        traj, _ = run_trial(maze, synapses, rng, schedule(i, n_trials))
        if log is not None:
            log.append(TrialRecord(i, len(traj), traj.end, len(synapses.potentiated())))
        if trajectories is not None:
            trajectories.append(traj)
    return synapses.qtable()


def greedy_path(qtable: QTable, maze: MazeSpec,
                tie_rng: np.random.Generator | None = None) -> Trajectory:
    """Follow the strongest synapse from the start until cheese, trap or a repeated pair."""
    traj = Trajectory()
    seen = set()
    place = maze.start
    while True:
        action = qtable.greedy_action(place, tie_rng)
        if (place, action) in seen:
            traj.end = End.LOOP
            return traj
        seen.add((place, action))
        nxt, outcome = env_step(maze, place, action)
        traj.steps.append(Step(place, action, outcome))
        if outcome is Outcome.CHEESE:
            traj.end = End.CHEESE
            return traj
        if outcome is Outcome.TRAP:
            traj.end = End.TRAP
            return traj
        place = nxt


def agent_and_device_rngs(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent streams for action selection and device noise."""
    agent, device = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(agent), np.random.default_rng(device)
