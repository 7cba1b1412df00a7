"""Single-neuron XOR from two crossed shunting dendrites."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .neuro import DendriticNeuron, NeuronEvaluation

INPUT_PAIRS = ((0, 0), (1, 0), (0, 1), (1, 1))


def xor_truth(x: int, y: int) -> int:
    return int(bool(x) != bool(y))


@dataclass
class XorReport:
    soma_threshold: float
    rows: dict[int, list[NeuronEvaluation]] = field(default_factory=dict)  # by seed

    @property
    def seeds(self) -> list[int]:
        return list(self.rows)

    def seed_passes(self, seed: int) -> bool:
        return all(ev.output == xor_truth(ev.x, ev.y) for ev in self.rows[seed])

    @property
    def n_passed(self) -> int:
        return sum(self.seed_passes(s) for s in self.rows)

    @property
    def all_passed(self) -> bool:
        return self.n_passed == len(self.rows)

    @property
    def min_margin(self) -> float:
        """Smallest ``|i_sum - soma_threshold|`` over every pair and seed."""
        return min(abs(ev.i_sum - self.soma_threshold)
                   for evs in self.rows.values() for ev in evs)


def run_xor(neuron: DendriticNeuron, seeds: Iterable[int]) -> XorReport:
    seeds = list(seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    report = XorReport(neuron.soma_threshold)
    for seed in seeds:
        rng = np.random.default_rng(seed)
        report.rows[seed] = [neuron.evaluate(x, y, rng) for x, y in INPUT_PAIRS]
    return report


def threshold_plane_data(neuron: DendriticNeuron, seed: int = 0) -> list[tuple[int, int, float]]:
    """Summed soma current over the binary input plane, for a threshold-surface plot."""
    rng = np.random.default_rng(seed)
    return [(x, y, neuron.evaluate(x, y, rng).i_sum) for x, y in INPUT_PAIRS]
