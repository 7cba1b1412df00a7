"""Neuromorphic units built from optomemristor cells.

* :class:`ThreeFactorSynapse`: a non-volatile cell in inverted polarity.  An
  optical eligibility flag lowers its threshold below the amplitude of a
  global electrical reward pulse, so only flagged synapses potentiate.
* :class:`ShuntingDendrite`: a volatile cell whose threshold is raised by
  light, so an optical input shunts the excitatory electrical one.
* :class:`DendriticNeuron`: two crossed shunting dendrites and a soma
  threshold, which together compute XOR.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .device import (
    SUBTHRESHOLD_BAND,
    DeviceKind,
    DeviceParams,
    Optomemristor,
    StimulusSample,
    device_current,
    effective_threshold,
    latency_mean,
)

ELIGIBILITY_STEPS = 3
#: A pulse must outlast this many mean latencies to count as a guaranteed switch.
LATENCY_MARGIN = 10.0


@dataclass
class ThreeFactorSynapse:
    """Device-backed synapse: optical eligibility flag x electrical reward.

    The flag is a stepped trace: raising it arms a 3-step countdown, and a
    reward pulse delivered while the countdown is non-zero switches the cell
    to LRS.  Construction checks that the pulse sits below the dark
    switching band, above the flagged threshold, and lasts at least ten mean
    latencies, so the outcome is deterministic in practice.
    """

    device: Optomemristor
    bias_voltage: float = 0.1
    flag_power: float = 0.2e-3
    reward_amplitude: float = 0.4
    reward_width: float = 500e-9
    eligibility_remaining: int = 0

    def __post_init__(self):
        p = self.device.params
        if p.kind is not DeviceKind.NON_VOLATILE or p.polarity_sign != -1:
            raise ValueError("three-factor synapse needs a NonVolatile cell with polarity_sign = -1")
        vth_flag = effective_threshold(p, self.flag_power)
        if not self.reward_amplitude < SUBTHRESHOLD_BAND * p.v_th_dark:
            raise ValueError("reward pulse would switch the cell in the dark")
        if not self.reward_amplitude > vth_flag:
            raise ValueError("reward pulse does not exceed the flagged threshold")
        if not abs(self.bias_voltage) < SUBTHRESHOLD_BAND * vth_flag:
            raise ValueError("bias alone would switch a flagged cell")
        if self.reward_width < LATENCY_MARGIN * latency_mean(p, self.reward_amplitude - vth_flag):
            raise ValueError("reward pulse too short for a reliable switch")

    @classmethod
    def from_params(cls, params: DeviceParams, **protocol) -> "ThreeFactorSynapse":
        """Build from a device profile, mounting the cell in inverted polarity."""
        params = replace(params, polarity_sign=-1)
        return cls(Optomemristor(params), **protocol)

    @property
    def conductance(self) -> float:
        return self.device.conductance

    @property
    def potentiated(self) -> bool:
        return self.device.state.latched

    def raise_eligibility(self) -> "ThreeFactorSynapse":
        self.eligibility_remaining = ELIGIBILITY_STEPS
        return self

    def tick_eligibility(self) -> "ThreeFactorSynapse":
        if self.eligibility_remaining > 0:
            self.eligibility_remaining -= 1
        return self

    def apply_reward(self, rng: np.random.Generator) -> bool:
        """Deliver the reward pulse; True if it latched the cell.

        The flag light stays on during the pulse when the synapse is eligible.
        Eligibility is cleared afterwards.
        """
        power = self.flag_power if self.eligibility_remaining > 0 else 0.0
        was_latched = self.device.state.latched
        self.device.apply(StimulusSample(self.reward_amplitude, power, self.reward_width), rng)
        self.eligibility_remaining = 0
        return self.device.state.latched and not was_latched

    def expose(self, duration: float, rng: np.random.Generator, voltage: float | None = None) -> None:
        """Flag light with no reward pulse, at the standing bias unless given."""
        v = self.bias_voltage if voltage is None else voltage
        self.device.apply(StimulusSample(v, self.flag_power, duration), rng)


@dataclass
class ShuntingDendrite:
    """Volatile cell: electrical pulse = excitation, light = shunting inhibition."""

    device: Optomemristor
    excit_amplitude: float = 0.8
    excit_width: float = 5e-6
    inhib_power: float = 2e-3

    def __post_init__(self):
        p = self.device.params
        if p.kind is not DeviceKind.VOLATILE or p.polarity_sign != 1:
            raise ValueError("shunting dendrite needs a Volatile cell with polarity_sign = +1")
        if not self.excit_amplitude > p.v_th_dark:
            raise ValueError("excitatory pulse must exceed the dark threshold")
        if not effective_threshold(p, self.inhib_power) > self.excit_amplitude:
            raise ValueError("inhibitory light must lift the threshold above the pulse")

    @classmethod
    def from_params(cls, params: DeviceParams, **protocol) -> "ShuntingDendrite":
        return cls(Optomemristor(params), **protocol)

    @property
    def shunt_is_strict(self) -> bool:
        """True when the inhibited pulse also stays below the staircase band."""
        vth = effective_threshold(self.device.params, self.inhib_power)
        return self.excit_amplitude < SUBTHRESHOLD_BAND * vth

    @property
    def lrs_read_current(self) -> float:
        p = self.device.params
        return p.g_lrs * self.excit_amplitude

    def response(self, excitatory: int, inhibitory: int, rng: np.random.Generator) -> float:
        """Soma-side current at the end of the pulse window.

        Negative photocurrent is not transmitted (counts as zero).  The cell is
        left to relax in the dark afterwards so it can be reused.
        """
        v = self.excit_amplitude if excitatory else 0.0
        power = self.inhib_power if inhibitory else 0.0
        dev = self.device
        dev.apply(StimulusSample(v, power, self.excit_width), rng)
        current = max(0.0, device_current(dev.params, dev.state, v, power))
        dev.apply(StimulusSample(0.0, 0.0, dev.params.tau_relax), rng)
        return current


@dataclass
class NeuronEvaluation:
    x: int
    y: int
    i_d1: float
    i_d2: float
    i_sum: float
    output: int


@dataclass
class DendriticNeuron:
    d1: ShuntingDendrite
    d2: ShuntingDendrite
    soma_threshold: float

    @classmethod
    def build(cls, params: DeviceParams, soma_threshold: float | None = None,
              **protocol) -> "DendriticNeuron":
        d1 = ShuntingDendrite.from_params(params, **protocol)
        d2 = ShuntingDendrite.from_params(params, **protocol)
        if soma_threshold is None:
            soma_threshold = 0.5 * d1.lrs_read_current
        neuron = cls(d1, d2, soma_threshold)
        neuron.check()
        return neuron

    def check(self) -> None:
        i_lrs = min(self.d1.lrs_read_current, self.d2.lrs_read_current)
        if not 0 < self.soma_threshold < i_lrs:
            raise ValueError(f"soma threshold {self.soma_threshold} outside (0, {i_lrs})")

    def evaluate(self, x: int, y: int, rng: np.random.Generator) -> NeuronEvaluation:
        # D1: X excites, Y shunts.  D2: the reverse.
        i1 = self.d1.response(x, y, rng)
        i2 = self.d2.response(y, x, rng)
        total = i1 + i2
        return NeuronEvaluation(x, y, i1, i2, total, int(total > self.soma_threshold))

    def output(self, x: int, y: int, rng: np.random.Generator) -> int:
        return self.evaluate(x, y, rng).output
