"""Behavioral state-machine model of a single chalcogenide optomemristor.

The cell responds to two inputs, an electrical bias ``V`` and an optical power
``P`` at the design wavelength.  Illumination does three things:

* shifts the switching threshold, ``V_th(P) = V_th0 + s * k_vth * ln(1 + P/p_ref)``
  where ``s`` is the device polarity (+1 raises the threshold, -1 lowers it);
* adds a photovoltaic offset, ``V0(P) = s * k_v0 * ln(1 + P/p_ref)``, so that the
  read current is ``I = G * (V - V0)``;
* above ``p_volatile`` it removes the non-volatility of Ag/Ag cells.

Switching is stochastic: the waiting time before a SET is exponential with
mean ``tau0 * exp(-dV / v_c)`` where ``dV = V - V_th(P)``.  Inside the
sub-threshold band ``[0.8 V_th, V_th)`` the same law produces single
staircase steps (short-term plasticity) instead of a full SET.

All randomness comes from an injected ``numpy.random.Generator``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

#: Optical power at which the threshold shift equals ``v_th_dark`` (100 %).
VTH_CALIBRATION_POWER = 0.5e-3
#: Open-circuit voltage anchor: 455 mV at 1 mW.
V0_CALIBRATION_POWER = 1.0e-3
V0_CALIBRATION_VALUE = 0.455
#: Lower clamp of the effective threshold, as a fraction of ``v_th_dark``.
VTH_CLAMP_FRACTION = 0.05
#: Lower edge of the stochastic staircase band, as a fraction of ``V_th(P)``.
SUBTHRESHOLD_BAND = 0.8
#: Relative slack when summed sample durations are compared with tau_relax.
TIME_RTOL = 1e-9
DESIGN_WAVELENGTH_NM = 637.0


class DeviceKind(str, enum.Enum):
    NON_VOLATILE = "NonVolatile"
    VOLATILE = "Volatile"


class Transition(str, enum.Enum):
    SET = "Set"
    PARTIAL_SET = "PartialSet"
    RESET = "Reset"


class Cause(str, enum.Enum):
    ELECTRICAL = "Electrical"
    OPTICAL = "Optical"
    COINCIDENT = "Coincident"
    RELAXATION = "Relaxation"


class MalformedWaveformError(ValueError):
    """A stimulus sample carries a non-finite or out-of-range value."""


@dataclass(frozen=True)
class DeviceParams:
    """Calibrated phenomenological parameters of one optomemristor.

    ``k_vth`` and ``k_v0`` default to ``None``, meaning "derive from the
    calibration anchors": a 100 % threshold shift at 0.5 mW and a 455 mV
    open-circuit voltage at 1 mW.
    """

    kind: DeviceKind = DeviceKind.VOLATILE
    polarity_sign: int = 1
    v_th_dark: float = 0.4
    v_hold: float = 0.1
    g_hrs: float = 0.1e-6
    g_lrs: float = 100e-6
    n_intermediate: int = 5
    k_vth: float | None = None
    k_v0: float | None = None
    p_ref: float = 0.1e-3
    tau0: float = 1e-3
    v_c: float = 50e-3
    tau_relax: float = 1e-6
    p_volatile: float = 0.1e-3
    i_compliance: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "kind", DeviceKind(self.kind))
        if self.polarity_sign not in (1, -1):
            raise ValueError(f"polarity_sign must be +1 or -1, got {self.polarity_sign}")
        if not self.g_lrs > self.g_hrs > 0:
            raise ValueError("need g_lrs > g_hrs > 0")
        if not self.v_th_dark > self.v_hold >= 0:
            raise ValueError("need v_th_dark > v_hold >= 0")
        for name in ("tau0", "v_c", "p_ref", "tau_relax", "i_compliance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.p_volatile < 0:
            raise ValueError("p_volatile must be non-negative")
        if int(self.n_intermediate) != self.n_intermediate or self.n_intermediate < 1:
            raise ValueError("n_intermediate must be an integer >= 1")
        object.__setattr__(self, "n_intermediate", int(self.n_intermediate))
        if self.k_vth is None:
            k = self.v_th_dark / math.log1p(VTH_CALIBRATION_POWER / self.p_ref)
            object.__setattr__(self, "k_vth", k)
        if self.k_v0 is None:
            k = V0_CALIBRATION_VALUE / math.log1p(V0_CALIBRATION_POWER / self.p_ref)
            object.__setattr__(self, "k_v0", k)

    def staircase_conductance(self, step_index: int) -> float:
        frac = step_index / self.n_intermediate
        return self.g_hrs + frac * (self.g_lrs - self.g_hrs)


@dataclass(frozen=True)
class DeviceState:
    """Mutable-by-replacement switching state.

    ``latency_mean`` remembers the mean the pending wait was drawn (or last
    rescaled) with; ``sub_hold_time`` accumulates the time a volatile cell has
    spent below its holding voltage.
    """

    step_index: int
    conductance: float
    latched: bool = False
    pending_latency: float | None = None
    latency_mean: float | None = None
    sub_hold_time: float = 0.0
    time: float = 0.0

    @classmethod
    def hrs(cls, params: DeviceParams, time: float = 0.0) -> "DeviceState":
        return cls(step_index=0, conductance=params.g_hrs, time=time)

    @classmethod
    def lrs(cls, params: DeviceParams, time: float = 0.0) -> "DeviceState":
        n = params.n_intermediate
        return cls(step_index=n, conductance=params.g_lrs, latched=True, time=time)


@dataclass(frozen=True)
class StimulusSample:
    voltage: float
    optical_power: float
    duration: float

    def __post_init__(self):
        _check_sample(self.voltage, self.optical_power, self.duration)


Waveform = Sequence[StimulusSample]


@dataclass(frozen=True)
class SwitchEvent:
    time: float
    transition: Transition
    cause: Cause


def _check_sample(voltage, optical_power, duration):
    if not (math.isfinite(voltage) and math.isfinite(optical_power) and math.isfinite(duration)):
        raise MalformedWaveformError(
            f"non-finite stimulus (V={voltage}, P={optical_power}, dt={duration})")
    if optical_power < 0:
        raise MalformedWaveformError(f"optical power must be >= 0, got {optical_power}")
    if duration <= 0:
        raise MalformedWaveformError(f"duration must be > 0, got {duration}")


# -- static response ---------------------------------------------------------

def effective_threshold(params: DeviceParams, optical_power: float) -> float:
    """Switching voltage under illumination, clamped at 5 % of the dark value."""
    shift = params.polarity_sign * params.k_vth * math.log1p(optical_power / params.p_ref)
    return max(VTH_CLAMP_FRACTION * params.v_th_dark, params.v_th_dark + shift)


def open_circuit_voltage(params: DeviceParams, optical_power: float) -> float:
    return params.polarity_sign * params.k_v0 * math.log1p(optical_power / params.p_ref)


def device_current(params: DeviceParams, state: DeviceState, voltage: float,
                   optical_power: float) -> float:
    """Read current ``G * (V - V0(P))`` capped at the compliance current."""
    i = state.conductance * (voltage - open_circuit_voltage(params, optical_power))
    cap = params.i_compliance
    return min(cap, max(-cap, i))


def effective_power(optical_power: float, wavelength_nm: float = DESIGN_WAVELENGTH_NM,
                    absorption: Callable[[float], float] | None = None) -> float:
    """Optical power seen by the cell at another wavelength.

    ``absorption`` maps wavelength (nm) to the cavity absorptance; when given,
    the power is scaled by ``A(lambda) / A(637 nm)``.  Without it the hook is a
    no-op.
    """
    if absorption is None:
        return optical_power
    return optical_power * absorption(wavelength_nm) / absorption(DESIGN_WAVELENGTH_NM)


# -- stochastic switching ----------------------------------------------------

def latency_mean(params: DeviceParams, delta_v: float) -> float:
    return params.tau0 * math.exp(-delta_v / params.v_c)


def sample_latency(params: DeviceParams, delta_v: float, rng: np.random.Generator) -> float:
    """Draw a time-to-switch from Exponential(mean = tau0 * exp(-dV / v_c))."""
    mean = latency_mean(params, delta_v)
    while True:
        draw = rng.exponential(mean)
        if draw > 0:
            return float(draw)


def _set_cause(params: DeviceParams, voltage: float, optical_power: float) -> Cause:
    if optical_power == 0 or voltage >= SUBTHRESHOLD_BAND * params.v_th_dark:
        return Cause.ELECTRICAL
    return Cause.COINCIDENT


def step(params: DeviceParams, state: DeviceState, sample: StimulusSample,
         rng: np.random.Generator) -> tuple[DeviceState, list[SwitchEvent]]:
    """Advance the cell by one constant-drive interval.

    The interval is resolved exactly (event-driven), so several staircase
    steps can occur inside one long sample.  Rules, in order:

    1. SET path when ``V >= 0.8 * V_th(P)``: consume the pending latency;
       above threshold an expiry completes the SET, inside the band it adds
       one staircase step.
    2. Volatile cells relax to HRS after ``tau_relax`` below ``v_hold``.
    3. Latched non-volatile cells reset at ``|V| < v_hold`` under light
       brighter than ``p_volatile``.
    """
    v, p, duration = sample.voltage, sample.optical_power, sample.duration
    _check_sample(v, p, duration)

    n = params.n_intermediate
    t0 = state.time
    step_index = state.step_index
    latched = state.latched
    pending = state.pending_latency
    pending_mean = state.latency_mean
    sub_hold = state.sub_hold_time
    events: list[SwitchEvent] = []
    last_t = t0

    # (1) SET / staircase
    vth = effective_threshold(params, p)
    in_band = v >= SUBTHRESHOLD_BAND * vth
    if in_band and not latched:
        supra = v >= vth
        mean = latency_mean(params, v - vth)
        cause = _set_cause(params, v, p)
        elapsed = 0.0
        while True:
            if pending is None:
                pending = sample_latency(params, v - vth, rng)
            elif pending_mean != mean:
                pending *= mean / pending_mean
            pending_mean = mean
            if elapsed + pending <= duration:
                elapsed += pending
                pending = None
                pending_mean = None
                step_index = n if supra else step_index + 1
                last_t = t0 + elapsed
                if step_index >= n:
                    step_index = n
                    latched = True
                    events.append(SwitchEvent(last_t, Transition.SET, cause))
                    break
                events.append(SwitchEvent(last_t, Transition.PARTIAL_SET, cause))
            else:
                pending -= duration - elapsed
                break
    elif not in_band:
        pending = None
        pending_mean = None

    # (2) volatile relaxation
    if params.kind is DeviceKind.VOLATILE:
        if v < params.v_hold:
            before = sub_hold
            sub_hold += duration
            if sub_hold >= params.tau_relax * (1 - TIME_RTOL) and step_index > 0:
                crossing = t0 + max(0.0, params.tau_relax - before)
                last_t = max(last_t, crossing)
                events.append(SwitchEvent(last_t, Transition.RESET, Cause.RELAXATION))
                step_index, latched, pending, pending_mean = 0, False, None, None
        else:
            sub_hold = 0.0

    # (3) non-volatile loses non-volatility under light at zero bias
    elif latched and abs(v) < params.v_hold and p > params.p_volatile:
        events.append(SwitchEvent(last_t, Transition.RESET, Cause.OPTICAL))
        step_index, latched, pending, pending_mean = 0, False, None, None

    new_state = DeviceState(
        step_index=step_index,
        conductance=params.staircase_conductance(step_index),
        latched=latched,
        pending_latency=pending,
        latency_mean=pending_mean,
        sub_hold_time=sub_hold,
        time=t0 + duration,
    )
    return new_state, events


def reset_device(state: DeviceState, params: DeviceParams) -> DeviceState:
    """Force the cell back to HRS; idempotent."""
    return replace(state, step_index=0, conductance=params.g_hrs, latched=False,
                   pending_latency=None, latency_mean=None, sub_hold_time=0.0)


# -- traces ------------------------------------------------------------------

@dataclass(frozen=True)
class TraceRow:
    time_s: float
    voltage_V: float
    optical_power_W: float
    current_A: float
    conductance_S: float
    event: str


@dataclass
class Trace:
    rows: list[TraceRow] = field(default_factory=list)
    events: list[SwitchEvent] = field(default_factory=list)
    final_state: DeviceState | None = None


def trace_row(params: DeviceParams, state: DeviceState, sample: StimulusSample,
              events: Sequence[SwitchEvent]) -> TraceRow:
    """Row describing ``state`` at the end of ``sample``."""
    return TraceRow(
        time_s=state.time,
        voltage_V=sample.voltage,
        optical_power_W=sample.optical_power,
        current_A=device_current(params, state, sample.voltage, sample.optical_power),
        conductance_S=state.conductance,
        event=";".join(e.transition.value for e in events),
    )


def simulate(params: DeviceParams, waveform: Iterable[StimulusSample],
             rng: np.random.Generator, state: DeviceState | None = None) -> Trace:
    """Run a waveform through the cell, recording the state at the end of each sample."""
    if state is None:
        state = DeviceState.hrs(params)
    trace = Trace()
    for sample in waveform:
        state, events = step(params, state, sample, rng)
        trace.events.extend(events)
        trace.rows.append(trace_row(params, state, sample, events))
    trace.final_state = state
    return trace


def sweep_grid(v_start: float, v_stop: float, v_step: float, round_trip: bool = False) -> np.ndarray:
    if v_step == 0 or not all(map(math.isfinite, (v_start, v_stop, v_step))):
        raise ValueError("empty sweep grid")
    n = math.floor((v_stop - v_start) / v_step + 1e-9)
    if n < 0:
        raise ValueError("empty sweep grid: v_step points away from v_stop")
    grid = v_start + v_step * np.arange(n + 1)
    if round_trip:
        grid = np.concatenate([grid, grid[-2::-1]])
    return grid


def sweep_trace(params: DeviceParams, v_start: float, v_stop: float, v_step: float,
                optical_power: float, rng: np.random.Generator, dwell: float = 1e-3,
                round_trip: bool = False, state: DeviceState | None = None) -> Trace:
    grid = sweep_grid(v_start, v_stop, v_step, round_trip)
    waveform = [StimulusSample(float(v), optical_power, dwell) for v in grid]
    return simulate(params, waveform, rng, state)


def sweep_iv(params: DeviceParams, v_start: float, v_stop: float, v_step: float,
             optical_power: float, rng: np.random.Generator, dwell: float = 1e-3,
             round_trip: bool = False, state: DeviceState | None = None) -> list[tuple[float, float]]:
    """Quasi-static I-V sweep; each grid point is held for ``dwell`` seconds.

    Set ``round_trip`` to sweep back down to ``v_start`` (hysteresis loop).
    """
    trace = sweep_trace(params, v_start, v_stop, v_step, optical_power, rng,
                        dwell=dwell, round_trip=round_trip, state=state)
    return [(r.voltage_V, r.current_A) for r in trace.rows]


def zero_crossing(points: Sequence[tuple[float, float]]) -> float | None:
    """Voltage of the first sign change in an I-V trace, linearly interpolated."""
    for (v1, i1), (v2, i2) in zip(points, points[1:]):
        if i1 == 0:
            return v1
        if i1 * i2 < 0:
            return v1 - i1 * (v2 - v1) / (i2 - i1)
    if points and points[-1][1] == 0:
        return points[-1][0]
    return None


# -- waveforms ---------------------------------------------------------------

DEFAULT_DT = 10e-9


def rectangular_pulse(amplitude: float, width: float, optical_power: float = 0.0,
                      dt: float = DEFAULT_DT) -> list[StimulusSample]:
    """Ideal rectangular pulse sampled at ``dt`` (which must be <= width / 50)."""
    if dt > width / 50 * (1 + 1e-12):
        raise ValueError(f"dt={dt} too coarse for a {width} s pulse (need dt <= width/50)")
    n = max(1, round(width / dt))
    return [StimulusSample(amplitude, optical_power, width / n)] * n


class Optomemristor:
    """Convenience holder for one cell: parameters, state and event log."""

    def __init__(self, params: DeviceParams, state: DeviceState | None = None):
        self.params = params
        self.state = state if state is not None else DeviceState.hrs(params)
        self.events: list[SwitchEvent] = []
        self.recorder: list[TraceRow] | None = None  # set to a list to log trace rows

    def apply(self, sample: StimulusSample, rng: np.random.Generator) -> list[SwitchEvent]:
        self.state, events = step(self.params, self.state, sample, rng)
        self.events.extend(events)
        if self.recorder is not None:
            self.recorder.append(trace_row(self.params, self.state, sample, events))
        return events

    def drive(self, voltage: float, optical_power: float, duration: float,
              rng: np.random.Generator) -> list[SwitchEvent]:
        return self.apply(StimulusSample(voltage, optical_power, duration), rng)

    def current(self, voltage: float, optical_power: float = 0.0) -> float:
        return device_current(self.params, self.state, voltage, optical_power)

    def reset(self) -> None:
        self.state = reset_device(self.state, self.params)

    @property
    def conductance(self) -> float:
        return self.state.conductance
