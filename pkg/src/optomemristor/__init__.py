"""Behavioural simulation of optomemristors and the neuromorphic circuits built from them."""

from .device import (
    Cause,
    DeviceKind,
    DeviceParams,
    DeviceState,
    MalformedWaveformError,
    Optomemristor,
    StimulusSample,
    SwitchEvent,
    Transition,
    device_current,
    effective_threshold,
    open_circuit_voltage,
    simulate,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "Cause", "DeviceKind", "DeviceParams", "DeviceState", "MalformedWaveformError",
    "Optomemristor", "StimulusSample", "SwitchEvent", "Transition", "device_current",
    "effective_threshold", "open_circuit_voltage", "simulate", "step",
]
