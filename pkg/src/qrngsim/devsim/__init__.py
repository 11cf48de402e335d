"""Discrete-event model of the pulsed source, the delay line and the detector(s)."""

from .config import DEFAULT_SPLIT_TO_ONE, SCHEMES, DetectorParams, DeviceConfig
from .model import (CounterBank, DetectionEvent, SimulationResult,
                       adjacent_detection_fraction, detector_efficiency,
                       noise_fraction, simulate)

__all__ = [
    "DEFAULT_SPLIT_TO_ONE", "SCHEMES", "CounterBank", "DetectionEvent", "DetectorParams",
    "DeviceConfig", "SimulationResult", "adjacent_detection_fraction",
    "detector_efficiency", "noise_fraction", "simulate",
]
