import dataclasses
from dataclasses import dataclass

import numpy as np

from ..bitcore import BitStream, RngEngine
from ..errors import CapacityError, ConfigError, EmptyInputError, ParameterDomainError
from . import engine
from .config import DetectorParams, DeviceConfig

CHUNK_FRAMES = 1 << 22
MAX_PULSES = 1 << 62

LABELS = {engine.LABEL_ZERO: "Zero", engine.LABEL_ONE: "One",
          engine.LABEL_NOISE: "Noise", engine.LABEL_OUTSIDE: "Outside"}
CAUSES = {engine.PHOTON: "photon", engine.DARK: "dark", engine.AFTERPULSE: "afterpulse"}


def detector_efficiency(dt_ns, params=DetectorParams()):
    """Detection probability ``dt_ns`` after the last avalanche.

    Zero at the avalanche, rising linearly to the base efficiency at the
    recovery time and flat afterwards.
    """
    if dt_ns < 0:
        raise ParameterDomainError(f"time since last avalanche must be >= 0, got {dt_ns}")
    return params.base_efficiency * min(dt_ns / params.recovery_time_ns, 1.0)


@dataclass(frozen=True)
class CounterBank:
    zeros: int = 0
    ones: int = 0
    noise: int = 0
    ambiguous: int = 0
    rejected_adjacent: int = 0

    def to_dict(self):
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class DetectionEvent:
    pulse_index: int
    time_ns: float
    label: str
    cause: str
    detector: int = 0


@dataclass(frozen=True, eq=False)
class SimulationResult:
    raw_bits: BitStream
    counters: CounterBank
    pulses_simulated: int
    config_echo: DeviceConfig
    seed: int
    # one flag per yielded bit (rejected ones included): previous frame also yielded a bit
    adjacency: BitStream
    events: tuple = ()

    def counters_json(self):
        return dict(self.counters.to_dict(), pulses=self.pulses_simulated)


def _params(config):
    det = config.detector
    prm = np.zeros(13)
    prm[engine.P_PERIOD] = config.period_ns
    prm[engine.P_MU] = config.mean_photons_per_pulse
    prm[engine.P_SPLIT] = config.split_to_one
    prm[engine.P_DELAY] = config.path_delay_ns
    prm[engine.P_WIDTH] = config.window_width_ns
    prm[engine.P_OFF0] = config.window0_offset_ns
    prm[engine.P_OFFN] = config.noise_window_offset_ns
    prm[engine.P_JITTER] = config.arrival_jitter_sigma_ns
    prm[engine.P_ETA0] = det.base_efficiency
    prm[engine.P_TAU] = det.recovery_time_ns
    prm[engine.P_DARK_MU] = det.dark_rate_hz * config.period_ns * 1e-9
    prm[engine.P_AP] = det.afterpulse_prob
    prm[engine.P_AP_TAU] = det.afterpulse_tau_ns
    return prm


def simulate(config, seed, n_pulses, record_events=0):
    """Run ``n_pulses`` frames of the generator from a fresh engine seeded with ``seed``.

    ``record_events`` caps how many avalanches are kept in ``result.events``
    (default none); it does not change the random stream.
    """
    config.validate()
    if isinstance(n_pulses, bool) or int(n_pulses) != n_pulses or n_pulses < 1:
        raise ConfigError("n_pulses must be a positive integer", "pulses")
    n_pulses = int(n_pulses)
    if n_pulses > MAX_PULSES:
        raise CapacityError(f"n_pulses above {MAX_PULSES} would overflow the counters")
    if config.detector.dark_rate_hz * config.period_ns * 1e-9 > 30.0:
        raise ConfigError("dark counts per frame exceed the Poisson sampler range",
                          "detector.dark_rate_hz")

    rng = RngEngine(seed)
    prm = _params(config)
    n_det = 2 if config.scheme == "two_detector" else 1
    t_last = np.full(n_det, engine.NO_AVALANCHE)
    pending = np.zeros((n_det, engine.MAX_PENDING))
    n_pending = np.zeros(n_det, dtype=np.int64)
    prev_bit = np.zeros(1, dtype=np.int64)
    counters = np.zeros(engine.N_COUNTERS, dtype=np.int64)
    ev_cap = int(record_events)
    ev_frame = np.zeros(ev_cap, dtype=np.int64)
    ev_time = np.zeros(ev_cap)
    ev_label = np.zeros(ev_cap, dtype=np.int64)
    ev_cause = np.zeros(ev_cap, dtype=np.int64)
    ev_det = np.zeros(ev_cap, dtype=np.int64)
    ev_count = np.zeros(1, dtype=np.int64)

    chunk = min(CHUNK_FRAMES, n_pulses)
    out_bits = np.empty(chunk, dtype=np.uint8)
    out_adj = np.empty(chunk, dtype=np.uint8)
    bit_parts, adj_parts = [], []
    done = 0
    while done < n_pulses:
        todo = min(chunk, n_pulses - done)
        n_out, n_yield = engine.run_frames(
            rng.state, prm, n_det, bool(config.reject_adjacent), todo, done,
            t_last, pending, n_pending, prev_bit, out_bits, out_adj, counters,
            ev_frame, ev_time, ev_label, ev_cause, ev_det, ev_count)
        bit_parts.append(out_bits[:n_out].copy())
        adj_parts.append(out_adj[:n_yield].copy())
        done += todo

    bits = np.concatenate(bit_parts)
    adjacency = BitStream.from_bits(np.concatenate(adj_parts), origin="simulated")
    bank = CounterBank(
        zeros=int(counters[engine.C_ZEROS]), ones=int(counters[engine.C_ONES]),
        noise=int(counters[engine.C_NOISE]), ambiguous=int(counters[engine.C_AMBIGUOUS]),
        rejected_adjacent=int(counters[engine.C_REJECTED]))
    events = tuple(
        DetectionEvent(int(ev_frame[k]), float(ev_time[k]), LABELS[int(ev_label[k])],
                       CAUSES[int(ev_cause[k])], int(ev_det[k]))
        for k in range(int(ev_count[0])))
    return SimulationResult(
        raw_bits=BitStream.from_bits(bits, origin="simulated"),
        counters=bank, pulses_simulated=n_pulses, config_echo=config,
        seed=int(seed), adjacency=adjacency, events=events)


def noise_fraction(counters):
    bits = counters.zeros + counters.ones
    if bits < 1:
        raise EmptyInputError("noise_fraction needs at least one counted bit")
    return counters.noise / bits


def adjacent_detection_fraction(result):
    """Share of yielded bits (after the first) whose preceding frame also yielded a bit."""
    n = result.adjacency.length
    if n < 2:
        raise EmptyInputError("adjacency needs at least two yielded bits")
    return result.adjacency.count_ones() / (n - 1)
