"""Device and detector parameters of the simulated generator."""

import dataclasses
from dataclasses import dataclass, field

from ..errors import ConfigError

SCHEMES = ("one_detector", "two_detector")


@dataclass(frozen=True)
class DetectorParams:
    """Geiger-mode APD with a linear recovery ramp after every avalanche."""

    base_efficiency: float = 1.0
    recovery_time_ns: float = 1000.0
    dark_rate_hz: float = 3000.0
    afterpulse_prob: float = 0.0
    afterpulse_tau_ns: float = 100.0

    def validate(self, prefix="detector"):
        if not 0.0 <= self.base_efficiency <= 1.0:
            raise ConfigError("base_efficiency must lie in [0, 1]", f"{prefix}.base_efficiency")
        if not self.recovery_time_ns > 0.0:
            raise ConfigError("recovery_time_ns must be > 0", f"{prefix}.recovery_time_ns")
        if not self.dark_rate_hz >= 0.0:
            raise ConfigError("dark_rate_hz must be >= 0", f"{prefix}.dark_rate_hz")
        if not 0.0 <= self.afterpulse_prob <= 1.0:
            raise ConfigError("afterpulse_prob must lie in [0, 1]", f"{prefix}.afterpulse_prob")
        if not self.afterpulse_tau_ns > 0.0:
            raise ConfigError("afterpulse_tau_ns must be > 0", f"{prefix}.afterpulse_tau_ns")


# Chosen so the *observed* raw one-fraction is 0.40: multi-photon frames
# favour the early '0' window, which pulls the output about 0.011 below
# the optical split.
DEFAULT_SPLIT_TO_ONE = 0.411


@dataclass(frozen=True)
class DeviceConfig:
    pulse_rate_hz: float = 1e6
    mean_photons_per_pulse: float = 0.1
    split_to_one: float = DEFAULT_SPLIT_TO_ONE
    path_delay_ns: float = 60.0
    window_width_ns: float = 10.0
    window0_offset_ns: float = 0.0
    noise_window_offset_ns: float = 200.0
    arrival_jitter_sigma_ns: float = 1.0
    detector: DetectorParams = field(default_factory=DetectorParams)
    scheme: str = "one_detector"
    reject_adjacent: bool = False

    @property
    def period_ns(self):
        return 1e9 / self.pulse_rate_hz

    def replace(self, **changes):
        """Copy with top-level fields changed; ``detector`` accepts a dict of overrides."""
        det = changes.pop("detector", None)
        if isinstance(det, dict):
            det = dataclasses.replace(self.detector, **det)
        if det is not None:
            changes["detector"] = det
        return dataclasses.replace(self, **changes)

    def validate(self):
        if not self.pulse_rate_hz > 0.0:
            raise ConfigError("pulse_rate_hz must be > 0", "pulse_rate_hz")
        if not 0.0 <= self.mean_photons_per_pulse <= 30.0:
            raise ConfigError("mean_photons_per_pulse must lie in [0, 30]",
                              "mean_photons_per_pulse")
        if not 0.0 <= self.split_to_one <= 1.0:
            raise ConfigError("split_to_one must lie in [0, 1]", "split_to_one")
        if not self.window_width_ns > 0.0:
            raise ConfigError("window_width_ns must be > 0", "window_width_ns")
        if self.path_delay_ns < self.window_width_ns:
            raise ConfigError(
                "windows overlap: path_delay_ns must be >= window_width_ns "
                f"({self.path_delay_ns:g} < {self.window_width_ns:g})", "path_delay_ns")
        if self.period_ns < self.noise_window_offset_ns + self.window_width_ns:
            raise ConfigError(
                "windows do not fit in one frame: 1/pulse_rate_hz must be >= "
                "noise_window_offset_ns + window_width_ns", "pulse_rate_hz")
        if self.period_ns < self.path_delay_ns + self.window_width_ns:
            raise ConfigError("the '1' window does not fit in one frame", "path_delay_ns")
        w = self.window_width_ns
        for centre in (self.window0_offset_ns, self.window0_offset_ns + self.path_delay_ns):
            if abs(self.noise_window_offset_ns - centre) < w:
                raise ConfigError("noise window overlaps a bit window",
                                  "noise_window_offset_ns")
        if self.noise_window_offset_ns + w / 2 > self.window0_offset_ns - w / 2 + self.period_ns:
            raise ConfigError("noise window extends past the end of the frame",
                              "noise_window_offset_ns")
        if not self.arrival_jitter_sigma_ns >= 0.0:
            raise ConfigError("arrival_jitter_sigma_ns must be >= 0", "arrival_jitter_sigma_ns")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}", "scheme")
        self.detector.validate()
        return self

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        det = data.pop("detector", {})
        return cls(detector=DetectorParams(**det), **data)
