"""Loading and validating JSON run configurations."""

import json
from dataclasses import dataclass, field
from importlib import resources

import jsonschema

from .devsim import DeviceConfig
from .errors import ConfigError


def _schema():
    text = resources.files("qrngsim.schemas").joinpath("device_config.schema.json").read_text()
    return json.loads(text)


def _json_path(error):
    parts = [str(p) for p in error.absolute_path]
    return ".".join(parts) if parts else "$"


@dataclass
class RunConfig:
    device: DeviceConfig = field(default_factory=DeviceConfig)
    pulses: int | None = None
    seed: int | None = None
    out: str | None = None
    format: str | None = None


def parse_config(data):
    """Validate a decoded JSON document and build a :class:`RunConfig`."""
    validator = jsonschema.Draft202012Validator(_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        path = _json_path(err)
        raise ConfigError(f"invalid config at {path}: {err.message}", path)
    if "device" in data:
        run = RunConfig(**{k: v for k, v in data.items() if k != "device"})
        run.device = DeviceConfig.from_dict(data["device"])
    else:
        run = RunConfig(device=DeviceConfig.from_dict(data))
    try:
        run.device.validate()
    except ConfigError as exc:
        prefix = "device." if "device" in data else ""
        raise ConfigError(f"invalid config at {prefix}{exc.path}: {exc}",
                          f"{prefix}{exc.path}") from exc
    return run


def load_config(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from exc
    return parse_config(data)
