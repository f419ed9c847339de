# src/run_config.py
"""
Flat key = value run configuration.

    # comments and blank lines are ignored
    engine = hpa
    bath = fig2-30
    temperature = 0.1
    n_samples = 200

Keys are the RunConfig field names; anything else is rejected. Empty values
and "none" reset optional keys. A manifest.json written by a previous run
can be loaded instead of a text file.
"""
import dataclasses
import json
import os
import typing
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.config import DEFAULT_CONFIG
from src.errors import ConfigError

_RUN = DEFAULT_CONFIG["run"]
_LAT = DEFAULT_CONFIG["lattice"]
_FIELD = DEFAULT_CONFIG["field"]
_HPA = DEFAULT_CONFIG["hpa"]
_PH = DEFAULT_CONFIG["phonon"]

ENGINES = ("exact", "hpa", "phonon", "combine")
CHOICES = {
    "engine": ENGINES,
    "protocol": ("fid", "echo"),
    "method": ("block", "full"),
    "frequency_shift_mode": ("derived", "literal"),
    "integrator": ("exact", "split"),
    "phonon_rate": ("high_T", "low_T", "quadrature"),
}
POSITIVE = ("bond_length", "D", "temperature", "t_max", "dt", "omega_D", "nu_s", "upsilon", "A_cell",
            "phonon_temperature", "T2prime", "lambda_max", "lambda_min", "phase_budget")
AT_LEAST_ONE = ("ring_count", "lattice_extent", "n_samples", "batch_size", "workers", "lambda_points")
NON_NEGATIVE = ("B", "lambda00", "lambda0", "gamma", "n_boron", "n_nitrogen", "rng_seed")


@dataclass
class RunConfig:
    engine: str = _RUN["engine"]
    name: str = _RUN["name"]

    # bath: a preset name, or ring_count / n_boron + n_nitrogen
    bath: Optional[str] = _LAT["bath"]
    ring_count: Optional[int] = None
    n_boron: Optional[int] = None
    n_nitrogen: Optional[int] = None
    bond_length: float = _LAT["bond_length"]
    lattice_extent: int = _LAT["extent"]

    B: float = _FIELD["B"]
    D: float = _FIELD["D"]
    gamma_e: float = _FIELD["gamma_e"]

    temperature: float = _RUN["temperature"]
    protocol: str = _RUN["protocol"]
    t_max: float = _RUN["t_max"]
    n_points: int = _RUN["n_points"]

    method: str = DEFAULT_CONFIG["exact"]["method"]

    n_samples: int = _HPA["n_samples"]
    rng_seed: int = _HPA["rng_seed"]
    dt: Optional[float] = None
    frequency_shift_mode: str = _HPA["frequency_shift_mode"]
    integrator: str = _HPA["integrator"]
    phase_budget: float = _HPA["phase_budget"]
    workers: Optional[int] = None
    batch_size: int = _HPA["batch_size"]
    device: str = _RUN["device"]
    keep_samples: bool = _HPA["keep_samples"]

    omega_D: float = _PH["omega_D"]
    nu_s: float = _PH["nu_s"]
    upsilon: float = _PH["upsilon"]
    lambda00: float = _PH["lambda00"]
    lambda0: float = _PH["lambda0"]
    A_cell: float = _PH["A_cell"]
    phonon_temperature: float = _PH["temperature"]
    phonon_rate: str = _PH["rate"]
    lambda_min: float = _PH["lambda_min"]
    lambda_max: float = _PH["lambda_max"]
    lambda_points: int = _PH["lambda_points"]
    lambda_sweep: bool = False

    # combine inputs: inline numbers or earlier run directories / manifests
    gamma: Optional[float] = None
    gamma_from: Optional[str] = None
    T2prime: Optional[float] = None
    T2prime_from: Optional[str] = None

    output_dir: Optional[str] = None
    register: bool = True
    registry_path: str = _RUN["registry_path"]

    def __post_init__(self):
        self.validate()

    def validate(self):
        for key, allowed in CHOICES.items():
            value = getattr(self, key)
            if value not in allowed:
                raise ConfigError(f"{key}: expected one of {', '.join(allowed)}, got {value!r}")
        for key in POSITIVE:
            value = getattr(self, key)
            if value is not None and not value > 0:
                raise ConfigError(f"{key}: must be positive, got {value}")
        for key in AT_LEAST_ONE:
            value = getattr(self, key)
            if value is not None and value < 1:
                raise ConfigError(f"{key}: must be >= 1, got {value}")
        for key in NON_NEGATIVE:
            value = getattr(self, key)
            if value is not None and value < 0:
                raise ConfigError(f"{key}: must be non-negative, got {value}")
        if self.n_points < 2:
            raise ConfigError(f"n_points: must be >= 2, got {self.n_points}")
        if self.lambda_max <= self.lambda_min:
            raise ConfigError("lambda_max: must exceed lambda_min")
        if self.dt is not None and self.dt > self.t_max / (self.n_points - 1):
            raise ConfigError(f"dt: must not exceed the grid spacing {self.t_max / (self.n_points - 1):.6g}")
        selectors = [k for k in ("ring_count", "n_boron", "n_nitrogen") if getattr(self, k) is not None]
        if self.engine in ("exact", "hpa") and not self.bath and not selectors:
            raise ConfigError("bath: set a preset name or ring_count / n_boron / n_nitrogen")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.n_points)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, values: dict, source: str = "config") -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError(f"{unknown[0]}: unknown key in {source}")
        hints = typing.get_type_hints(cls)
        kwargs = {k: _coerce(k, v, hints[k]) for k, v in values.items()}
        return cls(**kwargs)

    def replace(self, **changes) -> "RunConfig":
        return RunConfig.from_dict({**self.to_dict(), **changes})


_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def _coerce(key: str, value, hint):
    """Convert a raw value (string from a text file, or JSON scalar) to the field type."""
    origin = typing.get_origin(hint)
    optional = origin is typing.Union and type(None) in typing.get_args(hint)
    if optional:
        hint = next(a for a in typing.get_args(hint) if a is not type(None))
    if isinstance(value, str):
        value = value.strip()
        if optional and value.lower() in ("", "none", "null"):
            return None
    elif value is None:
        if optional:
            return None
        raise ConfigError(f"{key}: a value is required")
    try:
        if hint is bool:
            if isinstance(value, bool):
                return value
            text = str(value).lower()
            if text in _TRUE:
                return True
            if text in _FALSE:
                return False
            raise ValueError(value)
        if hint is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(float(value)) if isinstance(value, str) and "e" in value.lower() else int(value)
        if hint is float:
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot interpret {value!r} as {hint.__name__}") from None


def parse_config_text(text: str, source: str = "config") -> RunConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: missing key")
        if key in values:
            raise ConfigError(f"{key}: given twice in {source} (line {lineno})")
        values[key] = value
    return RunConfig.from_dict(values, source)


def load_config(path: str, overrides: Optional[dict] = None) -> RunConfig:
    """Read a key = value file or a manifest.json; overrides win over the file."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    if path.endswith(".json"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON ({e})") from e
        values = data.get("config", data)
        cfg = RunConfig.from_dict(values, path)
    else:
        cfg = parse_config_text(text, path)
    if overrides:
        cfg = RunConfig.from_dict({**cfg.to_dict(), **overrides}, "overrides")
    return cfg


def parse_overrides(items) -> dict:
    """['key=value', ...] from the command line."""
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out
