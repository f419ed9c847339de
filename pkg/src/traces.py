# src/traces.py
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.errors import ConfigError, ShapeError


@dataclass
class CoherenceTrace:
    """
    Rotating-frame coherence on a time grid, averaged over n_samples.

    The exact engine's coherence_trace stores |L(t)| unless asked for the
    signed real part; run_hpa stores the signed sample mean of cos(phi).
    """
    times: np.ndarray
    sx: np.ndarray
    n_samples: int = 1
    stderr: Optional[np.ndarray] = None
    samples: Optional[np.ndarray] = field(default=None, repr=False)  # (n_samples, n_times)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.sx = np.asarray(self.sx, dtype=float)
        if self.times.ndim != 1 or self.times.shape != self.sx.shape:
            raise ShapeError(f"times {self.times.shape} and sx {self.sx.shape} must be equal 1-D shapes")
        if self.stderr is not None:
            self.stderr = np.asarray(self.stderr, dtype=float)
            if self.stderr.shape != self.sx.shape:
                raise ShapeError("stderr must match sx")

    def __len__(self) -> int:
        return self.times.size

    def with_sx(self, sx: np.ndarray) -> "CoherenceTrace":
        return CoherenceTrace(self.times.copy(), sx, n_samples=self.n_samples, stderr=None)

    def to_csv_text(self) -> str:
        header = "time_s,sx,stderr" if self.stderr is not None else "time_s,sx"
        lines = [header]
        for k, (t, v) in enumerate(zip(self.times, self.sx)):
            row = f"{t:.12g},{v:.15g}"
            if self.stderr is not None:
                row += f",{self.stderr[k]:.15g}"
            lines.append(row)
        return "\n".join(lines) + "\n"

    def to_csv(self, path: str):
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(self.to_csv_text())

    @classmethod
    def from_csv(cls, path: str) -> "CoherenceTrace":
        if not os.path.exists(path):
            raise ConfigError(f"trace file not found: {path}")
        with open(path, "r", encoding="utf-8") as f:
            header = f.readline().strip().split(",")
        if header[:2] != ["time_s", "sx"]:
            raise ConfigError(f"{path}: expected header 'time_s,sx[,stderr]', got {','.join(header)}")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        stderr = data[:, 2] if "stderr" in header and data.shape[1] > 2 else None
        return cls(times=data[:, 0], sx=data[:, 1], stderr=stderr)


def uniform_grid(t_max: float, n_points: int) -> np.ndarray:
    if not t_max > 0:
        raise ConfigError(f"t_max must be positive, got {t_max}")
    if n_points < 2:
        raise ConfigError(f"n_points must be >= 2, got {n_points}")
    return np.linspace(0.0, t_max, n_points)


def check_time_grid(times: np.ndarray, uniform: bool = True) -> float:
    """Validate a grid that starts at 0 and increases; returns its spacing."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1:
        raise ConfigError("time grid must be a non-empty 1-D array")
    if times[0] != 0.0:
        raise ConfigError(f"time grid must start at 0, got {times[0]}")
    if times.size == 1:
        return 0.0
    steps = np.diff(times)
    if np.any(steps <= 0):
        raise ConfigError("time grid must be strictly increasing")
    h = float(times[-1] / (times.size - 1))
    if uniform and np.max(np.abs(steps - h)) > 1e-9 * h:
        raise ConfigError("time grid must be uniform")
    return h
