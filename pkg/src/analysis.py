# src/analysis.py
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import optimize, signal

from src.config import DEFAULT_CONFIG
from src.errors import FitError, ShapeError
from src.traces import CoherenceTrace

logger = logging.getLogger(__name__)

_AN = DEFAULT_CONFIG["analysis"]

# Minimum rise above both neighbours for a sample to count as a peak.
PEAK_PROMINENCE = 1e-6


@dataclass(frozen=True)
class FitResult:
    c: float  # 1/s
    n: float
    residual: float  # RMS over the fitted window
    n_points: int = 0

    @property
    def T2prime(self) -> float:
        """T2' under the convention Gamma(t) = (0.92 t / T2')^n."""
        return 0.92 / self.c


def envelope(trace: CoherenceTrace) -> CoherenceTrace:
    """Upper envelope of |sx|: interior peaks joined linearly, endpoints kept."""
    y = np.abs(trace.sx)
    if y.size < 3:
        return trace.with_sx(y)
    peaks, _ = signal.find_peaks(y, threshold=PEAK_PROMINENCE)
    if peaks.size == 0:
        return trace.with_sx(y)
    anchors = np.unique(np.concatenate([[0], peaks, [y.size - 1]]))
    env = np.interp(trace.times, trace.times[anchors], y[anchors])
    return trace.with_sx(np.maximum(env, y))


def _first_crossing(times: np.ndarray, y: np.ndarray, level: float) -> Optional[float]:
    below = np.flatnonzero(y < level)
    if below.size == 0:
        return None
    i = int(below[0])
    if i == 0:
        return float(times[0])
    t0, t1, y0, y1 = times[i - 1], times[i], y[i - 1], y[i]
    return float(t0 + (level - y0) * (t1 - t0) / (y1 - y0))


def coherence_time(trace: CoherenceTrace, threshold: float = _AN["threshold"]) -> Optional[float]:
    """
    First time the envelope falls below threshold, linearly interpolated.
    None means no crossing inside the grid: extend t_max.
    """
    return _first_crossing(trace.times, envelope(trace).sx, threshold)


def first_collapse_time(trace: CoherenceTrace, level: float = _AN["collapse_level"]) -> Optional[float]:
    """First crossing of |sx| below level on the raw signal (no envelope)."""
    return _first_crossing(trace.times, np.abs(trace.sx), level)


def rms_difference(a: CoherenceTrace, b: CoherenceTrace) -> float:
    if a.times.shape != b.times.shape or not np.allclose(a.times, b.times, rtol=1e-12, atol=0.0):
        raise ShapeError("traces must share the same time grid")
    return float(np.sqrt(np.mean((a.sx - b.sx) ** 2)))


def _stretched_exp(tau, k, n):
    return np.exp(-np.power(k * tau, n))


def decaying_segment(trace: CoherenceTrace, floor: float = _AN["fit_window"][0],
                     noise_sigmas: float = _AN["noise_sigmas"]) -> CoherenceTrace:
    """
    Leading part of trace before |sx| first drops below the noise floor.

    The floor is max(floor, noise_sigmas * stderr) pointwise when the trace
    carries a standard error, otherwise floor alone.
    """
    y = np.abs(trace.sx)
    limit = np.full_like(y, floor)
    if trace.stderr is not None:
        limit = np.maximum(limit, noise_sigmas * trace.stderr)
    below = np.flatnonzero(y < limit)
    end = int(below[0]) if below.size else y.size
    stderr = trace.stderr[:end] if trace.stderr is not None else None
    return CoherenceTrace(trace.times[:end], trace.sx[:end], n_samples=trace.n_samples, stderr=stderr)


def fit_stretched_exponential(trace: CoherenceTrace,
                              window: Tuple[float, float] = _AN["fit_window"],
                              min_points: int = _AN["fit_min_points"]) -> FitResult:
    """
    Fit y = exp[-(c t)^n] to the envelope of the decaying segment.

    The trace is first cut where |sx| reaches the noise floor (decaying_segment),
    so a noisy tail neither enters the fit nor lifts the envelope through its
    peaks. A straight-line fit of ln(-ln y) against ln t seeds a nonlinear
    least squares refinement on y itself; both use the points with y in window.
    """
    lo, hi = window
    segment = decaying_segment(trace, floor=lo)
    y = envelope(segment).sx
    t = segment.times
    mask = (t > 0) & (y >= lo) & (y <= hi)
    count = int(mask.sum())
    if count < min_points:
        raise FitError(f"only {count} points with envelope in [{lo}, {hi}]; need {min_points} (extend t_max)")
    tw, yw = t[mask], y[mask]
    slope, intercept = np.polyfit(np.log(tw), np.log(-np.log(yw)), 1)
    n0 = float(slope)
    if not n0 > 0:
        raise FitError(f"envelope is not decaying (linearised exponent {n0:.3g})")
    c0 = math.exp(intercept / n0)

    # refine in units of 1/c0 so both parameters are O(1)
    tau = tw * c0
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", optimize.OptimizeWarning)
            (k, n), _ = optimize.curve_fit(_stretched_exp, tau, yw, p0=(1.0, n0),
                                           bounds=([1e-12, 1e-6], [np.inf, np.inf]),
                                           xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
    except (RuntimeError, ValueError) as e:
        logger.warning("Nonlinear refinement failed (%s); keeping the linearised fit", e)
        k, n = 1.0, n0
    c = float(k * c0)
    residual = float(np.sqrt(np.mean((_stretched_exp(tw * c, 1.0, n) - yw) ** 2)))
    if not (c > 0 and n > 0):
        raise FitError(f"fit produced non-physical parameters c={c}, n={n}")
    return FitResult(c=c, n=float(n), residual=residual, n_points=count)


def summarize(trace: CoherenceTrace, protocol: str, threshold: float = _AN["threshold"]) -> dict:
    """Coherence time, stretched-exponential fit and first collapse of a trace."""
    key = "T2prime" if protocol == "echo" else "T2star"
    out = {
        "protocol": protocol,
        key: coherence_time(trace, threshold),
        "threshold": threshold,
        "first_collapse": first_collapse_time(trace),
        "n_samples": trace.n_samples,
    }
    try:
        fit = fit_stretched_exponential(trace)
        out["fit"] = {"c": fit.c, "n": fit.n, "residual": fit.residual, "n_points": fit.n_points,
                      "c_times_T2": fit.c * out[key] if out[key] else None}
    except FitError as e:
        logger.info("No stretched-exponential fit: %s", e)
        out["fit"] = None
    return out
