# src/hpa_engine.py
"""
Large-bath dynamics in the lowest-order Holstein-Primakoff picture.

Each nucleus becomes a boson with Iz_i = -s_i + a_i^dagger a_i. The bath is
then Gaussian and fully described by Gamma_ij = <a_i^dagger a_j>, evolved
as Gamma' = U Gamma U^dagger with U = exp(-i V dt) and

    V_ii = omega~_i (mean-field shifted Zeeman frequency)
    V_ij = -1/2 g_ij sqrt(s_i s_j)

The qubit picks up the mean-field phase phi(t) = int sum_i g_e[i] (Gamma_ii - s_i).
Occupations are redrawn from the Boltzmann distribution for every sample
and the samples are averaged.
"""
import dataclasses
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import torch

from src.config import DEFAULT_CONFIG, HBAR, KB, default_workers
from src.couplings import CouplingSet, FieldParams, build_coupling_set
from src.device_manager import device_manager
from src.errors import ConfigError, DomainError
from src.lattice import Site
from src.traces import CoherenceTrace, check_time_grid

logger = logging.getLogger(__name__)

PROTOCOLS = ("fid", "echo")
SHIFT_MODES = ("derived", "literal")
INTEGRATORS = ("exact", "split")

_HPA = DEFAULT_CONFIG["hpa"]


@dataclass
class HpaConfig:
    sites: Sequence[Site] = ()
    field: FieldParams = dataclasses.field(default_factory=FieldParams)
    temperature: float = DEFAULT_CONFIG["run"]["temperature"]
    times: np.ndarray = dataclasses.field(default_factory=lambda: np.linspace(0.0, 80e-6, 161))
    protocol: str = "echo"
    n_samples: int = _HPA["n_samples"]
    rng_seed: int = _HPA["rng_seed"]
    dt: Optional[float] = None  # substep (s); derived from the couplings when None
    frequency_shift_mode: str = _HPA["frequency_shift_mode"]
    integrator: str = _HPA["integrator"]
    workers: Optional[int] = None
    batch_size: int = _HPA["batch_size"]
    device: str = DEFAULT_CONFIG["run"]["device"]
    keep_samples: bool = _HPA["keep_samples"]
    phase_budget: float = _HPA["phase_budget"]
    couplings: Optional[CouplingSet] = None  # overrides sites/field when given

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}")
        if self.frequency_shift_mode not in SHIFT_MODES:
            raise ConfigError(f"frequency_shift_mode must be one of {SHIFT_MODES}, got {self.frequency_shift_mode!r}")
        if self.integrator not in INTEGRATORS:
            raise ConfigError(f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}")
        if not self.temperature > 0:
            raise DomainError(f"temperature must be positive, got {self.temperature}")
        if self.n_samples < 1:
            raise ConfigError(f"n_samples must be >= 1, got {self.n_samples}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.workers is not None and self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if not self.phase_budget > 0:
            raise ConfigError(f"phase_budget must be positive, got {self.phase_budget}")
        self.times = np.asarray(self.times, dtype=float)
        h = check_time_grid(self.times)
        if self.dt is not None and not 0 < self.dt <= h:
            raise ConfigError(f"dt must lie in (0, grid spacing {h:.6g}], got {self.dt}")

    def coupling_set(self) -> CouplingSet:
        return self.couplings if self.couplings is not None else build_coupling_set(self.sites, self.field)


@dataclass
class GaussianBathState:
    gamma: torch.Tensor  # (..., N, N) complex128, Gamma_ij = <a_i^dagger a_j>
    spins: torch.Tensor  # (N,) float64

    @classmethod
    def from_occupations(cls, occupations, spins, device: str = "cpu") -> "GaussianBathState":
        occ = torch.as_tensor(np.asarray(occupations, dtype=float), device=device)
        return cls(gamma=torch.diag_embed(occ).to(torch.complex128),
                   spins=torch.as_tensor(np.asarray(spins, dtype=float), device=device))

    def occupations(self) -> torch.Tensor:
        return torch.diagonal(self.gamma, dim1=-2, dim2=-1).real

    def trace(self) -> torch.Tensor:
        return self.occupations().sum(-1)

    def iz(self) -> torch.Tensor:
        """<Iz_i> = Gamma_ii - s_i."""
        return self.occupations() - self.spins

    def hermiticity_error(self) -> float:
        return float((self.gamma - self.gamma.conj().transpose(-2, -1)).abs().max())


def sample_occupations(T: float, omega_n, spins, rng: np.random.Generator) -> np.ndarray:
    """n_i ~ exp(-n hbar omega_i / kB T) on n = 0..2 s_i, independently per site."""
    if not T > 0:
        raise DomainError(f"temperature must be positive, got {T}")
    omega = np.abs(np.asarray(omega_n, dtype=float))
    caps = np.rint(2.0 * np.asarray(spins, dtype=float)).astype(int)
    levels = np.arange(int(caps.max(initial=0)) + 1)
    x = HBAR * omega / (KB * T)
    with np.errstate(invalid="ignore", over="ignore"):
        exponent = -np.outer(x, levels)
    exponent[:, 0] = 0.0
    weights = np.exp(exponent)
    weights[levels[None, :] > caps[:, None]] = 0.0
    cdf = np.cumsum(weights, axis=1)
    cdf /= cdf[:, -1:]
    u = rng.random(omega.size)
    return np.minimum((u[:, None] >= cdf).sum(axis=1), caps)


def sample_generators(rng_seed: int, n_samples: int):
    """Independent generators for samples 0..n_samples-1, derived from the seed only."""
    children = np.random.SeedSequence(rng_seed).spawn(n_samples)
    return [np.random.default_rng(child) for child in children]


def _as_tensor(values, device="cpu", dtype=torch.float64) -> torch.Tensor:
    if isinstance(values, torch.Tensor):
        return values.to(device=device, dtype=dtype)
    return torch.as_tensor(np.asarray(values), dtype=dtype, device=device)


def mean_field_shift(occupations: torch.Tensor, g_nn: torch.Tensor, spins: torch.Tensor,
                     mode: str = "derived") -> torch.Tensor:
    if mode == "derived":
        return (occupations - spins) @ g_nn
    if mode == "literal":
        return 0.5 * (occupations * g_nn.sum(-1) - 2.0 * (g_nn @ spins))
    raise ConfigError(f"frequency_shift_mode must be one of {SHIFT_MODES}, got {mode!r}")


def effective_frequencies(gamma, couplings: CouplingSet, mode: str = "derived"):
    """
    omega~_i from the current covariance.

    derived: omega_i + sum_j g_ij (Gamma_jj - s_j)
    literal: omega_i + 1/2 sum_j g_ij (Gamma_ii - 2 s_j)
    """
    as_numpy = not isinstance(gamma, torch.Tensor)
    device = "cpu" if as_numpy else gamma.device
    gamma_t = _as_tensor(gamma, device, dtype=torch.complex128)
    occ = torch.diagonal(gamma_t, dim1=-2, dim2=-1).real
    omega = _as_tensor(couplings.omega_n, device)
    shift = mean_field_shift(occ, _as_tensor(couplings.g_nn, device), _as_tensor(couplings.spins, device), mode)
    out = omega + shift
    return out.cpu().numpy() if as_numpy else out


def hopping_matrix(couplings: CouplingSet, device="cpu") -> torch.Tensor:
    """B_ij = 1/2 g_ij sqrt(s_i s_j); the off-diagonal of V is -B."""
    s = _as_tensor(couplings.spins, device)
    return 0.5 * _as_tensor(couplings.g_nn, device) * torch.sqrt(torch.outer(s, s))


def propagate_covariance(gamma: torch.Tensor, v: torch.Tensor, dt: float) -> torch.Tensor:
    """exp(-i V dt) Gamma exp(+i V dt) for real symmetric (batched) V."""
    evals, evecs = torch.linalg.eigh(v)
    phase = torch.polar(torch.ones_like(evals), -evals * dt)
    evecs = evecs.to(torch.complex128)
    u = (evecs * phase[..., None, :]) @ evecs.transpose(-2, -1)
    return u @ gamma @ u.conj().transpose(-2, -1)


def _hermitize(gamma: torch.Tensor) -> torch.Tensor:
    return 0.5 * (gamma + gamma.conj().transpose(-2, -1))


def evolve_covariance(gamma, couplings: CouplingSet, mode: str = "derived", dt: float = 1e-7,
                      midpoint: bool = False):
    """
    One substep with V held constant. V is built from the incoming Gamma, or
    from a half-step predictor of it when midpoint is set.
    """
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")
    as_numpy = not isinstance(gamma, torch.Tensor)
    gamma_t = _as_tensor(gamma, "cpu" if as_numpy else gamma.device, dtype=torch.complex128)
    stepper = CovarianceStepper(couplings, mode, dt, device=str(gamma_t.device))
    if midpoint:
        out, _ = stepper.step(gamma_t)
    else:
        out = _hermitize(propagate_covariance(gamma_t, stepper.coefficient_matrix(gamma_t), dt))
    return out.cpu().numpy() if as_numpy else out


def default_substep(couplings: CouplingSet, phase_budget: float = _HPA["phase_budget"]) -> Optional[float]:
    """
    Largest substep keeping the time-varying part of V below phase_budget rad.

    The static Zeeman part is integrated exactly by the conjugation, so only
    the mean-field shift (bounded by sum_j g_ij 2 s_max) and the hopping
    matrix limit the step. Returns None for a bath without nuclear couplings.
    """
    g = np.asarray(couplings.g_nn, dtype=float)
    if g.size == 0 or not np.any(g):
        return None
    s = np.asarray(couplings.spins, dtype=float)
    shift_bound = float(np.max(g.sum(axis=1))) * 2.0 * float(s.max())
    hop_bound = float(np.max(0.5 * g * np.sqrt(np.outer(s, s))))
    return phase_budget / max(shift_bound, hop_bound)


def resolve_substeps(base_spacing: float, dt: Optional[float]) -> Tuple[int, float]:
    if base_spacing <= 0:
        return 1, 0.0
    if dt is None:
        return 1, base_spacing
    n_sub = max(1, math.ceil(base_spacing / dt - 1e-9))
    return n_sub, base_spacing / n_sub


class CovarianceStepper:
    """Batched covariance integrator plus the qubit phase rate."""

    def __init__(self, couplings: CouplingSet, mode: str, dt: float,
                 integrator: str = "exact", device: str = "cpu"):
        if mode not in SHIFT_MODES:
            raise ConfigError(f"frequency_shift_mode must be one of {SHIFT_MODES}, got {mode!r}")
        if integrator not in INTEGRATORS:
            raise ConfigError(f"integrator must be one of {INTEGRATORS}, got {integrator!r}")
        self.mode = mode
        self.dt = dt
        self.integrator = integrator
        self.device = device
        self.omega = _as_tensor(couplings.omega_n, device)
        self.g_nn = _as_tensor(couplings.g_nn, device)
        self.spins = _as_tensor(couplings.spins, device)
        self.g_e = _as_tensor(couplings.g_e, device)
        self.hopping = hopping_matrix(couplings, device)
        self._half_static = None
        if integrator == "split":
            # exp(-i V0 dt/2) for the constant part V0 = diag(omega) - B
            v0 = torch.diag(self.omega) - self.hopping
            evals, evecs = torch.linalg.eigh(v0)
            evecs = evecs.to(torch.complex128)
            phase = torch.polar(torch.ones_like(evals), -0.5 * dt * evals)
            self._half_static = (evecs * phase[None, :]) @ evecs.T

    def occupations(self, gamma: torch.Tensor) -> torch.Tensor:
        return torch.diagonal(gamma, dim1=-2, dim2=-1).real

    def coefficient_matrix(self, gamma: torch.Tensor) -> torch.Tensor:
        omega_t = self.omega + mean_field_shift(self.occupations(gamma), self.g_nn, self.spins, self.mode)
        return torch.diag_embed(omega_t) - self.hopping

    def phase_rate(self, gamma: torch.Tensor) -> torch.Tensor:
        """sum_i g_e[i] (Gamma_ii - s_i) in rad/s."""
        return (self.occupations(gamma) - self.spins) @ self.g_e

    def step(self, gamma: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        """Advance by dt; returns (new state, midpoint estimate)."""
        if self.integrator == "split":
            p = self._half_static
            mid = p @ gamma @ p.conj().T
            shift = mean_field_shift(self.occupations(mid), self.g_nn, self.spins, self.mode)
            d = torch.polar(torch.ones_like(shift), -self.dt * shift)
            kicked = d[..., :, None] * mid * d.conj()[..., None, :]
            return _hermitize(p @ kicked @ p.conj().T), mid
        mid = propagate_covariance(gamma, self.coefficient_matrix(gamma), 0.5 * self.dt)
        new = propagate_covariance(gamma, self.coefficient_matrix(mid), self.dt)
        return _hermitize(new), mid

    def integrate(self, gamma: torch.Tensor, n_grid: int, n_sub: int) -> torch.Tensor:
        """Qubit phase on n_grid points spaced n_sub substeps apart, Simpson rule per substep."""
        phi = torch.zeros(gamma.shape[:-2] + (n_grid,), dtype=torch.float64, device=gamma.device)
        acc = torch.zeros(gamma.shape[:-2], dtype=torch.float64, device=gamma.device)
        rate = self.phase_rate(gamma)
        for k in range(1, n_grid):
            for _ in range(n_sub):
                gamma, mid = self.step(gamma)
                new_rate = self.phase_rate(gamma)
                acc = acc + (self.dt / 6.0) * (rate + 4.0 * self.phase_rate(mid) + new_rate)
                rate = new_rate
            phi[..., k] = acc
        return phi


def evolve_bath(state: GaussianBathState, couplings: CouplingSet, dt: float, n_steps: int,
                mode: str = "derived", integrator: str = "exact") -> GaussianBathState:
    stepper = CovarianceStepper(couplings, mode, dt, integrator, device=str(state.gamma.device))
    gamma = state.gamma
    for _ in range(n_steps):
        gamma, _ = stepper.step(gamma)
    return GaussianBathState(gamma=gamma, spins=state.spins)


def _estimate_batch_bytes(n_sites: int, batch: int) -> int:
    # a dozen complex N x N temporaries per sample
    return int(12 * 16 * batch * n_sites * n_sites)


def run_hpa(cfg: HpaConfig) -> CoherenceTrace:
    couplings = cfg.coupling_set()
    n_sites = couplings.n_sites
    if n_sites == 0:
        raise ConfigError("bath: the selected bath contains no nuclei")
    times = cfg.times
    n_times = times.size
    h = check_time_grid(times)
    echo = cfg.protocol == "echo"
    # echo needs phi(t/2) at every output time, so the internal grid is twice as fine
    base = 0.5 * h if echo else h
    n_grid = 2 * n_times - 1 if echo else n_times
    dt_target = cfg.dt if cfg.dt is not None else default_substep(couplings, cfg.phase_budget)
    n_sub, dt = resolve_substeps(base, dt_target)

    workers = cfg.workers or default_workers()
    batch = min(cfg.batch_size, cfg.n_samples)
    need = _estimate_batch_bytes(n_sites, batch) * min(workers, cfg.n_samples)
    device = device_manager.resolve_device(cfg.device, need)
    device_manager.check_memory(need, device)
    stepper = CovarianceStepper(couplings, cfg.frequency_shift_mode, dt, cfg.integrator, device)

    generators = sample_generators(cfg.rng_seed, cfg.n_samples)
    occupations = np.stack([sample_occupations(cfg.temperature, couplings.omega_n, couplings.spins, rng)
                            for rng in generators])

    logger.info("HPA %s run: %d nuclei, %d samples, %d output points, %d substeps of %.3g s, "
                "%s integrator, %s shift, %d workers",
                cfg.protocol, n_sites, cfg.n_samples, n_times, n_sub * (n_grid - 1), dt,
                cfg.integrator, cfg.frequency_shift_mode, workers)

    idx = np.arange(n_times)

    def simulate(start: int) -> np.ndarray:
        state = GaussianBathState.from_occupations(occupations[start:start + batch], couplings.spins, device)
        phi = stepper.integrate(state.gamma, n_grid, n_sub).cpu().numpy()
        if echo:
            return np.cos(phi[:, 2 * idx] - 2.0 * phi[:, idx])
        return np.cos(phi)

    samples = np.empty((cfg.n_samples, n_times))
    starts = list(range(0, cfg.n_samples, batch))
    t0 = time.time()
    with ThreadPoolExecutor(max_workers=max(1, min(workers, len(starts)))) as pool:
        futures = {pool.submit(simulate, start): start for start in starts}
        for done, future in enumerate(as_completed(futures), start=1):
            start = futures[future]
            samples[start:start + batch] = future.result()
            logger.debug("HPA batch %d/%d done (%.1fs)", done, len(starts), time.time() - t0)

    sx = samples.mean(axis=0)
    if cfg.n_samples > 1:
        stderr = samples.std(axis=0, ddof=1) / np.sqrt(cfg.n_samples)
    else:
        stderr = np.zeros(n_times)
    logger.info("HPA run finished in %.1fs", time.time() - t0)
    return CoherenceTrace(times=times.copy(), sx=sx, n_samples=cfg.n_samples, stderr=stderr,
                          samples=samples if cfg.keep_samples else None)
