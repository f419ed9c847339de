# src/exact_engine.py
"""
Exact central-spin dynamics for small nuclear baths.

The bath Hamiltonian commutes with sigma_z, so the joint evolution splits
into the two conditional bath Hamiltonians H+- = H_B +- 1/2 sum_i g_e[i] Iz_i.
The "block" method works with these directly; the "full" method propagates
the complete qubit-plus-bath density matrix, pi pulse included.
"""
import dataclasses
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import torch

from src.config import DEFAULT_CONFIG
from src.couplings import CouplingSet, FieldParams, build_coupling_set
from src.errors import ConfigError, DomainError, ResourceError
from src.lattice import Site
from src.spin_algebra import (diagonal_embed, embed_product, product_dimension,
                              spin_matrices, thermal_populations)
from src.traces import CoherenceTrace, check_time_grid

logger = logging.getLogger(__name__)

PROTOCOLS = ("fid", "echo")
METHODS = ("block", "full")

# Upper bound on complex entries held by one batch of propagators.
_CHUNK_ENTRIES = 1 << 22


@dataclass
class ExactConfig:
    sites: Sequence[Site] = ()
    field: FieldParams = dataclasses.field(default_factory=FieldParams)
    temperature: float = DEFAULT_CONFIG["run"]["temperature"]
    times: np.ndarray = dataclasses.field(default_factory=lambda: np.linspace(0.0, 1e-6, 101))
    protocol: str = "fid"
    method: str = DEFAULT_CONFIG["exact"]["method"]
    couplings: Optional[CouplingSet] = None  # overrides sites/field when given
    max_dimension: int = DEFAULT_CONFIG["exact"]["max_dimension"]
    device: str = DEFAULT_CONFIG["run"]["device"]

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.temperature > 0:
            raise DomainError(f"temperature must be positive, got {self.temperature}")
        self.times = np.asarray(self.times, dtype=float)
        check_time_grid(self.times)

    def coupling_set(self) -> CouplingSet:
        return self.couplings if self.couplings is not None else build_coupling_set(self.sites, self.field)


def _check_dimension(couplings: CouplingSet, max_dimension: int) -> int:
    dim = product_dimension(couplings.dims)
    if dim > max_dimension:
        raise ResourceError(
            f"bath Hilbert dimension {dim} exceeds the exact-engine guard {max_dimension}; "
            f"use the hpa engine for {couplings.n_sites} nuclei")
    return dim


def _iz_diagonals(couplings: CouplingSet) -> list:
    dims = couplings.dims
    return [diagonal_embed(spin_matrices(s).m, i, dims) for i, s in enumerate(couplings.spins)]


def bath_hamiltonian(couplings: CouplingSet,
                     max_dimension: int = DEFAULT_CONFIG["exact"]["max_dimension"]) -> torch.Tensor:
    """H_B = sum_i w_i Iz_i + sum_{i<j} g_ij [Iz_i Iz_j - (I+_i I-_j + I-_i I+_j)/4] in rad/s."""
    _check_dimension(couplings, max_dimension)
    dims = couplings.dims
    mz = _iz_diagonals(couplings)
    n = couplings.n_sites
    diag = np.zeros(product_dimension(dims))
    for i in range(n):
        diag += couplings.omega_n[i] * mz[i]
    h = np.zeros((diag.size, diag.size), dtype=complex)
    ops = [spin_matrices(s) for s in couplings.spins]
    for i in range(n):
        for j in range(i + 1, n):
            g = couplings.g_nn[i, j]
            if g == 0:
                continue
            diag += g * mz[i] * mz[j]
            flip = embed_product({i: ops[i].Iplus, j: ops[j].Iminus}, dims)
            h -= 0.25 * g * (flip + flip.conj().T)
    h[np.diag_indices_from(h)] += diag
    return torch.from_numpy(h)


def hyperfine_diagonal(couplings: CouplingSet) -> np.ndarray:
    """Diagonal of sum_i g_e[i] Iz_i in the product basis."""
    mz = _iz_diagonals(couplings)
    out = np.zeros(product_dimension(couplings.dims))
    for g, m in zip(couplings.g_e, mz):
        out += g * m
    return out


def conditional_hamiltonians(couplings: CouplingSet,
                             max_dimension: int = DEFAULT_CONFIG["exact"]["max_dimension"]
                             ) -> Tuple[torch.Tensor, torch.Tensor]:
    h_b = bath_hamiltonian(couplings, max_dimension)
    shift = torch.diag(torch.from_numpy(0.5 * hyperfine_diagonal(couplings)).to(h_b.dtype))
    return h_b + shift, h_b - shift


def bath_populations(couplings: CouplingSet, temperature: float) -> np.ndarray:
    """Diagonal of the product thermal state, site 0 outermost."""
    pops = np.ones(1)
    for s, w in zip(couplings.spins, couplings.omega_n):
        pops = np.kron(pops, thermal_populations(s, abs(w), temperature))
    return pops


def _eig(h: torch.Tensor, device: str):
    evals, evecs = torch.linalg.eigh(h.to(device))
    return evals, evecs


def _phases(t: torch.Tensor, evals: torch.Tensor, sign: float = -1.0) -> torch.Tensor:
    """exp(sign * i * E * t) as a (n_t, D) complex128 array."""
    angle = sign * t[:, None] * evals[None, :]
    return torch.polar(torch.ones_like(angle), angle)


def _propagators(evals, evecs, t: torch.Tensor) -> torch.Tensor:
    """Batch of exp(-i H t) for every t, from a Hermitian eigendecomposition."""
    phases = _phases(t, evals)
    return (evecs[None, :, :] * phases[:, None, :]) @ evecs.conj().T[None, :, :]


def _block_fid(h_plus, h_minus, rho, t, device) -> torch.Tensor:
    e_p, v_p = _eig(h_plus, device)
    e_m, v_m = _eig(h_minus, device)
    # Tr[e^{-iH- t} rho e^{+iH+ t}] = sum_ab u_a(t) A_ab v_b(t) W_ba
    a = v_m.conj().T @ (rho[:, None] * v_p)
    w = v_p.conj().T @ v_m
    c = a * w.T
    dim = rho.shape[0]
    out = []
    step = max(1, _CHUNK_ENTRIES // dim)
    for k in range(0, t.shape[0], step):
        tc = t[k:k + step]
        u = _phases(tc, e_m)
        v = _phases(tc, e_p, sign=1.0)
        out.append(((u @ c) * v).sum(dim=-1))
    return torch.cat(out)


def _block_echo(h_plus, h_minus, rho, t, device) -> torch.Tensor:
    e_p, v_p = _eig(h_plus, device)
    e_m, v_m = _eig(h_minus, device)
    dim = rho.shape[0]
    tau = 0.5 * t
    out = []
    step = max(1, _CHUNK_ENTRIES // (dim * dim))
    for k in range(0, t.shape[0], step):
        tc = tau[k:k + step]
        u_p = _propagators(e_p, v_p, tc)
        u_m = _propagators(e_m, v_m, tc)
        # branches swap at the pulse: Tr[(U+ U-) rho (U- U+)^dagger]
        p = u_p @ u_m
        q = u_m @ u_p
        out.append((p * rho[None, None, :] * q.conj()).sum(dim=(-2, -1)))
    return torch.cat(out)


def full_hamiltonian(couplings: CouplingSet,
                     max_dimension: int = DEFAULT_CONFIG["exact"]["max_dimension"]) -> torch.Tensor:
    """omega/2 sz (x) 1 + 1 (x) H_B + 1/2 sz (x) sum_i g_e[i] Iz_i on the qubit-plus-bath space."""
    h_b = bath_hamiltonian(couplings, max_dimension)
    dim = h_b.shape[0]
    eye_b = torch.eye(dim, dtype=h_b.dtype)
    sz = torch.tensor([[1.0, 0.0], [0.0, -1.0]], dtype=h_b.dtype)
    hf = torch.diag(torch.from_numpy(hyperfine_diagonal(couplings)).to(h_b.dtype))
    return (0.5 * couplings.omega_e * torch.kron(sz, eye_b)
            + torch.kron(torch.eye(2, dtype=h_b.dtype), h_b)
            + 0.5 * torch.kron(sz, hf))


def full_space_evolution(couplings: CouplingSet, temperature: float, times: np.ndarray,
                         protocol: str = "fid", device: str = "cpu",
                         max_dimension: int = DEFAULT_CONFIG["exact"]["max_dimension"]) -> torch.Tensor:
    """Joint density matrices rho(t), shape (n_times, 2D, 2D)."""
    h = full_hamiltonian(couplings, max_dimension).to(device)
    evals, evecs = torch.linalg.eigh(h)
    dim = h.shape[0] // 2
    rho_b = torch.diag(torch.from_numpy(bath_populations(couplings, temperature)).to(h.dtype)).to(device)
    plus = torch.full((2, 2), 0.5, dtype=h.dtype, device=device)
    rho0 = torch.kron(plus, rho_b)
    t = torch.as_tensor(np.asarray(times, dtype=float), device=device)
    if protocol == "fid":
        u = _propagators(evals, evecs, t)
        return u @ rho0[None] @ u.conj().transpose(-2, -1)
    sx = torch.tensor([[0.0, 1.0], [1.0, 0.0]], dtype=h.dtype, device=device)
    pulse = torch.kron(sx, torch.eye(dim, dtype=h.dtype, device=device))
    u = _propagators(evals, evecs, 0.5 * t)
    seq = u @ pulse[None] @ u
    return seq @ rho0[None] @ seq.conj().transpose(-2, -1)


def _full_space(couplings, cfg: ExactConfig) -> torch.Tensor:
    dim = product_dimension(couplings.dims)
    step = max(1, _CHUNK_ENTRIES // (4 * dim * dim))
    out = []
    for k in range(0, cfg.times.size, step):
        rho = full_space_evolution(couplings, cfg.temperature, cfg.times[k:k + step],
                                   cfg.protocol, cfg.device, cfg.max_dimension)
        # qubit <0|rho|1> after the partial trace over the bath
        out.append(2.0 * torch.diagonal(rho[:, :dim, dim:], dim1=-2, dim2=-1).sum(-1))
    return torch.cat(out)


def complex_coherence(cfg: ExactConfig) -> np.ndarray:
    """Complex rotating-frame coherence before taking the magnitude."""
    couplings = cfg.coupling_set()
    dim = _check_dimension(couplings, cfg.max_dimension)
    logger.info("Exact %s run (%s): %d nuclei, dimension %d, %d time points",
                cfg.protocol, cfg.method, couplings.n_sites, dim, cfg.times.size)
    if cfg.method == "full":
        return _full_space(couplings, cfg).cpu().numpy()
    h_plus, h_minus = conditional_hamiltonians(couplings, cfg.max_dimension)
    rho = torch.from_numpy(bath_populations(couplings, cfg.temperature)).to(h_plus.dtype).to(cfg.device)
    t = torch.as_tensor(cfg.times, device=cfg.device)
    if cfg.protocol == "fid":
        values = _block_fid(h_plus, h_minus, rho, t, cfg.device)
    else:
        values = _block_echo(h_plus, h_minus, rho, t, cfg.device)
    return values.cpu().numpy()


def coherence_trace(cfg: ExactConfig, signed: bool = False) -> CoherenceTrace:
    """
    |L(t)| by default. With signed the real part of L(t) is returned instead,
    the rotating-frame <sigma_x> that run_hpa averages over samples.
    """
    values = complex_coherence(cfg)
    sx = values.real if signed else np.abs(values)
    return CoherenceTrace(times=cfg.times.copy(), sx=sx, n_samples=1)
