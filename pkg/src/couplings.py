# src/couplings.py
"""
Secular dipolar couplings and Zeeman frequencies.

Every quantity is an angular frequency (energy / hbar, rad/s). For two
coplanar moments hbar*gamma_a*I_a and hbar*gamma_b*I_b at distance r the
coupling is mu0 * hbar * gamma_a * gamma_b / (4 pi r^3).
"""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.config import DEFAULT_CONFIG, HBAR, MU0_OVER_4PI
from src.errors import DomainError, SingularityError
from src.lattice import Site, positions_array


@dataclass(frozen=True)
class FieldParams:
    B: float = DEFAULT_CONFIG["field"]["B"]
    D: float = DEFAULT_CONFIG["field"]["D"]
    gamma_e: float = DEFAULT_CONFIG["field"]["gamma_e"]

    def __post_init__(self):
        if not self.B >= 0:
            raise DomainError(f"B must be non-negative, got {self.B}")
        if not self.D > 0:
            raise DomainError(f"D must be positive, got {self.D}")

    @property
    def omega_e(self) -> float:
        """Qubit splitting omega with hbar*omega = D - gamma_e*B (rad/s)."""
        return self.D - self.gamma_e * self.B


@dataclass(frozen=True)
class CouplingSet:
    g_e: np.ndarray  # (N,)
    g_nn: np.ndarray  # (N, N), symmetric, zero diagonal
    omega_n: np.ndarray  # (N,)
    omega_e: float
    spins: np.ndarray  # (N,)

    @property
    def n_sites(self) -> int:
        return int(self.g_e.shape[0])

    @property
    def dims(self) -> list:
        return [int(round(2 * s)) + 1 for s in self.spins]

    @classmethod
    def from_arrays(cls, g_e, spins, g_nn=None, omega_n=None, omega_e: float = 0.0) -> "CouplingSet":
        """Hand-built coupling set, used for toy baths and tests."""
        g_e = np.atleast_1d(np.asarray(g_e, dtype=float))
        n = g_e.shape[0]
        g_nn = np.zeros((n, n)) if g_nn is None else np.asarray(g_nn, dtype=float)
        omega_n = np.zeros(n) if omega_n is None else np.asarray(omega_n, dtype=float)
        spins = np.broadcast_to(np.asarray(spins, dtype=float), (n,)).copy()
        return cls(g_e=g_e, g_nn=g_nn, omega_n=omega_n, omega_e=float(omega_e), spins=spins)


def _gammas(sites: Sequence[Site]) -> np.ndarray:
    return np.array([s.species.gamma for s in sites], dtype=float)


def hyperfine_couplings(sites: Sequence[Site], field: FieldParams) -> np.ndarray:
    r = np.linalg.norm(positions_array(sites), axis=1)
    if np.any(r == 0):
        raise SingularityError("a nuclear site coincides with the vacancy")
    return MU0_OVER_4PI * HBAR * field.gamma_e * _gammas(sites) / r**3


def nuclear_couplings(sites: Sequence[Site]) -> np.ndarray:
    pos = positions_array(sites)
    n = pos.shape[0]
    r = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
    off = ~np.eye(n, dtype=bool)
    if np.any(r[off] == 0):
        raise SingularityError("two nuclear sites coincide")
    gam = _gammas(sites)
    g = np.zeros((n, n))
    g[off] = (MU0_OVER_4PI * HBAR * np.outer(gam, gam))[off] / r[off] ** 3
    return g


def zeeman_frequencies(sites: Sequence[Site], B: float) -> np.ndarray:
    if not B >= 0:
        raise DomainError(f"B must be non-negative, got {B}")
    return _gammas(sites) * B


def build_coupling_set(sites: Sequence[Site], field: Optional[FieldParams] = None) -> CouplingSet:
    field = field or FieldParams()
    return CouplingSet(
        g_e=hyperfine_couplings(sites, field),
        g_nn=nuclear_couplings(sites),
        omega_n=zeeman_frequencies(sites, field.B),
        omega_e=field.omega_e,
        spins=np.array([s.species.spin for s in sites], dtype=float),
    )


def couplings_to_csv(sites: Sequence[Site], couplings: CouplingSet) -> str:
    lines = ["index,species,ring,g_e_rad_s,omega_n_rad_s"]
    for s, g, w in zip(sites, couplings.g_e, couplings.omega_n):
        lines.append(f"{s.index},{s.species.label},{s.ring},{g:.12g},{w:.12g}")
    return "\n".join(lines) + "\n"


def matrix_to_csv(matrix: np.ndarray) -> str:
    rows = [",".join(f"{v:.12g}" for v in row) for row in np.asarray(matrix)]
    return "\n".join(rows) + "\n"
