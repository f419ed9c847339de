# src/spin_algebra.py
"""
Spin-s operators in the descending basis m = s, s-1, ..., -s, thermal
Zeeman states and tensor-product embedding.
"""
from dataclasses import dataclass
from functools import reduce
from typing import Dict, Sequence

import numpy as np

from src.config import HBAR, KB
from src.errors import DomainError, ShapeError


@dataclass(frozen=True)
class SpinOps:
    s: float
    Iz: np.ndarray
    Iplus: np.ndarray
    Iminus: np.ndarray

    @property
    def dim(self) -> int:
        return self.Iz.shape[0]

    @property
    def m(self) -> np.ndarray:
        return np.real(np.diag(self.Iz))


def _two_s(s: float) -> int:
    two_s = 2.0 * float(s)
    if not np.isfinite(two_s) or two_s < 1 or abs(two_s - round(two_s)) > 1e-12:
        raise DomainError(f"spin must be a positive half-integer, got {s}")
    return int(round(two_s))


def spin_values(s: float) -> np.ndarray:
    """Magnetic quantum numbers in basis order."""
    return s - np.arange(_two_s(s) + 1, dtype=float)


def spin_matrices(s: float) -> SpinOps:
    m = spin_values(s)
    dim = m.size
    iz = np.diag(m).astype(complex)
    iplus = np.zeros((dim, dim), dtype=complex)
    # <m+1| I+ |m> sits one row above the column of m.
    for k in range(1, dim):
        iplus[k - 1, k] = np.sqrt(s * (s + 1) - m[k] * (m[k] + 1))
    return SpinOps(s=float(s), Iz=iz, Iplus=iplus, Iminus=iplus.conj().T)


def thermal_populations(s: float, omega: float, T: float) -> np.ndarray:
    """Boltzmann weights of exp(-hbar omega Iz / kB T), in basis order."""
    if not T > 0:
        raise DomainError(f"temperature must be positive, got {T}")
    if omega < 0:
        raise DomainError(f"Zeeman frequency must be non-negative, got {omega}")
    m = spin_values(s)
    x = HBAR * omega / (KB * T) if np.isfinite(T) else 0.0
    if np.isinf(x):
        pops = np.zeros_like(m)
        pops[-1] = 1.0
        return pops
    exponent = -x * m
    weights = np.exp(exponent - exponent.max())
    return weights / weights.sum()


def thermal_state(s: float, omega: float, T: float) -> np.ndarray:
    return np.diag(thermal_populations(s, omega, T)).astype(complex)


def product_dimension(dims: Sequence[int]) -> int:
    return int(np.prod(np.asarray(dims, dtype=np.int64))) if len(dims) else 1


def embed_product(ops: Dict[int, np.ndarray], dims: Sequence[int]) -> np.ndarray:
    """Kronecker product placing ops[k] on site k and identities elsewhere."""
    for site, op in ops.items():
        if not 0 <= site < len(dims):
            raise ShapeError(f"site {site} out of range for {len(dims)} sites")
        if op.shape != (dims[site], dims[site]):
            raise ShapeError(f"operator of shape {op.shape} does not fit site {site} of dimension {dims[site]}")
    factors = [ops[k] if k in ops else np.eye(d, dtype=complex) for k, d in enumerate(dims)]
    if not factors:
        return np.eye(1, dtype=complex)
    return reduce(np.kron, factors)


def embed(op: np.ndarray, site: int, dims: Sequence[int]) -> np.ndarray:
    return embed_product({site: np.asarray(op)}, dims)


def diagonal_embed(values: np.ndarray, site: int, dims: Sequence[int]) -> np.ndarray:
    """Diagonal of embed(diag(values), site, dims) without forming the matrix."""
    if values.shape != (dims[site],):
        raise ShapeError(f"diagonal of length {values.shape} does not fit site {site} of dimension {dims[site]}")
    left = product_dimension(dims[:site])
    right = product_dimension(dims[site + 1:])
    return np.kron(np.ones(left), np.kron(values, np.ones(right)))
