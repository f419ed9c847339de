# src/phonon.py
"""
Debye-model two-phonon pure dephasing of the V_B electron spin.

All rates share the prefactor

    C = 2 pi * 8 pi^2 A^2 lambda00^2 / (nu_s^4 omega_D^(4 upsilon))

and differ in how the thermal integral over x = hbar omega / kB T is
evaluated. The single-phonon coupling lambda0 is carried for completeness
but never enters a rate.
"""
import dataclasses
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, List

import numpy as np
from scipy import integrate, optimize, special

from src.config import DEFAULT_CONFIG, HBAR, KB
from src.errors import DomainError, NumericalError

logger = logging.getLogger(__name__)

_PH = DEFAULT_CONFIG["phonon"]

LN2 = math.log(2.0)
# Stretch of the spin-bath decoherence function exp[-(0.92 t / T2')^6].
BATH_RATE_FACTOR = 0.92
BATH_EXPONENT = 6.0
# Beyond this x the Bose weight is below e^-700 and the tail is taken as zero.
_X_TAIL = 700.0


@dataclass(frozen=True)
class PhononParams:
    omega_D: float = _PH["omega_D"]  # rad/s
    nu_s: float = _PH["nu_s"]  # m/s
    upsilon: float = _PH["upsilon"]
    lambda00: float = _PH["lambda00"]  # rad/s
    A_cell: float = _PH["A_cell"]
    T: float = _PH["temperature"]  # K
    lambda0: float = _PH["lambda0"]

    def __post_init__(self):
        for name in ("omega_D", "nu_s", "upsilon", "A_cell", "T"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.lambda00 >= 0:
            raise DomainError(f"lambda00 must be non-negative, got {self.lambda00}")

    @property
    def thermal_frequency(self) -> float:
        """kB T / hbar in rad/s."""
        return KB * self.T / HBAR

    @property
    def beta_omega_D(self) -> float:
        return self.omega_D / self.thermal_frequency

    @property
    def power(self) -> float:
        """Exponent 4 upsilon + 2 of x in the thermal integral."""
        return 4.0 * self.upsilon + 2.0


@dataclass(frozen=True)
class DephasingResult:
    gamma: float  # 1/s
    regime: str  # low_T | low_T_bose_exact | high_T | quadrature


def _prefactor(p: PhononParams) -> float:
    return (2.0 * math.pi * 8.0 * math.pi**2 * p.A_cell**2 * p.lambda00**2
            / (p.nu_s**4 * p.omega_D ** (4.0 * p.upsilon)))


def decay_rate_low_T(p: PhononParams, bose_exact: bool = False) -> float:
    """
    hbar omega_D >> kB T limit: C (kB T/hbar)^(4u+3) Gamma(4u+3).

    The closed form replaces n(n+1) by e^-x. With bose_exact the full Bose
    weight is kept, which multiplies the rate by zeta(4u+2).
    """
    rate = _prefactor(p) * p.thermal_frequency ** (p.power + 1.0) * special.gamma(p.power + 1.0)
    if bose_exact:
        rate *= special.zeta(p.power)
    return float(rate)


def decay_rate_high_T(p: PhononParams) -> float:
    """kB T >> hbar omega_D limit: C omega_D^(4u+1) (kB T/hbar)^2 / (4u+1)."""
    return float(2.0 * math.pi * 8.0 * math.pi**2 * p.A_cell**2 * p.lambda00**2 * p.omega_D
                 / (p.nu_s**4 * (4.0 * p.upsilon + 1.0)) * p.thermal_frequency**2)


def _integrand(x: float, power: float) -> float:
    # x^p e^x / (e^x - 1)^2 written with e^-x to stay finite for large x
    em = math.exp(-x)
    return x**power * em / math.expm1(-x) ** 2


def thermal_integral(power: float, upper: float) -> float:
    """int_0^upper x^power e^x / (e^x - 1)^2 dx."""
    if not upper > 0:
        raise DomainError(f"upper limit must be positive, got {upper}")
    if power <= 1.0:
        raise DomainError(f"power must exceed 1 for a finite integral, got {power}")
    hi = np.inf if upper > _X_TAIL else upper
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, _ = integrate.quad(_integrand, 0.0, hi, args=(power,),
                                      epsabs=0.0, epsrel=1e-10, limit=200)
        except integrate.IntegrationWarning as e:
            raise NumericalError(f"thermal integral did not converge (power={power}, upper={upper}): {e}") from e
    return value


def decay_rate_quadrature(p: PhononParams) -> float:
    j = thermal_integral(p.power, p.beta_omega_D)
    return float(_prefactor(p) * p.thermal_frequency ** (p.power + 1.0) * j)


def dephasing_rates(p: PhononParams) -> List[DephasingResult]:
    return [
        DephasingResult(decay_rate_low_T(p), "low_T"),
        DephasingResult(decay_rate_low_T(p, bose_exact=True), "low_T_bose_exact"),
        DephasingResult(decay_rate_high_T(p), "high_T"),
        DephasingResult(decay_rate_quadrature(p), "quadrature"),
    ]


RATE_FUNCTIONS = {
    "low_T": decay_rate_low_T,
    "high_T": decay_rate_high_T,
    "quadrature": decay_rate_quadrature,
}


def decay_rate(p: PhononParams, regime: str = _PH["rate"]) -> float:
    try:
        return RATE_FUNCTIONS[regime](p)
    except KeyError:
        raise DomainError(f"rate must be one of {tuple(RATE_FUNCTIONS)}, got {regime!r}") from None


def decoherence_function(t, gamma: float, T2prime: float):
    """F(t) = exp[-gamma t - (0.92 t / T2')^6]."""
    t = np.asarray(t, dtype=float)
    return np.exp(-gamma * t - (BATH_RATE_FACTOR * t / T2prime) ** BATH_EXPONENT)


def combined_T2(gamma: float, T2prime: float) -> float:
    """The unique t > 0 with F(t) = 1/2."""
    if not T2prime > 0:
        raise DomainError(f"T2prime must be positive, got {T2prime}")
    if not gamma >= 0:
        raise DomainError(f"gamma must be non-negative, got {gamma}")
    bath_only = T2prime * LN2 ** (1.0 / BATH_EXPONENT) / BATH_RATE_FACTOR
    if gamma == 0:
        return bath_only

    def excess(t):
        return gamma * t + (BATH_RATE_FACTOR * t / T2prime) ** BATH_EXPONENT - LN2

    # either term alone already exceeds ln 2 at twice its own half-time
    hi = 2.0 * min(bath_only, LN2 / gamma)
    try:
        return float(optimize.brentq(excess, 0.0, hi, xtol=1e-300, rtol=1e-12, maxiter=500))
    except (ValueError, RuntimeError) as e:
        raise NumericalError(f"T2 root finding failed (gamma={gamma}, T2prime={T2prime}): {e}") from e


def t2_vs_lambda(p: PhononParams, lambda_grid: Iterable[float], T2prime: float,
                 temperature: float = _PH["temperature"], rate: str = "high_T"):
    """(lambda00, gamma, T2) arrays over an ascending lambda00 grid."""
    lambdas = np.asarray(list(lambda_grid), dtype=float)
    if lambdas.size == 0 or np.any(lambdas < 0) or np.any(np.diff(lambdas) < 0):
        raise DomainError("lambda grid must be non-empty, non-negative and ascending")
    gammas = np.array([decay_rate(dataclasses.replace(p, lambda00=lam, T=temperature), rate) for lam in lambdas])
    t2 = np.array([combined_T2(g, T2prime) for g in gammas])
    # round-off in the root finder must not break monotonicity
    t2 = np.minimum.accumulate(t2)
    logger.info("T2 sweep over %d lambda00 values at %.1f K (%s rate)", lambdas.size, temperature, rate)
    return lambdas, gammas, t2


def dephasing_master_equation(gamma: float, rho0, times) -> np.ndarray:
    """
    Integrate d rho/dt = -gamma (S2 rho + rho S2 - 2 S2 rho S2) for the spin-1
    ground state, S2 = Sz^2 = diag(1, 0, 1) in the basis (+1, 0, -1).
    Returns rho(t) with shape (n_times, 3, 3).
    """
    if not gamma >= 0:
        raise DomainError(f"gamma must be non-negative, got {gamma}")
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (3, 3):
        raise DomainError(f"rho0 must be 3x3, got {rho0.shape}")
    times = np.asarray(times, dtype=float)
    s2 = np.diag([1.0, 0.0, 1.0]).astype(complex)

    def rhs(_t, y):
        rho = (y[:9] + 1j * y[9:]).reshape(3, 3)
        drho = -gamma * (s2 @ rho + rho @ s2 - 2.0 * s2 @ rho @ s2)
        flat = drho.ravel()
        return np.concatenate([flat.real, flat.imag])

    y0 = np.concatenate([rho0.ravel().real, rho0.ravel().imag])
    sol = integrate.solve_ivp(rhs, (0.0, float(times[-1])), y0, t_eval=times,
                              method="DOP853", rtol=1e-12, atol=1e-14)
    if not sol.success:
        raise NumericalError(f"master equation integration failed: {sol.message}")
    y = sol.y.T
    return (y[:, :9] + 1j * y[:, 9:]).reshape(-1, 3, 3)
