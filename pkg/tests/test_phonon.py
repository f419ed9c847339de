import dataclasses
import math

import numpy as np
import pytest
from scipy import special

from src.config import HBAR, KB
from src.errors import DomainError
from src.phonon import (PhononParams, combined_T2, decay_rate, decay_rate_high_T, decay_rate_low_T,
                        decay_rate_quadrature, decoherence_function, dephasing_master_equation,
                        dephasing_rates, t2_vs_lambda, thermal_integral)

BASE = PhononParams()
ZETA = special.zeta(4 * BASE.upsilon + 2)


def _at(beta_omega_D: float, p: PhononParams = BASE) -> PhononParams:
    return dataclasses.replace(p, T=HBAR * p.omega_D / (KB * beta_omega_D))


def _slope(f, p: PhononParams, field: str, value: float) -> float:
    lo = f(dataclasses.replace(p, **{field: value}))
    hi = f(dataclasses.replace(p, **{field: 2.0 * value}))
    return math.log2(hi / lo)


def test_debye_frequency_default():
    assert BASE.omega_D == pytest.approx(2.6587e14, rel=1e-4)
    assert BASE.power == pytest.approx(3.5)


def test_quadrature_matches_low_temperature_limit():
    p = _at(50.0)
    quad = decay_rate_quadrature(p)
    assert quad == pytest.approx(decay_rate_low_T(p, bose_exact=True), rel=1e-2)
    # the literal closed form drops exactly the zeta factor
    assert quad / decay_rate_low_T(p) == pytest.approx(ZETA, rel=1e-3)


def test_quadrature_matches_high_temperature_limit():
    p = _at(0.1)
    assert decay_rate_quadrature(p) == pytest.approx(decay_rate_high_T(p), rel=2e-2)


def test_scaling_exponents():
    low = _at(200.0)
    high = _at(1e-3)
    assert _slope(decay_rate_low_T, low, "T", low.T) == pytest.approx(4 * BASE.upsilon + 3, abs=1e-3)
    assert _slope(decay_rate_quadrature, low, "T", low.T) == pytest.approx(4 * BASE.upsilon + 3, abs=1e-3)
    assert _slope(decay_rate_high_T, high, "T", high.T) == pytest.approx(2.0, abs=1e-3)
    assert _slope(decay_rate_quadrature, high, "T", high.T) == pytest.approx(2.0, abs=1e-3)
    assert _slope(decay_rate_high_T, BASE, "lambda00", 1e-2) == pytest.approx(2.0, abs=1e-12)


def test_room_temperature_rate_scale():
    # gamma grows as lambda00^2 with about 4e8 s^-1 per (rad/s)^2 at 300 K
    assert decay_rate_high_T(dataclasses.replace(BASE, lambda00=1.0)) == pytest.approx(4.12e8, rel=2e-2)


def test_rate_summary_and_dispatch():
    results = {r.regime: r.gamma for r in dephasing_rates(BASE)}
    assert set(results) == {"low_T", "low_T_bose_exact", "high_T", "quadrature"}
    assert decay_rate(BASE, "quadrature") == results["quadrature"]
    with pytest.raises(DomainError):
        decay_rate(BASE, "medium_T")


def test_thermal_integral_infinite_limit():
    assert thermal_integral(3.5, 1e4) == pytest.approx(special.gamma(4.5) * ZETA, rel=1e-8)
    with pytest.raises(DomainError):
        thermal_integral(1.0, 10.0)


def test_lambda0_never_enters_a_rate():
    with_linear = dataclasses.replace(BASE, lambda0=1e6)
    assert decay_rate_quadrature(with_linear) == decay_rate_quadrature(BASE)


@pytest.mark.parametrize("field,value", [("T", 0.0), ("omega_D", -1.0), ("lambda00", -1.0)])
def test_invalid_params(field, value):
    with pytest.raises(DomainError):
        dataclasses.replace(BASE, **{field: value})


def test_combined_T2():
    T2prime = 30e-6
    assert combined_T2(0.0, T2prime) == pytest.approx(1.0225 * T2prime, rel=1e-4)
    assert combined_T2(math.log(2) / 1e-9, T2prime) == pytest.approx(1e-9, rel=1e-6)
    t2 = combined_T2(1e4, T2prime)
    assert decoherence_function(t2, 1e4, T2prime) == pytest.approx(0.5, abs=1e-12)
    assert decoherence_function(0.0, 1e4, T2prime) == 1.0
    with pytest.raises(DomainError):
        combined_T2(-1.0, T2prime)


def test_t2_versus_lambda_sweep():
    grid = np.concatenate([[0.0], np.logspace(-4, 0, 41)])
    lambdas, gammas, t2 = t2_vs_lambda(BASE, grid, 30e-6, temperature=300.0)
    assert np.all(np.diff(t2) <= 0)
    assert t2[0] == pytest.approx(1.0225 * 30e-6, rel=1e-4)
    assert gammas[0] == 0.0
    assert t2[-1] < 1e-6
    with pytest.raises(DomainError):
        t2_vs_lambda(BASE, [1.0, 0.5], 30e-6)


def test_master_equation_reproduces_exponential_coherence():
    gamma = 1e5
    plus = np.array([1.0, 1.0, 0.0]) / math.sqrt(2.0)
    times = np.linspace(0.0, 5e-5, 26)
    rho = dephasing_master_equation(gamma, np.outer(plus, plus), times)
    assert np.allclose(rho[:, 0, 1].real / 0.5, np.exp(-gamma * times), atol=1e-8)
    assert np.allclose(np.trace(rho, axis1=1, axis2=2).real, 1.0, atol=1e-10)
    # the +1/-1 coherence is untouched by Sz^2 dephasing
    both = np.array([1.0, 0.0, 1.0]) / math.sqrt(2.0)
    rho = dephasing_master_equation(gamma, np.outer(both, both), times)
    assert np.allclose(rho[:, 0, 2].real, 0.5, atol=1e-10)
