import numpy as np
import pytest

from src.config import HBAR, KB
from src.errors import DomainError, ShapeError
from src.spin_algebra import (diagonal_embed, embed, embed_product, product_dimension, spin_matrices,
                              spin_values, thermal_populations, thermal_state)


@pytest.mark.parametrize("s", [0.5, 1.0, 1.5, 2.5])
def test_angular_momentum_algebra(s):
    ops = spin_matrices(s)
    iz, ip, im = ops.Iz, ops.Iplus, ops.Iminus
    assert ops.dim == int(2 * s + 1)
    assert np.allclose(iz @ ip - ip @ iz, ip, atol=1e-12)
    assert np.allclose(ip @ im - im @ ip, 2 * iz, atol=1e-12)
    ix = 0.5 * (ip + im)
    iy = -0.5j * (ip - im)
    casimir = ix @ ix + iy @ iy + iz @ iz
    assert np.allclose(casimir, s * (s + 1) * np.eye(ops.dim), atol=1e-12)


def test_basis_order_is_descending():
    assert list(spin_values(1.5)) == [1.5, 0.5, -0.5, -1.5]


@pytest.mark.parametrize("s", [0.0, 0.7, -1.0, float("nan")])
def test_invalid_spin(s):
    with pytest.raises(DomainError):
        spin_matrices(s)


def test_thermal_populations():
    omega = 2 * np.pi * 13.66e6
    p = thermal_populations(1.5, omega, 0.1)
    assert p.sum() == pytest.approx(1.0, abs=1e-15)
    # nearly uniform at 0.1 K
    assert np.allclose(p, 0.25, atol=1e-3)
    cold = thermal_populations(1.5, omega, 1e-5)
    assert cold[-1] > 0.999
    assert np.allclose(thermal_populations(1.0, 0.0, 1e-6), 1.0 / 3.0)
    rho = thermal_state(0.5, omega, 1e-3)
    assert np.trace(rho).real == pytest.approx(1.0)


def test_thermal_state_at_log3_splitting():
    omega = 2 * np.pi * 13.66e6
    T = HBAR * omega / (KB * np.log(3.0))
    assert np.allclose(thermal_populations(0.5, omega, T), [0.25, 0.75], atol=1e-12)
    assert np.allclose(thermal_state(0.5, omega, T), np.diag([0.25, 0.75]), atol=1e-12)


@pytest.mark.parametrize("T,omega", [(0.0, 1.0), (-1.0, 1.0), (1.0, -1.0)])
def test_thermal_populations_domain(T, omega):
    with pytest.raises(DomainError):
        thermal_populations(1.0, omega, T)


def test_embedding():
    dims = [3, 2, 4]
    sx = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)
    op = embed(sx, 1, dims)
    assert op.shape == (24, 24)
    assert np.allclose(op, np.kron(np.eye(3), np.kron(sx, np.eye(4))))
    iz = spin_matrices(1.5).Iz
    both = embed_product({1: sx, 2: iz}, dims)
    assert np.allclose(both, embed(sx, 1, dims) @ embed(iz, 2, dims))
    assert np.allclose(diagonal_embed(np.real(np.diag(iz)), 2, dims), np.real(np.diag(embed(iz, 2, dims))))
    assert product_dimension(dims) == 24


def test_embedding_shape_errors():
    with pytest.raises(ShapeError):
        embed(np.eye(3), 1, [3, 2])
    with pytest.raises(ShapeError):
        embed(np.eye(2), 5, [3, 2])
    with pytest.raises(ShapeError):
        diagonal_embed(np.ones(3), 1, [3, 2])
