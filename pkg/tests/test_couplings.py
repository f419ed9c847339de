import math

import numpy as np
import pytest

from src.config import HBAR, MU0_OVER_4PI, TWO_PI
from src.couplings import (CouplingSet, FieldParams, build_coupling_set, couplings_to_csv, hyperfine_couplings,
                           matrix_to_csv, nuclear_couplings, zeeman_frequencies)
from src.errors import DomainError, SingularityError
from src.lattice import BORON_11, NITROGEN_14, Site, SpeciesParams, ring_sites

A0 = 1.5e-10


def test_nearest_nitrogen_hyperfine():
    g = hyperfine_couplings(ring_sites(1, A0), FieldParams())
    assert np.allclose(g, g[0])
    assert g[0] / TWO_PI == pytest.approx(1.6935e6, rel=1e-3)


def test_inverse_cube_law():
    field = FieldParams()
    g1 = hyperfine_couplings(ring_sites(1, A0), field)[0]
    g3 = hyperfine_couplings(ring_sites(3, A0), field)[0]
    assert g3 == pytest.approx(g1 / 8.0, rel=1e-12)


def test_nuclear_couplings_between_neighbouring_borons():
    sites = ring_sites(2, A0)
    g = nuclear_couplings(sites)
    assert np.allclose(g, g.T)
    assert np.all(np.diag(g) == 0)
    # ring-2 borons 60 degrees apart sit sqrt(3) a0 from each other
    expected = MU0_OVER_4PI * HBAR * BORON_11.gamma**2 / (math.sqrt(3.0) * A0) ** 3
    assert g.max() == pytest.approx(expected, rel=1e-9)
    assert expected == pytest.approx(4430.0, rel=2e-3)


def test_zero_gyromagnetic_ratio_decouples():
    dark = SpeciesParams("X", 0.5, 0.0)
    sites = [Site(0, (A0, 0.0), dark, 1), Site(1, (0.0, A0), NITROGEN_14, 1)]
    cs = build_coupling_set(sites)
    assert cs.g_e[0] == 0.0
    assert cs.g_nn[0, 1] == 0.0
    assert cs.omega_n[0] == 0.0


def test_singular_geometries():
    at_origin = [Site(0, (0.0, 0.0), NITROGEN_14, 0)]
    with pytest.raises(SingularityError):
        hyperfine_couplings(at_origin, FieldParams())
    twins = [Site(0, (A0, 0.0), NITROGEN_14, 1), Site(1, (A0, 0.0), BORON_11, 1)]
    with pytest.raises(SingularityError):
        nuclear_couplings(twins)


def test_field_params():
    f = FieldParams(B=1.0)
    assert f.omega_e == pytest.approx(f.D - f.gamma_e)
    with pytest.raises(DomainError):
        FieldParams(B=-1.0)
    with pytest.raises(DomainError):
        zeeman_frequencies(ring_sites(1, A0), -0.5)


def test_zeeman_frequencies():
    sites = ring_sites(1, A0) + ring_sites(2, A0)
    w = zeeman_frequencies(sites, 1.5e-3)
    assert w[0] == pytest.approx(NITROGEN_14.gamma * 1.5e-3)
    assert w[-1] == pytest.approx(BORON_11.gamma * 1.5e-3)


def test_from_arrays_defaults_and_csv():
    cs = CouplingSet.from_arrays([1.0, 2.0], spins=0.5)
    assert cs.n_sites == 2
    assert cs.dims == [2, 2]
    assert cs.g_nn.shape == (2, 2)
    sites = ring_sites(1, A0)
    full = build_coupling_set(sites)
    lines = couplings_to_csv(sites, full).splitlines()
    assert lines[0] == "index,species,ring,g_e_rad_s,omega_n_rad_s"
    assert len(lines) == 4
    assert len(matrix_to_csv(full.g_nn).splitlines()) == 3
