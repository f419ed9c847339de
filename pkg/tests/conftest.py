from pathlib import Path

import numpy as np
import pytest

from src.couplings import CouplingSet


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run the acceptance-scale reproductions")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale run, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="need --runslow option to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    """Run inside a scratch directory so out/ and the registry land there."""
    monkeypatch.chdir(tmp_path)
    return Path.cwd()


@pytest.fixture
def toy_couplings():
    """Three mixed-spin nuclei with flip-flop couplings; bath dimension 24."""
    g_nn = np.array([[0.0, 5.0e3, 1.2e3],
                     [5.0e3, 0.0, 3.0e3],
                     [1.2e3, 3.0e3, 0.0]])
    return CouplingSet.from_arrays(g_e=[1.0e6, -4.0e5, 2.0e5], spins=[1.0, 1.5, 0.5], g_nn=g_nn,
                                   omega_n=[2.0e7, 2.05e7, 2.1e7], omega_e=3.0e7)
