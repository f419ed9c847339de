import os

import pytest

from src.db_manager import DBManager


@pytest.fixture
def dbm(workdir):
    db = DBManager("assets/run_registry.db")
    yield db
    db.close()


def test_register_creates_run_directory(dbm, workdir):
    run_id = dbm.register_run("fig2", "hpa")
    info = dbm.get_run_basic_info(run_id)
    assert info == {"name": "fig2", "engine": "hpa", "dir_path": os.path.join("out", f"fig2_{run_id}")}
    assert os.path.isdir(workdir / "out" / f"fig2_{run_id}")
    assert dbm.get_run_id_by_dir(info["dir_path"]) == run_id


def test_explicit_directory_is_registered_once(dbm, workdir):
    first = dbm.register_run("a", "exact", str(workdir / "custom"))
    again = dbm.register_run("b", "exact", "custom")
    assert first == again
    assert dbm.get_run_dir(first) == str(workdir / "custom")


def test_ids_are_unique_and_listed_newest_first(dbm):
    ids = [dbm.register_run(f"r{i}", "phonon") for i in range(5)]
    assert len(set(ids)) == 5
    assert [r["id"] for r in dbm.get_all_runs()] == sorted(ids, reverse=True)
    assert dbm.get_all_runs(engine="hpa") == []


def test_configs_and_results_round_trip(dbm):
    run_id = dbm.register_run("x", "combine")
    dbm.save_run_config(run_id, {"engine": "combine", "T2prime": 3e-5})
    dbm.save_run_results(run_id, {"T2": 3.07e-5})
    dbm.save_run_results(run_id, {"T2": 3.1e-5})
    assert dbm.get_run_config(run_id)["T2prime"] == 3e-5
    assert dbm.get_run_results(run_id) == {"T2": 3.1e-5}


def test_delete_cascades(dbm, workdir):
    run_id = dbm.register_run("gone", "hpa")
    dbm.save_run_results(run_id, {"T2prime": 1.0})
    run_dir = dbm.get_run_dir(run_id)
    dbm.delete_run(run_id)
    assert not os.path.exists(run_dir)
    assert dbm.get_run_basic_info(run_id) is None
    assert dbm.get_run_results(run_id) is None
