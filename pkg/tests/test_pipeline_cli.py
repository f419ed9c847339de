import json
import os

import numpy as np
import pytest

from src.cli import main
from src.db_manager import DBManager
from src.pipeline import lambda_grid, rerun_config, run_pipeline
from src.run_config import RunConfig

SMALL_HPA = dict(engine="hpa", bath="fig1-n-ring1", n_samples=4, t_max=2e-6, n_points=5, workers=1,
                 rng_seed=5, register=False)


def _json_out(capsys) -> dict:
    return json.loads(capsys.readouterr().out)


def test_hpa_run_is_reproducible_from_its_manifest(workdir):
    first = run_pipeline(RunConfig(output_dir="a", **SMALL_HPA))
    second = run_pipeline(RunConfig(output_dir="b", **SMALL_HPA))
    trace_a = (workdir / "a" / "trace.csv").read_bytes()
    assert trace_a == (workdir / "b" / "trace.csv").read_bytes()
    assert trace_a.startswith(b"time_s,sx,stderr\n")
    assert first.results == second.results
    manifest = json.loads((workdir / "a" / "manifest.json").read_text())
    assert manifest["seed"] == 5
    assert manifest["config"]["n_samples"] == 4
    assert {"version", "torch", "numpy", "device"} <= set(manifest)
    replay = run_pipeline(rerun_config(str(workdir / "a" / "manifest.json"), output_dir="c"))
    assert (workdir / "c" / "trace.csv").read_bytes() == trace_a
    assert replay.files["trace"].endswith(os.path.join("c", "trace.csv"))


def test_keep_samples_writes_npy(workdir):
    outcome = run_pipeline(RunConfig(output_dir="s", keep_samples=True, **SMALL_HPA))
    samples = np.load(outcome.files["samples"])
    assert samples.shape == (4, 5)


def test_registered_run_lands_in_out_dir(workdir):
    outcome = run_pipeline(RunConfig(**{**SMALL_HPA, "register": True, "name": "tiny"}))
    assert outcome.run_id is not None
    assert os.path.basename(outcome.out_dir) == f"tiny_{outcome.run_id}"
    db = DBManager("assets/run_registry.db")
    try:
        assert db.get_run_config(outcome.run_id)["n_samples"] == 4
        assert "T2prime" in db.get_run_results(outcome.run_id)
    finally:
        db.close()


def test_exact_cli_run(workdir, capsys):
    code = main(["exact", "--set", "bath=fig1-b-ring2", "--set", "protocol=fid", "--set", "t_max=1e-6",
                 "--set", "n_points=11", "--set", "register=false", "--set", "output_dir=ex"])
    assert code == 0
    out = _json_out(capsys)
    assert out["results"]["protocol"] == "fid"
    assert out["results"]["n_sites"] == 3
    assert (workdir / "ex" / "trace.csv").exists()


def test_exact_on_a_large_bath_fails_with_resource_code(workdir, capsys):
    code = main(["exact", "--set", "bath=fig2-30", "--set", "register=false", "--set", "output_dir=big"])
    assert code == 3
    assert "error:" in capsys.readouterr().err


def test_validation_errors_exit_with_2(workdir, capsys):
    assert main(["hpa", "--set", "temperature=-1"]) == 2
    assert "temperature" in capsys.readouterr().err
    assert main(["hpa", "--set", "n_sample=3"]) == 2
    assert "n_sample" in capsys.readouterr().err
    assert main(["run", "missing.cfg"]) == 2


def test_phonon_sweep(workdir, capsys):
    code = main(["phonon", "--set", "lambda_sweep=true", "--set", "T2prime=30e-6", "--set", "name=ph"])
    assert code == 0
    out = _json_out(capsys)
    rates = out["results"]["rates"]
    assert set(rates) == {"low_T", "low_T_bose_exact", "high_T", "quadrature"}
    sweep = np.loadtxt(os.path.join(out["out_dir"], "t2_vs_lambda.csv"), delimiter=",", skiprows=1)
    cfg = RunConfig()
    assert sweep.shape == (lambda_grid(cfg).size, 3)
    assert sweep[0, 2] == pytest.approx(1.0225 * 30e-6, rel=1e-4)
    assert np.all(np.diff(sweep[:, 2]) <= 0)


def test_combine_inline_and_from_previous_run(workdir, capsys):
    assert main(["combine", "--set", "gamma=0", "--set", "T2prime=30e-6", "--set", "register=false",
                 "--set", "output_dir=c1"]) == 0
    report = _json_out(capsys)["results"]
    assert report["T2"] == pytest.approx(1.0225 * 30e-6, rel=1e-4)
    curve = np.loadtxt(workdir / "c1" / "decoherence.csv", delimiter=",", skiprows=1)
    assert curve[0, 1] == 1.0

    prior = workdir / "prior"
    prior.mkdir()
    (prior / "analysis.json").write_text(json.dumps({"T2prime": 2e-5}))
    assert main(["combine", "--set", f"T2prime_from={prior}", "--set", "gamma=1e3", "--set", "register=false",
                 "--set", "output_dir=c2"]) == 0
    report = _json_out(capsys)["results"]
    assert report["T2prime"] == 2e-5
    assert report["T2"] < 1.0225 * 2e-5


def test_combine_from_registered_run_id(workdir, capsys):
    assert main(["phonon", "--set", "lambda00=1e-2", "--set", "name=rate"]) == 0
    run_id = _json_out(capsys)["run_id"]
    assert main(["combine", "--set", f"gamma_from={run_id}", "--set", "T2prime=3e-5"]) == 0
    report = _json_out(capsys)["results"]
    assert report["gamma"] > 0


def test_combine_without_gamma_is_a_config_error(workdir, capsys):
    assert main(["combine", "--set", "T2prime=3e-5", "--set", "register=false"]) == 2
    assert "gamma" in capsys.readouterr().err


def test_lattice_couplings_and_fit_subcommands(workdir, capsys):
    assert main(["lattice", "--set", "bath=fig1-n-ring7", "--out", "sites.csv"]) == 0
    lines = (workdir / "sites.csv").read_text().splitlines()
    assert lines[0] == "index,species,x_m,y_m,ring" and len(lines) == 4

    assert main(["couplings", "--set", "ring_count=2", "--matrix"]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert len(rows) == 9 and len(rows[0].split(",")) == 9

    t = np.linspace(0.0, 60e-6, 241)
    body = "\n".join(f"{x:.12g},{np.exp(-(x / 30e-6) ** 6):.15g}" for x in t)
    (workdir / "trace.csv").write_text("time_s,sx\n" + body + "\n")
    assert main(["fit", "trace.csv"]) == 0
    fit = _json_out(capsys)
    assert fit["fit"]["n"] == pytest.approx(6.0, abs=1e-3)
    assert fit["T2prime"] == pytest.approx(30e-6 * np.log(2) ** (1 / 6), rel=1e-3)


def test_run_subcommand_reads_a_config_file(workdir, capsys):
    (workdir / "rate.cfg").write_text("engine = phonon\nregister = false\noutput_dir = r  # scratch\n")
    assert main(["run", "rate.cfg", "--set", "phonon_rate=quadrature"]) == 0
    out = _json_out(capsys)
    assert out["run_id"] is None
    assert out["results"]["rate"] == "quadrature"
    assert out["results"]["gamma"] == pytest.approx(out["results"]["rates"]["quadrature"])
    assert (workdir / "r" / "manifest.json").exists()
