# src/pipeline.py
"""
Runs one configured engine end to end: builds the bath, simulates, analyses,
writes the artifacts and records the run in the registry.

Artifacts in the run directory:
    trace.csv          time_s,sx[,stderr]           (exact, hpa)
    samples.npy        per-sample sx                (hpa with keep_samples)
    analysis.json      coherence times, fit, rates  (every engine)
    t2_vs_lambda.csv   lambda00 sweep               (phonon/combine with lambda_sweep)
    decoherence.csv    time_s,F                     (combine)
    manifest.json      resolved config and versions (every engine)
"""
import dataclasses
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import torch

from src import __version__
from src.analysis import summarize
from src.couplings import FieldParams
from src.db_manager import DBManager
from src.device_manager import device_manager
from src.errors import ConfigError
from src.exact_engine import ExactConfig, coherence_trace
from src.hpa_engine import HpaConfig, run_hpa
from src.lattice import LatticeSpec, Site, build_lattice, species_counts, standard_bath
from src.phonon import (PhononParams, combined_T2, decay_rate, decoherence_function,
                        dephasing_rates, t2_vs_lambda)
from src.run_config import RunConfig, load_config
from src.utils import read_json, write_json, write_text

logger = logging.getLogger(__name__)

TRACE_FILE = "trace.csv"
SAMPLES_FILE = "samples.npy"
ANALYSIS_FILE = "analysis.json"
MANIFEST_FILE = "manifest.json"
SWEEP_FILE = "t2_vs_lambda.csv"
DECOHERENCE_FILE = "decoherence.csv"


@dataclass
class RunOutcome:
    out_dir: str
    results: dict
    files: Dict[str, str] = field(default_factory=dict)
    run_id: Optional[int] = None


def bath_sites(cfg: RunConfig) -> List[Site]:
    """Explicit ring_count / n_boron / n_nitrogen win over the bath preset."""
    if cfg.ring_count is not None or cfg.n_boron is not None or cfg.n_nitrogen is not None:
        spec = LatticeSpec(a0=cfg.bond_length, ring_count=cfg.ring_count, n_boron=cfg.n_boron,
                           n_nitrogen=cfg.n_nitrogen, extent=cfg.lattice_extent)
        return build_lattice(spec)
    if not cfg.bath:
        raise ConfigError("bath: set a preset name or ring_count / n_boron / n_nitrogen")
    return standard_bath(cfg.bath, cfg.bond_length, cfg.lattice_extent)


def field_params(cfg: RunConfig) -> FieldParams:
    return FieldParams(B=cfg.B, D=cfg.D, gamma_e=cfg.gamma_e)


def phonon_params(cfg: RunConfig) -> PhononParams:
    return PhononParams(omega_D=cfg.omega_D, nu_s=cfg.nu_s, upsilon=cfg.upsilon, lambda00=cfg.lambda00,
                        A_cell=cfg.A_cell, T=cfg.phonon_temperature, lambda0=cfg.lambda0)


def lambda_grid(cfg: RunConfig) -> np.ndarray:
    """lambda00 = 0 followed by a log-spaced grid from lambda_min to lambda_max."""
    logs = np.logspace(np.log10(cfg.lambda_min), np.log10(cfg.lambda_max), cfg.lambda_points)
    return np.concatenate([[0.0], logs])


def _sweep_csv(lambdas, gammas, t2) -> str:
    lines = ["lambda00_rad_s,gamma_per_s,T2_s"]
    lines += [f"{lam:.12g},{g:.15g},{t:.15g}" for lam, g, t in zip(lambdas, gammas, t2)]
    return "\n".join(lines) + "\n"


def _manifest(cfg: RunConfig, device: str) -> dict:
    return {
        "version": __version__,
        "engine": cfg.engine,
        "seed": cfg.rng_seed,
        "device": device,
        "torch": torch.__version__,
        "numpy": np.__version__,
        "config": cfg.to_dict(),
    }


def _prepare_output(cfg: RunConfig, db: Optional[DBManager]):
    if db is not None:
        run_id = db.register_run(cfg.name, cfg.engine, cfg.output_dir)
        return run_id, db.get_run_dir(run_id)
    out_dir = cfg.output_dir or os.path.join("out", cfg.name)
    os.makedirs(out_dir, exist_ok=True)
    return None, out_dir


def _load_results(ref: str, registry_path: str) -> dict:
    """
    Analysis results of an earlier run: a registry id, a run directory,
    its manifest.json or an analysis.json.
    """
    ref = ref.strip()
    if ref.isdigit():
        db = DBManager(registry_path)
        try:
            results = db.get_run_results(int(ref))
        finally:
            db.close()
        if results is None:
            raise ConfigError(f"run {ref} is not in the registry {registry_path}")
        return results
    path = os.path.join(ref, ANALYSIS_FILE) if os.path.isdir(ref) else ref
    if os.path.basename(path) == MANIFEST_FILE:
        path = os.path.join(os.path.dirname(path), ANALYSIS_FILE)
    if not os.path.exists(path):
        raise ConfigError(f"no analysis results at {ref}")
    return read_json(path)


def _quantity(inline: Optional[float], ref: Optional[str], key: str, registry_path: str) -> float:
    if inline is not None:
        return float(inline)
    if not ref:
        raise ConfigError(f"{key}: give {key} or {key}_from")
    value = _load_results(ref, registry_path).get(key)
    if value is None:
        raise ConfigError(f"{key}_from: {ref} has no {key} (for T2prime, extend t_max of that run)")
    return float(value)


def _trace_results(trace, cfg: RunConfig, sites: List[Site]) -> dict:
    results = summarize(trace, cfg.protocol)
    results["n_sites"] = len(sites)
    results["species"] = species_counts(sites)
    return results


def _run_exact(cfg: RunConfig, out_dir: str, device: str):
    sites = bath_sites(cfg)
    trace = coherence_trace(ExactConfig(sites=sites, field=field_params(cfg), temperature=cfg.temperature,
                                        times=cfg.times, protocol=cfg.protocol, method=cfg.method,
                                        device=device))
    files = {"trace": os.path.join(out_dir, TRACE_FILE)}
    trace.to_csv(files["trace"])
    return _trace_results(trace, cfg, sites), files


def _run_hpa(cfg: RunConfig, out_dir: str, device: str):
    sites = bath_sites(cfg)
    trace = run_hpa(HpaConfig(sites=sites, field=field_params(cfg), temperature=cfg.temperature,
                              times=cfg.times, protocol=cfg.protocol, n_samples=cfg.n_samples,
                              rng_seed=cfg.rng_seed, dt=cfg.dt, frequency_shift_mode=cfg.frequency_shift_mode,
                              integrator=cfg.integrator, workers=cfg.workers, batch_size=cfg.batch_size,
                              device=device, keep_samples=cfg.keep_samples, phase_budget=cfg.phase_budget))
    files = {"trace": os.path.join(out_dir, TRACE_FILE)}
    trace.to_csv(files["trace"])
    if trace.samples is not None:
        files["samples"] = os.path.join(out_dir, SAMPLES_FILE)
        np.save(files["samples"], trace.samples)
    return _trace_results(trace, cfg, sites), files


def _sweep(cfg: RunConfig, params: PhononParams, T2prime: float, out_dir: str) -> str:
    lambdas, gammas, t2 = t2_vs_lambda(params, lambda_grid(cfg), T2prime,
                                       temperature=cfg.phonon_temperature, rate=cfg.phonon_rate)
    path = os.path.join(out_dir, SWEEP_FILE)
    write_text(path, _sweep_csv(lambdas, gammas, t2))
    return path


def _run_phonon(cfg: RunConfig, out_dir: str, device: str):
    params = phonon_params(cfg)
    results = {
        "temperature": params.T,
        "beta_omega_D": params.beta_omega_D,
        "lambda00": params.lambda00,
        "rate": cfg.phonon_rate,
        "gamma": decay_rate(params, cfg.phonon_rate),
        "rates": {r.regime: r.gamma for r in dephasing_rates(params)},
    }
    files = {}
    if cfg.lambda_sweep:
        T2prime = _quantity(cfg.T2prime, cfg.T2prime_from, "T2prime", cfg.registry_path)
        results["T2prime"] = T2prime
        files["sweep"] = _sweep(cfg, params, T2prime, out_dir)
    return results, files


def _run_combine(cfg: RunConfig, out_dir: str, device: str):
    T2prime = _quantity(cfg.T2prime, cfg.T2prime_from, "T2prime", cfg.registry_path)
    has_gamma = cfg.gamma is not None or bool(cfg.gamma_from)
    if not has_gamma and not cfg.lambda_sweep:
        raise ConfigError("gamma: give gamma or gamma_from")
    files = {}
    results = {"T2prime": T2prime}
    if has_gamma:
        gamma = _quantity(cfg.gamma, cfg.gamma_from, "gamma", cfg.registry_path)
        T2 = combined_T2(gamma, T2prime)
        times = np.linspace(0.0, 3.0 * T2, cfg.n_points)
        curve = decoherence_function(times, gamma, T2prime)
        lines = ["time_s,F"] + [f"{t:.12g},{f:.15g}" for t, f in zip(times, curve)]
        files["decoherence"] = os.path.join(out_dir, DECOHERENCE_FILE)
        write_text(files["decoherence"], "\n".join(lines) + "\n")
        results.update(gamma=gamma, T2=T2, decoherence_csv=DECOHERENCE_FILE)
    if cfg.lambda_sweep:
        files["sweep"] = _sweep(cfg, phonon_params(cfg), T2prime, out_dir)
        results["sweep_csv"] = SWEEP_FILE
    return results, files


ENGINE_RUNNERS = {
    "exact": _run_exact,
    "hpa": _run_hpa,
    "phonon": _run_phonon,
    "combine": _run_combine,
}


def run_pipeline(cfg: RunConfig) -> RunOutcome:
    cfg.validate()
    device = device_manager.resolve_device(cfg.device) if cfg.engine in ("exact", "hpa") else "cpu"
    db = DBManager(cfg.registry_path) if cfg.register else None
    try:
        run_id, out_dir = _prepare_output(cfg, db)
        logger.info("Starting %s run %r in %s", cfg.engine, cfg.name, out_dir)
        try:
            results, files = ENGINE_RUNNERS[cfg.engine](cfg, out_dir, device)
        except Exception:
            if db is not None and run_id is not None:
                # a failed run leaves nothing behind in the registry
                db.delete_run(run_id, remove_files=cfg.output_dir is None)
            raise
        files["analysis"] = os.path.join(out_dir, ANALYSIS_FILE)
        write_json(files["analysis"], results)
        files["manifest"] = os.path.join(out_dir, MANIFEST_FILE)
        write_json(files["manifest"], _manifest(cfg, device))
        if db is not None:
            db.save_run_config(run_id, cfg.to_dict())
            db.save_run_results(run_id, read_json(files["analysis"]))
    finally:
        if db is not None:
            db.close()
    logger.info("Run %r finished: %s", cfg.name, ", ".join(sorted(files)))
    return RunOutcome(out_dir=out_dir, results=results, files=files, run_id=run_id)


def run_from_file(path: str, overrides: Optional[dict] = None) -> RunOutcome:
    return run_pipeline(load_config(path, overrides))


def rerun_config(manifest_path: str, output_dir: Optional[str] = None) -> RunConfig:
    """Config of a previous run, optionally redirected to a new directory."""
    cfg = load_config(manifest_path)
    return dataclasses.replace(cfg, output_dir=output_dir) if output_dir else cfg
