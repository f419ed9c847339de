# config.py
import os
import numpy as np
from scipy import constants

import psutil
import torch
# default device of every engine, the CLI and the UI (DEFAULT_CONFIG["run"]["device"])
if torch.cuda.is_available():
    selected_device = "cuda:0"
else:
    selected_device = "cpu"


# Physical constants (SI). mu0/4pi is kept at its exact pre-2019 value.
HBAR = constants.hbar
KB = constants.k
EV = constants.electron_volt
MU0_OVER_4PI = 1e-7
TWO_PI = 2.0 * np.pi

# Environment variable holding the default number of sampling workers.
WORKERS_ENV = "HBN_DECOHERENCE_WORKERS"


def default_workers() -> int:
    """Worker count from HBN_DECOHERENCE_WORKERS, else the physical core count."""
    raw = os.environ.get(WORKERS_ENV, "").strip()
    if raw:
        try:
            value = int(raw)
        except ValueError:
            value = 0
        if value >= 1:
            return value
    return psutil.cpu_count(logical=False) or 1


# Define default configuration values.
DEFAULT_CONFIG = {
    "lattice": {
        "bond_length": 1.5e-10,  # B-N bond length a0 (m)
        "extent": 20,  # generation half-width in lattice vectors
        "bath": "fig2-30",
    },
    "field": {
        "B": 1.0,  # T, along the c axis
        "D": TWO_PI * 3.5e9,  # zero-field splitting (rad/s)
        "gamma_e": TWO_PI * 28.0249e9,  # rad/s/T
    },
    "exact": {
        "method": "block",  # block | full
        "max_dimension": 10_000,
    },
    "hpa": {
        "n_samples": 100,
        "rng_seed": 20240611,
        "frequency_shift_mode": "derived",  # derived | literal
        "integrator": "exact",  # exact | split
        "phase_budget": 0.05,  # rad per substep for the time-varying part of V
        "batch_size": 16,
        "keep_samples": False,
    },
    "phonon": {
        "omega_D": 0.175 * EV / HBAR,  # Debye energy 175 meV as rad/s
        "nu_s": 1e4,  # m/s
        "upsilon": 0.375,
        "lambda00": 1e-2,  # rad/s
        "lambda0": 0.0,  # single-phonon coupling, never enters a rate
        "A_cell": 3 * 1.5e-10 * np.sin(np.pi / 6),
        "temperature": 300.0,  # room temperature (K)
        "rate": "high_T",  # high_T | low_T | quadrature
        "lambda_min": 1e-4,
        "lambda_max": 1.0,
        "lambda_points": 41,
    },
    "analysis": {
        "threshold": 0.5,
        "fit_window": (0.01, 0.99),
        "fit_min_points": 8,
        # a trace is cut where |sx| drops below noise_sigmas standard errors
        "noise_sigmas": 2.0,
        "collapse_level": float(np.exp(-1.0)),
    },
    "run": {
        "engine": "hpa",
        "name": "run",
        "protocol": "echo",  # fid | echo
        "temperature": 0.1,  # K
        "t_max": 80e-6,  # s
        "n_points": 161,
        "out_dir": "out",
        "registry_path": "assets/run_registry.db",
        "device": selected_device,
    },
}

# Multilingual support
LANG_JSON = {
    "en": {
        "app_title": "hBN V_B Decoherence",
        "language_label": "Language",
        "bath_tab": "Spin Bath",
        "exact_tab": "Exact Engine",
        "hpa_tab": "HPA Engine",
        "phonon_tab": "Phonons",
        "combine_tab": "Fit & Combine",
        "runs_tab": "Runs",

        "bath_preset": "Bath Preset",
        "bath_show_btn": "Show Sites",
        "bath_sites": "Sites",
        "field_B": "Magnetic Field B (T)",
        "temperature": "Temperature (K)",
        "protocol": "Protocol",
        "t_max": "Maximum Time (s)",
        "n_points": "Number of Time Points",
        "run_name": "Run Name",

        "exact_method": "Method",
        "exact_start_btn": "Run Exact Simulation",

        "hpa_n_samples": "Number of Samples",
        "hpa_seed": "Seed",
        "hpa_mode": "Frequency Shift Mode",
        "hpa_integrator": "Integrator",
        "hpa_workers": "Workers",
        "hpa_device": "Device",
        "hpa_start_btn": "Run HPA Simulation",

        "phonon_temperature": "Phonon Temperature (K)",
        "phonon_lambda00": "Two-phonon Coupling λ00 (rad/s)",
        "phonon_T2prime": "Spin-bath T2′ (s)",
        "phonon_start_btn": "Compute Rates",

        "combine_gamma": "Phonon Rate γ (1/s)",
        "combine_T2prime": "T2′ (s)",
        "combine_start_btn": "Combine",
        "fit_trace": "Trace CSV",
        "fit_start_btn": "Fit Trace",

        "result": "Result",
        "trace_file": "Trace CSV",
        "registered_runs": "Registered Runs",
        "refresh_tables": "Refresh",
        "delete_selected_run": "Delete Selected Run",
    },
    "fr": {
        "app_title": "Décohérence du centre V_B dans le hBN",
        "language_label": "Langue",
        "bath_tab": "Bain de spins",
        "exact_tab": "Moteur exact",
        "hpa_tab": "Moteur HPA",
        "phonon_tab": "Phonons",
        "combine_tab": "Ajustement et combinaison",
        "runs_tab": "Exécutions",

        "bath_preset": "Préréglage du bain",
        "bath_show_btn": "Afficher les sites",
        "bath_sites": "Sites",
        "field_B": "Champ magnétique B (T)",
        "temperature": "Température (K)",
        "protocol": "Protocole",
        "t_max": "Temps maximal (s)",
        "n_points": "Nombre de points temporels",
        "run_name": "Nom de l'exécution",

        "exact_method": "Méthode",
        "exact_start_btn": "Lancer la simulation exacte",

        "hpa_n_samples": "Nombre d'échantillons",
        "hpa_seed": "Graine",
        "hpa_mode": "Mode de décalage de fréquence",
        "hpa_integrator": "Intégrateur",
        "hpa_workers": "Processus",
        "hpa_device": "Appareil",
        "hpa_start_btn": "Lancer la simulation HPA",

        "phonon_temperature": "Température des phonons (K)",
        "phonon_lambda00": "Couplage à deux phonons λ00 (rad/s)",
        "phonon_T2prime": "T2′ du bain de spins (s)",
        "phonon_start_btn": "Calculer les taux",

        "combine_gamma": "Taux phononique γ (1/s)",
        "combine_T2prime": "T2′ (s)",
        "combine_start_btn": "Combiner",
        "fit_trace": "Fichier CSV de trace",
        "fit_start_btn": "Ajuster la trace",

        "result": "Résultat",
        "trace_file": "Fichier CSV de trace",
        "registered_runs": "Exécutions enregistrées",
        "refresh_tables": "Actualiser",
        "delete_selected_run": "Supprimer l'exécution sélectionnée",
    },
}
