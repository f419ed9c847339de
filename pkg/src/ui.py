# src/ui.py
import json
import logging
import os

import gradio as gr

from src.analysis import summarize
from src.config import DEFAULT_CONFIG, LANG_JSON
from src.db_manager import DBManager
from src.device_manager import device_manager
from src.lattice import STANDARD_BATHS, sites_to_csv, standard_bath
from src.phonon import combined_T2
from src.pipeline import TRACE_FILE, run_pipeline
from src.run_config import RunConfig
from src.traces import CoherenceTrace

logger = logging.getLogger(__name__)

dbm = DBManager()


def _match_device_value(config_device: str, available_devices: list) -> str:
    """Map a configured device ('cuda', 'cuda:1', 'cpu') onto the discovered list."""
    if config_device in available_devices:
        return config_device
    if config_device.startswith('cuda'):
        for device in available_devices:
            if device.startswith('cuda:'):
                return device
    return 'cpu'


def _get_run_choices_list():
    return [f"{r['id']} - {r['name']} ({r['engine']})" for r in dbm.get_all_runs()]


def _run_id(sel: str):
    if not sel or " - " not in sel:
        return None
    try:
        return int(sel.split(" - ")[0])
    except ValueError:
        return None


def _run(values: dict):
    """Run the pipeline from UI values; returns (result text, trace file or None)."""
    try:
        cfg = RunConfig.from_dict(values, "interface")
        outcome = run_pipeline(cfg)
    except Exception as e:
        logger.exception("Run from the interface failed")
        return f"❌ Error: {e}", None
    trace = os.path.join(outcome.out_dir, TRACE_FILE)
    text = json.dumps({"run_id": outcome.run_id, "out_dir": outcome.out_dir, "results": outcome.results},
                      indent=2, sort_keys=True, default=str)
    return text, trace if os.path.exists(trace) else None


def build_app_interface(selected_lang: str = "en"):
    """
    Top-level UI: one tab per engine plus the run registry. Runs started here
    go through the same pipeline and registry as the command line.
    """
    T = LANG_JSON[selected_lang]
    run_defaults = DEFAULT_CONFIG["run"]
    hpa_defaults = DEFAULT_CONFIG["hpa"]
    phonon_defaults = DEFAULT_CONFIG["phonon"]

    with gr.Blocks(title=T["app_title"]) as demo:

        # ========= Top: run registry / language ========= #
        with gr.Row():
            run_dropdown = gr.Dropdown(label=T["registered_runs"], choices=_get_run_choices_list(),
                                       value=None, interactive=True)
            refresh_runs_btn = gr.Button(T["refresh_tables"])
            delete_run_btn = gr.Button(T["delete_selected_run"], variant="stop")

        lang_select = gr.Dropdown(label=T["language_label"], choices=list(LANG_JSON.keys()),
                                  value=selected_lang, interactive=True)

        with gr.Tabs():

            # -------------- Bath and shared run settings -------------- #
            with gr.Tab(T["bath_tab"]) as bath_tab:
                with gr.Row():
                    with gr.Column():
                        run_name_box = gr.Textbox(label=T["run_name"], value=run_defaults["name"])
                        bath_box = gr.Dropdown(label=T["bath_preset"], choices=list(STANDARD_BATHS),
                                               value=DEFAULT_CONFIG["lattice"]["bath"])
                        field_box = gr.Number(label=T["field_B"], value=DEFAULT_CONFIG["field"]["B"])
                        temperature_box = gr.Number(label=T["temperature"], value=run_defaults["temperature"])
                    with gr.Column():
                        protocol_box = gr.Dropdown(label=T["protocol"], choices=["echo", "fid"],
                                                   value=run_defaults["protocol"])
                        t_max_box = gr.Number(label=T["t_max"], value=run_defaults["t_max"])
                        n_points_box = gr.Number(label=T["n_points"], value=run_defaults["n_points"], precision=0)
                bath_show_btn = gr.Button(T["bath_show_btn"])
                bath_sites_box = gr.Textbox(label=T["bath_sites"], lines=12, interactive=False)

            # -------------- Exact engine -------------- #
            with gr.Tab(T["exact_tab"]) as exact_tab:
                exact_method_box = gr.Dropdown(label=T["exact_method"], choices=["block", "full"],
                                               value=DEFAULT_CONFIG["exact"]["method"])
                exact_btn = gr.Button(T["exact_start_btn"])
                exact_output = gr.Textbox(label=T["result"], lines=14, interactive=False)
                exact_file = gr.File(label=T["trace_file"])

            # -------------- HPA engine -------------- #
            with gr.Tab(T["hpa_tab"]) as hpa_tab:
                with gr.Row():
                    hpa_samples_box = gr.Number(label=T["hpa_n_samples"], value=hpa_defaults["n_samples"], precision=0)
                    hpa_seed_box = gr.Number(label=T["hpa_seed"], value=hpa_defaults["rng_seed"], precision=0)
                    hpa_workers_box = gr.Number(label=T["hpa_workers"], value=device_manager.default_workers(),
                                                precision=0)
                with gr.Row():
                    hpa_mode_box = gr.Dropdown(label=T["hpa_mode"], choices=["derived", "literal"],
                                               value=hpa_defaults["frequency_shift_mode"])
                    hpa_integrator_box = gr.Dropdown(label=T["hpa_integrator"], choices=["exact", "split"],
                                                     value=hpa_defaults["integrator"])
                    available_devices = device_manager.get_available_devices_list()
                    hpa_device_box = gr.Dropdown(label=T["hpa_device"], choices=available_devices + ["auto"],
                                                 value=_match_device_value(run_defaults["device"], available_devices))
                hpa_btn = gr.Button(T["hpa_start_btn"])
                hpa_output = gr.Textbox(label=T["result"], lines=14, interactive=False)
                hpa_file = gr.File(label=T["trace_file"])

            # -------------- Phonons -------------- #
            with gr.Tab(T["phonon_tab"]) as phonon_tab:
                with gr.Row():
                    phonon_temperature_box = gr.Number(label=T["phonon_temperature"],
                                                       value=phonon_defaults["temperature"])
                    phonon_lambda_box = gr.Number(label=T["phonon_lambda00"], value=phonon_defaults["lambda00"])
                    phonon_T2prime_box = gr.Number(label=T["phonon_T2prime"], value=30e-6)
                phonon_btn = gr.Button(T["phonon_start_btn"])
                phonon_output = gr.Textbox(label=T["result"], lines=14, interactive=False)

            # -------------- Fit and combine -------------- #
            with gr.Tab(T["combine_tab"]) as combine_tab:
                with gr.Row():
                    combine_gamma_box = gr.Number(label=T["combine_gamma"], value=0.0)
                    combine_T2prime_box = gr.Number(label=T["combine_T2prime"], value=30e-6)
                combine_btn = gr.Button(T["combine_start_btn"])
                fit_trace_box = gr.File(label=T["fit_trace"], file_types=[".csv"])
                fit_btn = gr.Button(T["fit_start_btn"])
                combine_output = gr.Textbox(label=T["result"], lines=14, interactive=False)

            # -------------- Run registry -------------- #
            with gr.Tab(T["runs_tab"]) as runs_tab:
                runs_output = gr.Textbox(label=T["result"], lines=20, interactive=False)

        # ------------------------------------------------------------------
        # Callbacks
        def _shared(name, B, temperature, protocol, t_max, n_points):
            return {"name": name, "B": B, "temperature": temperature, "protocol": protocol,
                    "t_max": t_max, "n_points": int(n_points)}

        def bath_show_cb(bath):
            try:
                return sites_to_csv(standard_bath(bath))
            except Exception as e:
                return f"❌ Error: {e}"

        def exact_cb(name, bath, B, temperature, protocol, t_max, n_points, method):
            values = _shared(name, B, temperature, protocol, t_max, n_points)
            values.update(engine="exact", bath=bath, method=method)
            return _run(values)

        def hpa_cb(name, bath, B, temperature, protocol, t_max, n_points,
                   n_samples, seed, workers, mode, integrator, device):
            values = _shared(name, B, temperature, protocol, t_max, n_points)
            values.update(engine="hpa", bath=bath, n_samples=int(n_samples), rng_seed=int(seed),
                          workers=int(workers) if workers else None, frequency_shift_mode=mode,
                          integrator=integrator, device=device)
            return _run(values)

        def phonon_cb(name, phonon_temperature, lambda00, T2prime):
            text, _ = _run({"engine": "phonon", "name": name, "phonon_temperature": phonon_temperature,
                            "lambda00": lambda00, "lambda_sweep": True, "T2prime": T2prime})
            return text

        def combine_cb(gamma, T2prime):
            try:
                T2 = combined_T2(float(gamma), float(T2prime))
            except Exception as e:
                return f"❌ Error: {e}"
            return json.dumps({"gamma": gamma, "T2prime": T2prime, "T2": T2}, indent=2)

        def fit_cb(trace_file, protocol):
            if trace_file is None:
                return "❌ Error: no trace file"
            path = trace_file if isinstance(trace_file, str) else trace_file.name
            try:
                return json.dumps(summarize(CoherenceTrace.from_csv(path), protocol), indent=2, default=str)
            except Exception as e:
                return f"❌ Error: {e}"

        shared_inputs = [run_name_box, bath_box, field_box, temperature_box, protocol_box, t_max_box, n_points_box]
        bath_show_btn.click(fn=bath_show_cb, inputs=[bath_box], outputs=[bath_sites_box])
        exact_btn.click(fn=exact_cb, inputs=shared_inputs + [exact_method_box],
                        outputs=[exact_output, exact_file])
        hpa_btn.click(fn=hpa_cb,
                      inputs=shared_inputs + [hpa_samples_box, hpa_seed_box, hpa_workers_box,
                                              hpa_mode_box, hpa_integrator_box, hpa_device_box],
                      outputs=[hpa_output, hpa_file])
        phonon_btn.click(fn=phonon_cb, inputs=[run_name_box, phonon_temperature_box, phonon_lambda_box,
                                               phonon_T2prime_box], outputs=[phonon_output])
        combine_btn.click(fn=combine_cb, inputs=[combine_gamma_box, combine_T2prime_box], outputs=[combine_output])
        fit_btn.click(fn=fit_cb, inputs=[fit_trace_box, protocol_box], outputs=[combine_output])

        # ------------------------------------------------------------------
        # Callbacks: run registry
        def select_run_cb(sel: str):
            run_id = _run_id(sel)
            if run_id is None:
                return ""
            info = dbm.get_run_basic_info(run_id) or {}
            return json.dumps({"info": info, "config": dbm.get_run_config(run_id),
                               "results": dbm.get_run_results(run_id)}, indent=2, default=str)

        def delete_run_cb(sel: str):
            run_id = _run_id(sel)
            if run_id is not None:
                try:
                    dbm.delete_run(run_id)
                except Exception as e:
                    logger.warning("Error deleting run %s: %s", run_id, e)
            return gr.update(choices=_get_run_choices_list(), value=None), ""

        run_dropdown.change(fn=select_run_cb, inputs=[run_dropdown], outputs=[runs_output])
        delete_run_btn.click(fn=delete_run_cb, inputs=[run_dropdown], outputs=[run_dropdown, runs_output])
        refresh_runs_btn.click(lambda: gr.update(choices=_get_run_choices_list()), [], [run_dropdown])

        # ------------------------------------------------------------------
        # Callbacks: language switch
        def switch_language(lang_code: str):
            Tn = LANG_JSON[lang_code]
            return [
                gr.update(label=Tn["language_label"], value=lang_code),
                gr.update(label=Tn["bath_tab"]), gr.update(label=Tn["exact_tab"]), gr.update(label=Tn["hpa_tab"]),
                gr.update(label=Tn["phonon_tab"]), gr.update(label=Tn["combine_tab"]), gr.update(label=Tn["runs_tab"]),
                gr.update(label=Tn["registered_runs"]), gr.update(value=Tn["refresh_tables"]),
                gr.update(value=Tn["delete_selected_run"]),
                gr.update(label=Tn["run_name"]), gr.update(label=Tn["bath_preset"]), gr.update(label=Tn["field_B"]),
                gr.update(label=Tn["temperature"]), gr.update(label=Tn["protocol"]), gr.update(label=Tn["t_max"]),
                gr.update(label=Tn["n_points"]), gr.update(value=Tn["bath_show_btn"]), gr.update(label=Tn["bath_sites"]),
                gr.update(label=Tn["exact_method"]), gr.update(value=Tn["exact_start_btn"]),
                gr.update(label=Tn["result"]), gr.update(label=Tn["trace_file"]),
                gr.update(label=Tn["hpa_n_samples"]), gr.update(label=Tn["hpa_seed"]), gr.update(label=Tn["hpa_workers"]),
                gr.update(label=Tn["hpa_mode"]), gr.update(label=Tn["hpa_integrator"]), gr.update(label=Tn["hpa_device"]),
                gr.update(value=Tn["hpa_start_btn"]), gr.update(label=Tn["result"]), gr.update(label=Tn["trace_file"]),
                gr.update(label=Tn["phonon_temperature"]), gr.update(label=Tn["phonon_lambda00"]),
                gr.update(label=Tn["phonon_T2prime"]), gr.update(value=Tn["phonon_start_btn"]),
                gr.update(label=Tn["result"]),
                gr.update(label=Tn["combine_gamma"]), gr.update(label=Tn["combine_T2prime"]),
                gr.update(value=Tn["combine_start_btn"]), gr.update(label=Tn["fit_trace"]),
                gr.update(value=Tn["fit_start_btn"]), gr.update(label=Tn["result"]),
                gr.update(label=Tn["result"]),
            ]

        lang_select.change(
            fn=switch_language,
            inputs=[lang_select],
            outputs=[
                lang_select,
                bath_tab, exact_tab, hpa_tab, phonon_tab, combine_tab, runs_tab,
                run_dropdown, refresh_runs_btn, delete_run_btn,
                run_name_box, bath_box, field_box, temperature_box, protocol_box, t_max_box,
                n_points_box, bath_show_btn, bath_sites_box,
                exact_method_box, exact_btn, exact_output, exact_file,
                hpa_samples_box, hpa_seed_box, hpa_workers_box, hpa_mode_box, hpa_integrator_box, hpa_device_box,
                hpa_btn, hpa_output, hpa_file,
                phonon_temperature_box, phonon_lambda_box, phonon_T2prime_box, phonon_btn, phonon_output,
                combine_gamma_box, combine_T2prime_box, combine_btn, fit_trace_box, fit_btn, combine_output,
                runs_output,
            ],
        )

    return demo
