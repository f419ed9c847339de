# src/cli.py
"""
Command-line surface.

    python -m src.cli lattice  --set bath=fig1-n-ring7
    python -m src.cli couplings --set ring_count=2 --matrix
    python -m src.cli hpa      --config fig2.cfg --set n_samples=200
    python -m src.cli exact    --set bath=fig1-b-ring5 --set protocol=fid
    python -m src.cli phonon   --set lambda_sweep=true --set T2prime=30e-6
    python -m src.cli combine  --set gamma=0 --set T2prime_from=out/fig2_1718000000000
    python -m src.cli fit      out/fig2_1718000000000/trace.csv
    python -m src.cli run      out/fig2_1718000000000/manifest.json

Exit codes: 0 success, 2 invalid input, 3 numerical or resource failure.
"""
import argparse
import json
import logging
import sys
from typing import Optional, Sequence

from src import __version__
from src.analysis import summarize
from src.couplings import build_coupling_set, couplings_to_csv, matrix_to_csv
from src.errors import exit_code_for
from src.pipeline import bath_sites, field_params, run_from_file, run_pipeline
from src.run_config import RunConfig, load_config, parse_overrides
from src.traces import CoherenceTrace
from src.lattice import sites_to_csv
from src.utils import write_text

logger = logging.getLogger("src.cli")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
ENGINE_COMMANDS = ("exact", "hpa", "phonon", "combine")


def _add_config_args(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key = value config file or a manifest.json")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config key (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m src.cli",
                                     description="Decoherence of the hBN V_B electron spin.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--log-level", default="INFO",
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"))
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lattice", help="print the selected bath sites as CSV")
    _add_config_args(p)
    p.add_argument("--out", help="write the CSV here instead of stdout")

    p = sub.add_parser("couplings", help="print hyperfine couplings (or the nuclear coupling matrix) as CSV")
    _add_config_args(p)
    p.add_argument("--matrix", action="store_true", help="emit the N x N nuclear coupling matrix")
    p.add_argument("--out")

    for name in ENGINE_COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} pipeline")
        _add_config_args(p)

    p = sub.add_parser("fit", help="coherence time and stretched-exponential fit of a trace CSV")
    p.add_argument("trace")
    p.add_argument("--protocol", default="echo", choices=("fid", "echo"))
    p.add_argument("--threshold", type=float, default=0.5)

    p = sub.add_parser("run", help="run the engine named in a config file")
    p.add_argument("config")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    return parser


def _config(args, engine: Optional[str] = None) -> RunConfig:
    overrides = parse_overrides(args.overrides)
    if engine is not None:
        overrides["engine"] = engine
    if args.config:
        return load_config(args.config, overrides)
    return RunConfig.from_dict(overrides, "command line")


def _emit(text: str, out: Optional[str]):
    if out:
        write_text(out, text)
        logger.info("Wrote %s", out)
    else:
        sys.stdout.write(text)


def _print_json(data: dict):
    sys.stdout.write(json.dumps(data, indent=2, sort_keys=True, default=str) + "\n")


def dispatch(args) -> int:
    if args.command == "lattice":
        _emit(sites_to_csv(bath_sites(_config(args))), args.out)
    elif args.command == "couplings":
        cfg = _config(args)
        sites = bath_sites(cfg)
        couplings = build_coupling_set(sites, field_params(cfg))
        text = matrix_to_csv(couplings.g_nn) if args.matrix else couplings_to_csv(sites, couplings)
        _emit(text, args.out)
    elif args.command == "fit":
        trace = CoherenceTrace.from_csv(args.trace)
        _print_json(summarize(trace, args.protocol, args.threshold))
    else:
        if args.command == "run":
            outcome = run_from_file(args.config, parse_overrides(args.overrides))
        else:
            outcome = run_pipeline(_config(args, args.command))
        _print_json({"run_id": outcome.run_id, "out_dir": outcome.out_dir, "results": outcome.results})
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT, stream=sys.stderr)
    try:
        return dispatch(args)
    except Exception as e:
        code = exit_code_for(e)
        if code == 1:
            logger.exception("Unexpected failure")
        print(f"error: {e}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
