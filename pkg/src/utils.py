# src/utils.py

import json
import os

import numpy as np

from src.config import DEFAULT_CONFIG


def compose_run_dir(run_name: str, run_id: int, out_root: str = DEFAULT_CONFIG["run"]["out_dir"]) -> str:
    """Output directory of a run: ./out/{run_name}_{run_id}/"""
    return os.path.join(out_root, f"{run_name}_{run_id}")


def _to_builtin(value):
    if isinstance(value, dict):
        return {str(k): _to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return _to_builtin(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        # JSON has no inf/nan
        return None
    return value


def write_json(path: str, data: dict):
    """Sorted, indented JSON with numpy scalars converted; stable across runs."""
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_to_builtin(data), f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")


def read_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def write_text(path: str, text: str):
    # newline="" keeps the CSV bytes identical on every platform
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
