"""Deterministic JSON output: sorted keys, floats rounded to 12 significant digits."""

import json

import numpy as np


def round_floats(obj):
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return float(f"{v:.12g}") if np.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return round_floats(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    return obj


def write_json(path, data) -> None:
    with open(path, "w") as fh:
        json.dump(round_floats(data), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
