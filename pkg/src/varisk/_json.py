"""Canonical JSON/CSV output: sorted keys, floats at 12 significant digits.

Fixed formatting makes repeated runs byte-identical and artifact diffs
meaningful in CI.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

SIG_DIGITS = 12


def format_float(x: float) -> str:
    return f"{float(x):.{SIG_DIGITS}g}"


def round_floats(obj):
    """Recursively normalize floats (and numpy scalars) for stable dumps."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(format_float(float(obj)))
    if isinstance(obj, dict):
        return {str(k): round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [round_floats(v) for v in obj.tolist()]
    return obj


def dump_json(obj, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(round_floats(obj), fh, sort_keys=True, indent=2,
                  allow_nan=False)
        fh.write("\n")


def dumps_json(obj) -> str:
    return json.dumps(round_floats(obj), sort_keys=True, indent=2,
                      allow_nan=False)
