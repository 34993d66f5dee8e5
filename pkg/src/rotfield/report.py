"""Report envelope and a JSON writer that prints every float with 17 significant digits."""

from __future__ import annotations

import datetime as _dt
import json
import math

import numpy as np

SCHEMA_VERSION = "1.0"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, np.str_):
        return str(obj)
    return obj


def _emit(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, float):
        return "null" if not math.isfinite(obj) else format(obj, ".17g")
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_emit(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_emit(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _emit(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    return json.dumps(obj)


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON (insertion-ordered keys); NaN and infinities become null."""
    return _emit(_plain(obj), indent, 0) + "\n"


def envelope(command: str, config: dict, results: dict, checks: list[dict], discrepancies: list[dict]) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "config": config,
        "verdict": "PASS" if all(c["verdict"] == "PASS" for c in checks) else "FAIL",
        "checks": checks,
        "discrepancies": discrepancies,
        "results": results,
    }


def check(name: str, passed: bool, value=None, tol=None, witness=None, **extra) -> dict:
    """One verdict line; a FAIL always carries a witness (None only when no point applies)."""
    out = {"name": name, "verdict": "PASS" if passed else "FAIL"}
    if value is not None:
        out["value"] = value
    if tol is not None:
        out["tol"] = tol
    if not passed or witness is not None:
        out["witness"] = witness
    out.update(extra)
    return out
