"""Closed-form reference values for the built-in presets.

Minors refer to the row-scaled Darboux matrix (``paper_scaling=True``).
"""

from __future__ import annotations

import math

import numpy as np


def _sphere_36(u, v, p):
    r2 = u * u + v * v
    return 4 * r2 * (r2 + 1) ** 2


def _sphere_25(u, v, p):
    return (u * u + v * v + 1) ** 2 * (u * u + (v - 1) ** 2) * (u * u + (v + 1) ** 2)


def _helicoid_36(u, v, p):
    return -np.cosh(v) ** 2 * math.sin(p["t"])


MINORS = {
    "sphere-stereo": {(3, 6): _sphere_36, (2, 5): _sphere_25},
    "helicoid-catenoid": {(3, 6): _helicoid_36},
}

# rank expected away from the excluded lines
RANK = {"plane": 3, "sphere-stereo": 4, "helicoid-catenoid": 4}

# (class of the diagonal equation, class of the mixed equation)
CLASSES = {
    "plane": ("inadmissible", "inadmissible"),
    "sphere-stereo": ("elliptic", "degenerate"),
    "helicoid-catenoid": ("hyperbolic", "hyperbolic"),
}

# Helicoid-catenoid degeneracy function d: the stated closed form and the one
# obtained by substituting h_ij and x3 derivatives into its definition.
D_STATED = {"helicoid-catenoid": lambda u, v, p: -2 * math.cos(p["t"]) ** 2 * math.sin(p["t"])}
D_DIRECT = {"helicoid-catenoid": lambda u, v, p: -math.sin(p["t"]) + 0 * u}

# zero lines of n1 as (axis, offset, period)
N1_LINES = {"helicoid-catenoid": ("u", math.pi / 2, math.pi), "sphere-stereo": ("u", 0.0, None)}
N1_LINES_STATED = {"sphere-stereo": ("v", 0.0, None)}

# sets where d vanishes as a single point
D_POINT = {"sphere-stereo": (0.0, 0.0)}


def compare(value, reference) -> dict:
    value = np.asarray(value, float)
    reference = np.asarray(reference, float)
    abs_err = np.abs(value - reference)
    rel_err = abs_err / np.maximum(np.abs(reference), np.finfo(float).tiny)
    return {"abs_err": abs_err, "rel_err": rel_err}


def line_distance(points: np.ndarray, axis: str, offset: float, period: float | None) -> np.ndarray:
    x = points[:, 0 if axis == "u" else 1] - offset
    if period is not None:
        x = (x + period / 2) % period - period / 2
    return np.abs(x)
