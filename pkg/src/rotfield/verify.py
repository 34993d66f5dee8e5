"""Checks of a rotation field built from a bending, using finite differences in (u, v).

The field itself is exact to rounding (complex-step z plus a pointwise least
squares solve); only its (u, v) derivatives are approximated here.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .darboux import FieldJet, bending_residual, field_from_bending, residuals_from_block, rotation_field_sampler
from .frames import frame
from .reduction import assemble_pdes, reduce
from .surfaces import SurfaceDef

__all__ = ["fd_first", "fd_second", "verify_bending_field"]

Sampler = Callable[[np.ndarray, np.ndarray], np.ndarray]


def fd_first(sample: Sampler, u, v, h: float):
    """Central first differences of a vector sampler, each ``(*batch, 3)``."""
    yu = (sample(u + h, v) - sample(u - h, v)) / (2 * h)
    yv = (sample(u, v + h) - sample(u, v - h)) / (2 * h)
    return yu, yv


def fd_second(sample: Sampler, u, v, h: float) -> np.ndarray:
    """``(f_u, f_v, f_uu, f_uv, f_vv)`` stacked on the last axis, by central differences."""
    f0 = sample(u, v)
    fpu, fmu = sample(u + h, v), sample(u - h, v)
    fpv, fmv = sample(u, v + h), sample(u, v - h)
    fpp, fpm = sample(u + h, v + h), sample(u + h, v - h)
    fmp, fmm = sample(u - h, v + h), sample(u - h, v - h)
    return np.stack(
        [
            (fpu - fmu) / (2 * h),
            (fpv - fmv) / (2 * h),
            (fpu - 2 * f0 + fmu) / h**2,
            (fpp - fpm - fmp + fmm) / (4 * h * h),
            (fpv - 2 * f0 + fmv) / h**2,
        ],
        axis=-1,
    )


def verify_bending_field(
    surface: SurfaceDef,
    param: str,
    u,
    v,
    h_first: float = 1e-4,
    h_second: float = 1e-3,
    form: str = "closed",
) -> dict[str, np.ndarray]:
    """Residuals of the rotation field of ``z = dx/d(param)`` at points ``(u, v)``.

    Keys: ``bending`` (linearised isometry of z, exact jets), ``lsq`` (defect of
    the y solve), ``r5`` and ``r8``..``r11`` (FD step ``h_first``), and ``eq18``,
    ``eq19`` (FD step ``h_second``; NaN at inadmissible points).
    """
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    s = surface.jets(u, v)
    z = FieldJet(surface.param_derivative(param, u, v).x)
    _, lsq = field_from_bending(z, s)
    sample = rotation_field_sampler(surface, param)
    f = frame(s)
    yu, yv = fd_first(sample, u, v, h_first)
    out = {"bending": np.max(np.abs(bending_residual(z, s)), axis=-1), "lsq": lsq}
    res = residuals_from_block(yu, yv, f)
    out["r5"] = np.max(np.abs(res.pop("r5")), axis=-1)
    out.update({k: np.abs(val) for k, val in res.items()})

    rd = reduce(f, strict=False)
    eq18, eq19 = assemble_pdes(rd, f, form)
    y3 = fd_second(lambda a, b: sample(a, b)[..., 2], u, v, h_second)
    for pde in (eq18, eq19):
        c = pde.coeffs
        val = c[..., 0] * y3[..., 2] + c[..., 1] * y3[..., 3] + c[..., 2] * y3[..., 4]
        val = val + c[..., 3] * y3[..., 0] + c[..., 4] * y3[..., 1]
        out[pde.which] = np.abs(val)
    return out
