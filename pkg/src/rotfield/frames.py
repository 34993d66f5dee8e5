"""Metric, unit normal and second fundamental form of an isothermal chart."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateChart, NonIsothermalChart, first_witness
from .jets import Jet3
from .surfaces import SurfaceJet

__all__ = [
    "FrameData",
    "ISO_TOL",
    "dot",
    "cross",
    "isothermal_check",
    "frame",
    "check_identities_20",
    "weingarten_check",
    "h12_variants",
]

ISO_TOL = 1e-8


def dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def cross(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _vals(vec) -> np.ndarray:
    return np.stack([c.val for c in vec], axis=-1)


@dataclass
class FrameData:
    """Jets of lambda, n and h_ij (plus the chart's tangent jets) at a batch of points.

    ``lam`` and ``n`` are order-2 jets, ``h11/h12/h22`` order-1 jets, so values
    and first derivatives of all of them are available.  h21 is h12.
    """

    xu: tuple[Jet3, Jet3, Jet3]
    xv: tuple[Jet3, Jet3, Jet3]
    lam: Jet3
    n: tuple[Jet3, Jet3, Jet3]
    h11: Jet3
    h12: Jet3
    h22: Jet3
    iso_residual: np.ndarray

    @property
    def u0(self):
        return self.lam.u0

    @property
    def v0(self):
        return self.lam.v0

    @property
    def xu_val(self) -> np.ndarray:
        return _vals(self.xu)

    @property
    def xv_val(self) -> np.ndarray:
        return _vals(self.xv)

    @property
    def n_val(self) -> np.ndarray:
        return _vals(self.n)

    @property
    def n_u(self) -> np.ndarray:
        return np.stack([c.du for c in self.n], axis=-1)

    @property
    def n_v(self) -> np.ndarray:
        return np.stack([c.dv for c in self.n], axis=-1)

    @property
    def h(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.h11.val, self.h12.val, self.h22.val

    @property
    def h_scale(self) -> np.ndarray:
        return np.abs(self.h11.val) + np.abs(self.h12.val) + np.abs(self.h22.val)


def _tangents(s: SurfaceJet):
    xu = tuple(c.deriv("u") for c in s.x)
    xv = tuple(c.deriv("v") for c in s.x)
    return xu, xv


def isothermal_check(s: SurfaceJet):
    """Return ``(lambda, residual)`` with residual = max(|E - G|, |F|) / lambda."""
    xu, xv = _tangents(s)
    xu_, xv_ = _vals(xu), _vals(xv)
    E = np.einsum("...i,...i", xu_, xu_)
    F = np.einsum("...i,...i", xu_, xv_)
    G = np.einsum("...i,...i", xv_, xv_)
    if np.any(E <= 0):
        raise DegenerateChart("x_u vanishes", first_witness(E <= 0, s.u0, s.v0))
    return E, np.maximum(np.abs(E - G), np.abs(F)) / E


def frame(s: SurfaceJet, tol: float | None = ISO_TOL) -> FrameData:
    """Build the frame; pass ``tol=None`` to skip the isothermality check."""
    lam_val, resid = isothermal_check(s)
    if tol is not None and np.any(resid > tol):
        bad = resid > tol
        raise NonIsothermalChart(
            f"chart is not isothermal: residual {np.max(resid):.3e} > {tol:g}",
            first_witness(bad, s.u0, s.v0),
        )
    xu, xv = _tangents(s)
    lam = dot(xu, xu)
    nc = cross(xu, xv)
    norm2 = dot(nc, nc)
    if np.any(norm2.val <= 0):
        raise DegenerateChart("zero normal", first_witness(norm2.val <= 0, s.u0, s.v0))
    inv = norm2.sqrt().reciprocal()
    n = tuple(c * inv for c in nc)
    xuu = tuple(c.deriv("u") for c in xu)
    xuv = tuple(c.deriv("v") for c in xu)
    xvv = tuple(c.deriv("v") for c in xv)
    return FrameData(
        xu=xu,
        xv=xv,
        lam=lam,
        n=n,
        h11=dot(xuu, n),
        h12=dot(xuv, n),
        h22=dot(xvv, n),
        iso_residual=resid,
    )


def check_identities_20(s: SurfaceJet, f: FrameData) -> np.ndarray:
    """Per-point max residual of lam*n = x_u x x_v, x_u = x_v x n, x_v = n x x_u."""
    xu, xv, n = f.xu_val, f.xv_val, f.n_val
    lam = f.lam.val[..., None]
    r = np.concatenate(
        [
            lam * n - np.cross(xu, xv),
            xu - np.cross(xv, n),
            xv - np.cross(n, xu),
        ],
        axis=-1,
    )
    return np.max(np.abs(r), axis=-1)


def weingarten_check(f: FrameData) -> np.ndarray:
    """Per-point max residual of n_u = -(h11 x_u + h12 x_v)/lam and n_v = -(h12 x_u + h22 x_v)/lam."""
    xu, xv = f.xu_val, f.xv_val
    h11, h12, h22 = (h[..., None] for h in f.h)
    lam = f.lam.val[..., None]
    ru = f.n_u + (h11 * xu + h12 * xv) / lam
    rv = f.n_v + (h12 * xu + h22 * xv) / lam
    return np.max(np.abs(np.concatenate([ru, rv], axis=-1)), axis=-1)


def h12_variants(f: FrameData):
    """h12 three ways: (x_uv, n), -(x_u, n_v), -(x_v, n_u)."""
    return (
        f.h12.val,
        -np.einsum("...i,...i", f.xu_val, f.n_v),
        -np.einsum("...i,...i", f.xv_val, f.n_u),
    )
