"""The extended first-order system for a rotation field and its pointwise algebra.

Rows of the 4x6 coefficient matrix act on the first-derivative block
``Y = (y1u, y2u, y3u, y1v, y2v, y3v)``:

1. (y_u, n) = 0
2. (y_v, n) = 0
3. (y_u, x_u) + (y_v, x_v) = 0
4. h12 (y_u, x_u) + h22 (y_u, x_v) - h11 (y_v, x_u) - h12 (y_v, x_v) = 0

Row 4 follows from cross-differentiating rows 1 and 2 and the Weingarten
relations; it is the row that can raise the rank from 3 to 4.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable

import numpy as np

from .errors import DegenerateChart, first_witness
from .frames import FrameData, frame
from .jets import Jet3
from .surfaces import SurfaceDef, SurfaceJet

__all__ = [
    "DarbouxMatrix",
    "FieldJet",
    "RANK_TOL",
    "MINOR_PAIRS",
    "assemble",
    "rank",
    "minor_det",
    "all_minors",
    "residuals_from_block",
    "residuals_first_order",
    "bending_residual",
    "field_from_bending",
    "rotation_field_sampler",
]

RANK_TOL = 1e-9
MINOR_PAIRS = tuple(combinations(range(1, 7), 2))


class FieldJet(SurfaceJet):
    """Jets of a candidate rotation field y or bending field z."""


@dataclass
class DarbouxMatrix:
    m: np.ndarray  # (*batch, 4, 6)
    u: np.ndarray
    v: np.ndarray
    paper_scaling: bool = False


def assemble(f: FrameData, surface: SurfaceDef | None = None, paper_scaling: bool = False) -> DarbouxMatrix:
    """Coefficient matrix of the extended system at every point of the frame batch.

    With ``paper_scaling`` each row is multiplied by the surface's declared
    row factor (``SurfaceDef.paper_row_scale``), which yields the un-normalised
    matrices whose minors have polynomial closed forms.
    """
    n, xu, xv = f.n_val, f.xu_val, f.xv_val
    h11, h12, h22 = (h[..., None] for h in f.h)
    zero = np.zeros_like(n)
    m = np.stack(
        [
            np.concatenate([n, zero], axis=-1),
            np.concatenate([zero, n], axis=-1),
            np.concatenate([xu, xv], axis=-1),
            np.concatenate([h12 * xu + h22 * xv, -(h11 * xu + h12 * xv)], axis=-1),
        ],
        axis=-2,
    )
    if paper_scaling:
        if surface is None:
            raise ValueError("row scaling needs the surface definition")
        m = m * surface.row_scale(f.u0, f.v0)[..., :, None]
    return DarbouxMatrix(m, f.u0, f.v0, paper_scaling)


def rank(dm: DarbouxMatrix | np.ndarray, rel_tol: float = RANK_TOL) -> np.ndarray:
    """Numerical rank: singular values above ``rel_tol`` times the largest."""
    m = dm.m if isinstance(dm, DarbouxMatrix) else dm
    sv = np.linalg.svd(m, compute_uv=False)
    return np.sum(sv > rel_tol * sv[..., :1], axis=-1)


def minor_det(dm: DarbouxMatrix | np.ndarray, drop_cols: tuple[int, int]) -> np.ndarray:
    """Determinant of the 4x4 matrix left after removing columns i and j (1-based)."""
    i, j = drop_cols
    if not 1 <= i < j <= 6:
        raise ValueError(f"need 1 <= i < j <= 6, got {drop_cols}")
    m = dm.m if isinstance(dm, DarbouxMatrix) else dm
    keep = [k for k in range(6) if k not in (i - 1, j - 1)]
    return np.linalg.det(m[..., keep])


def all_minors(dm: DarbouxMatrix | np.ndarray) -> np.ndarray:
    """All 15 maximal minors, last axis ordered as :data:`MINOR_PAIRS`."""
    return np.stack([minor_det(dm, p) for p in MINOR_PAIRS], axis=-1)


def residuals_from_block(yu: np.ndarray, yv: np.ndarray, f: FrameData) -> dict[str, np.ndarray]:
    """Residuals of the cross-product system and rows 1-4 for a derivative block.

    ``yu`` and ``yv`` have shape ``(*batch, 3)``.
    """
    xu, xv, n = f.xu_val, f.xv_val, f.n_val
    h11, h12, h22 = f.h
    d = lambda a, b: np.einsum("...i,...i", a, b)  # noqa: E731
    return {
        "r5": np.cross(yu, xv) - np.cross(yv, xu),
        "r8": d(yu, n),
        "r9": d(yv, n),
        "r10": d(yu, xu) + d(yv, xv),
        "r11": h12 * d(yu, xu) + h22 * d(yu, xv) - h11 * d(yv, xu) - h12 * d(yv, xv),
    }


def residuals_first_order(y: FieldJet, f: FrameData) -> dict[str, np.ndarray]:
    yu = np.stack([c.du for c in y.x], axis=-1)
    yv = np.stack([c.dv for c in y.x], axis=-1)
    return residuals_from_block(yu, yv, f)


def bending_residual(z: FieldJet, s: SurfaceJet) -> np.ndarray:
    """The linearised isometry conditions, shape ``(*batch, 3)``."""
    zu = np.stack([c.du for c in z.x], axis=-1)
    zv = np.stack([c.dv for c in z.x], axis=-1)
    xu = np.stack([c.du for c in s.x], axis=-1)
    xv = np.stack([c.dv for c in s.x], axis=-1)
    d = lambda a, b: np.einsum("...i,...i", a, b)  # noqa: E731
    return np.stack([d(zu, xu), d(zu, xv) + d(zv, xu), d(zv, xv)], axis=-1)


def _skew(a: np.ndarray) -> np.ndarray:
    """Matrix of ``y -> a x y``."""
    z = np.zeros(a.shape[:-1])
    a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2]
    return np.stack(
        [
            np.stack([z, -a3, a2], axis=-1),
            np.stack([a3, z, -a1], axis=-1),
            np.stack([-a2, a1, z], axis=-1),
        ],
        axis=-2,
    )


def field_from_bending(z: FieldJet, s: SurfaceJet, cond_max: float = 1e10):
    """Least-squares y with z_u = y x x_u, z_v = y x x_v.

    Returns ``(y, lsq_residual)``; the residual is the Euclidean norm of the
    6-vector defect and vanishes exactly when z is a bending field at the point.
    """
    zu = np.stack([c.du for c in z.x], axis=-1)
    zv = np.stack([c.dv for c in z.x], axis=-1)
    xu = np.stack([c.du for c in s.x], axis=-1)
    xv = np.stack([c.dv for c in s.x], axis=-1)
    # y x a = -[a]_x y
    M = np.concatenate([-_skew(xu), -_skew(xv)], axis=-2)
    rhs = np.concatenate([zu, zv], axis=-1)
    sv = np.linalg.svd(M, compute_uv=False)
    bad = sv[..., -1] <= sv[..., 0] / cond_max
    if np.any(bad):
        raise DegenerateChart("x_u and x_v are linearly dependent", first_witness(bad, s.u0, s.v0))
    y = np.einsum("...ij,...j->...i", np.linalg.pinv(M), rhs)
    defect = np.einsum("...ij,...j->...i", M, y) - rhs
    return y, np.linalg.norm(defect, axis=-1)


def rotation_field_sampler(surface: SurfaceDef, param: str) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """Pointwise rotation field of the bending ``z = dx/d(param)``.

    Valid as a rotation field when the family is isometric in ``param``.
    """

    def sample(u, v):
        z = surface.param_derivative(param, u, v)
        y, _ = field_from_bending(FieldJet(z.x), surface.jets(u, v))
        return y

    return sample


def constant_field(value, like: Jet3) -> FieldJet:
    from .jets import constant

    return FieldJet(tuple(constant(c, like) for c in value))
