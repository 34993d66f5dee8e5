"""Finite-difference Dirichlet solver for the elliptic y3 equation and the max-principle check.

The discretisation is a 5-point stencil.  Each first-order term uses a
central difference where the cell Peclet number ``|b| h / (2 a)`` is below
one and a first-order upwind difference otherwise, so every row of the
(negated) system matrix has a positive diagonal, non-positive off-diagonals
and zero row sum over the full stencil.  That is an M-matrix once the
boundary columns move to the right-hand side, which gives the discrete
maximum principle.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NotElliptic, NumericalFailure, PreconditionError, first_witness
from .frames import frame
from .reduction import assemble_pdes, reduce
from .surfaces import SurfaceDef

__all__ = [
    "GridSpec",
    "GridField",
    "LinearSystem",
    "MaxPrincipleReport",
    "MARGIN_TOL",
    "pde_coefficients",
    "coefficient_sampler",
    "discretize",
    "discretize_eq18",
    "check_m_matrix",
    "solve_dirichlet",
    "check_max_principle",
    "grid_residual",
    "write_grid_csv",
]

MARGIN_TOL = 1e-10
SOLVE_RTOL = 1e-10


@dataclass(frozen=True)
class GridSpec:
    rect: tuple[float, float, float, float]
    nu: int
    nv: int

    def __post_init__(self):
        u0, u1, v0, v1 = self.rect
        if not (u0 < u1 and v0 < v1):
            raise ValueError(f"degenerate rectangle {self.rect}")
        if self.nu < 3 or self.nv < 3:
            raise ValueError("need at least 3 interior points per direction")

    @property
    def hu(self) -> float:
        return (self.rect[1] - self.rect[0]) / (self.nu + 1)

    @property
    def hv(self) -> float:
        return (self.rect[3] - self.rect[2]) / (self.nv + 1)

    @property
    def u(self) -> np.ndarray:
        return np.linspace(self.rect[0], self.rect[1], self.nu + 2)

    @property
    def v(self) -> np.ndarray:
        return np.linspace(self.rect[2], self.rect[3], self.nv + 2)

    def mesh(self):
        """Full-grid node coordinates, each of shape ``(nu + 2, nv + 2)``."""
        return np.meshgrid(self.u, self.v, indexing="ij")

    def interior_mesh(self):
        U, V = self.mesh()
        return U[1:-1, 1:-1], V[1:-1, 1:-1]

    def boundary_mask(self) -> np.ndarray:
        m = np.zeros((self.nu + 2, self.nv + 2), bool)
        m[0, :] = m[-1, :] = m[:, 0] = m[:, -1] = True
        return m


@dataclass
class GridField:
    values: np.ndarray  # (nu + 2, nv + 2), index [i, j] <-> (u_i, v_j)
    grid: GridSpec

    def __post_init__(self):
        shape = (self.grid.nu + 2, self.grid.nv + 2)
        if self.values.shape != shape:
            raise ValueError(f"grid field has shape {self.values.shape}, expected {shape}")

    @classmethod
    def from_function(cls, grid: GridSpec, fn: Callable) -> GridField:
        U, V = grid.mesh()
        return cls(np.asarray(fn(U, V), float) * np.ones_like(U), grid)

    @property
    def interior(self) -> np.ndarray:
        return self.values[1:-1, 1:-1]


def pde_coefficients(surface: SurfaceDef, u, v, which: str = "eq18", form: str = "closed", strict=True):
    """Coefficient vectors ``(a_uu, a_uv, a_vv, b_u, b_v)`` of one y3 equation at points."""
    f = frame(surface.jets(u, v))
    rd = reduce(f, strict=strict)
    eq18, eq19 = assemble_pdes(rd, f, form)
    return (eq18 if which == "eq18" else eq19).coeffs


def coefficient_sampler(surface: SurfaceDef, which: str = "eq18", form: str = "closed", strict=False):
    return lambda u, v: pde_coefficients(surface, u, v, which, form, strict)


@dataclass
class LinearSystem:
    """``A y_int = -B g`` for interior unknowns; A is the negated discrete operator."""

    grid: GridSpec
    A: sp.csr_matrix
    B: sp.csr_matrix  # (N_interior, N_full) boundary coupling
    coeffs: np.ndarray  # (nu, nv, 5) at interior nodes, after sign normalisation
    upwind_u: np.ndarray  # (nu, nv) bool
    upwind_v: np.ndarray

    @property
    def stencil_counts(self) -> dict[str, int]:
        return {
            "central_u": int(np.sum(~self.upwind_u)),
            "upwind_u": int(np.sum(self.upwind_u)),
            "central_v": int(np.sum(~self.upwind_v)),
            "upwind_v": int(np.sum(self.upwind_v)),
        }


def _check_rect(surface: SurfaceDef | None, grid: GridSpec):
    if surface is None:
        return
    u0, u1, v0, v1 = grid.rect
    du0, du1, dv0, dv1 = surface.domain
    if not (du0 <= u0 and u1 <= du1 and dv0 <= v0 and v1 <= dv1):
        raise PreconditionError(f"rectangle {grid.rect} leaves the surface domain {surface.domain}")
    for axis, c in surface.excluded_lines:
        lo, hi = (u0, u1) if axis == "u" else (v0, v1)
        if lo <= c <= hi:
            raise PreconditionError(f"rectangle {grid.rect} meets the excluded line {axis}={c:.17g}")


def discretize(grid: GridSpec, coeffs: np.ndarray) -> LinearSystem:
    """Assemble the system for coefficients sampled at interior nodes, shape ``(nu, nv, 5)``.

    Mixed-derivative coefficients must vanish (5-point stencil).
    """
    coeffs = np.array(coeffs, float)
    if not np.all(np.isfinite(coeffs)):
        bad = ~np.all(np.isfinite(coeffs), axis=-1)
        U, V = grid.interior_mesh()
        raise PreconditionError("non-finite coefficients", first_witness(bad, U, V))
    a, c = coeffs[..., 0], coeffs[..., 2]
    U, V = grid.interior_mesh()
    if np.any(np.abs(coeffs[..., 1]) > 1e-12 * (np.abs(a) + np.abs(c))):
        raise PreconditionError("the 5-point stencil cannot carry a mixed derivative term")
    bad = ~(a * c > 0)
    if np.any(bad):
        raise NotElliptic("ellipticity condition h11*h22 > 0 violated", first_witness(bad, U, V))
    # flip rows with negative principal part; same equation
    coeffs = np.where((a < 0)[..., None], -coeffs, coeffs)
    a, c, bu, bv = coeffs[..., 0], coeffs[..., 2], coeffs[..., 3], coeffs[..., 4]
    hu, hv = grid.hu, grid.hv
    upwind_u = np.abs(bu) * hu / (2 * a) >= 1
    upwind_v = np.abs(bv) * hv / (2 * c) >= 1

    # L y = west*y[i-1] + east*y[i+1] + south*y[j-1] + north*y[j+1] - diag*y, all weights >= 0
    east = np.where(upwind_u, a / hu**2 + np.maximum(bu, 0) / hu, a / hu**2 + bu / (2 * hu))
    west = np.where(upwind_u, a / hu**2 + np.maximum(-bu, 0) / hu, a / hu**2 - bu / (2 * hu))
    north = np.where(upwind_v, c / hv**2 + np.maximum(bv, 0) / hv, c / hv**2 + bv / (2 * hv))
    south = np.where(upwind_v, c / hv**2 + np.maximum(-bv, 0) / hv, c / hv**2 - bv / (2 * hv))
    diag = east + west + north + south

    nu, nv = grid.nu, grid.nv
    full = np.arange((nu + 2) * (nv + 2)).reshape(nu + 2, nv + 2)
    interior = full[1:-1, 1:-1]
    int_index = -np.ones_like(full)
    int_index[1:-1, 1:-1] = np.arange(nu * nv).reshape(nu, nv)

    rows = [interior.ravel()]
    cols = [interior.ravel()]
    vals = [diag.ravel()]
    for w, di, dj in ((east, 1, 0), (west, -1, 0), (north, 0, 1), (south, 0, -1)):
        rows.append(interior.ravel())
        cols.append(full[1 + di : nu + 1 + di, 1 + dj : nv + 1 + dj].ravel())
        vals.append(-w.ravel())
    r = int_index.ravel()[np.concatenate(rows)]
    cfull = np.concatenate(cols)
    v = np.concatenate(vals)
    ci = int_index.ravel()[cfull]
    is_int = ci >= 0
    N, M = nu * nv, full.size
    A = sp.csr_matrix((v[is_int], (r[is_int], ci[is_int])), shape=(N, N))
    B = sp.csr_matrix((v[~is_int], (r[~is_int], cfull[~is_int])), shape=(N, M))
    return LinearSystem(grid, A, B, coeffs, upwind_u, upwind_v)


def discretize_eq18(surface: SurfaceDef, grid: GridSpec, form: str = "closed") -> LinearSystem:
    """Check admissibility and ellipticity on the rectangle, then assemble."""
    _check_rect(surface, grid)
    U, V = grid.interior_mesh()
    coeffs = pde_coefficients(surface, U, V, "eq18", form, strict=True)
    return discretize(grid, coeffs)


def check_m_matrix(system: LinearSystem, tol: float = 1e-12) -> dict[str, bool]:
    A = system.A.tocoo()
    off = A.row != A.col
    d = system.A.diagonal()
    scale = np.max(np.abs(d))
    row_sum = np.asarray(system.A.sum(axis=1)).ravel() + np.asarray(system.B.sum(axis=1)).ravel()
    abs_off = np.asarray(abs(system.A).sum(axis=1)).ravel() - np.abs(d)
    return {
        "positive_diagonal": bool(np.all(d > 0)),
        "nonpositive_offdiagonal": bool(np.all(A.data[off] <= 0) and np.all(system.B.data <= 0)),
        "diagonally_dominant": bool(np.all(d - abs_off >= -tol * scale)),
        "zero_row_sum": bool(np.all(np.abs(row_sum) <= tol * scale)),
    }


def solve_dirichlet(system: LinearSystem, boundary: GridField) -> GridField:
    """Interior values from the boundary ring of ``boundary`` (its interior is ignored)."""
    grid = system.grid
    g = np.array(boundary.values, float)
    if not np.all(np.isfinite(g[grid.boundary_mask()])):
        raise PreconditionError("boundary data must be finite")
    # solve for the deviation from a boundary value so constant data is reproduced exactly
    ref = g[0, 0]
    gb = np.where(grid.boundary_mask(), g - ref, 0.0)
    rhs = -(system.B @ gb.ravel())
    if not np.any(rhs):
        w = np.zeros(system.A.shape[0])
    else:
        w = spla.spsolve(system.A.tocsc(), rhs)
        res = np.linalg.norm(system.A @ w - rhs) / max(np.linalg.norm(rhs), np.finfo(float).tiny)
        if not np.all(np.isfinite(w)) or res > SOLVE_RTOL:
            cond = np.linalg.cond(system.A.toarray()) if system.A.shape[0] <= 4096 else float("nan")
            raise NumericalFailure(f"linear solve failed: relative residual {res:.3e}, condition ~{cond:.3e}")
    out = g.copy()
    out[1:-1, 1:-1] = ref + w.reshape(grid.nu, grid.nv)
    return GridField(out, grid)


@dataclass
class MaxPrincipleReport:
    interior_max: float
    boundary_max: float
    interior_min: float
    boundary_min: float
    argmax_interior: tuple[float, float]
    argmin_interior: tuple[float, float]
    tol: float = MARGIN_TOL
    extra: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.boundary_max - self.interior_max

    @property
    def margin_min(self) -> float:
        return self.interior_min - self.boundary_min

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tol and self.margin_min >= -self.tol

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "interior_max": self.interior_max,
            "boundary_max": self.boundary_max,
            "margin": self.margin,
            "interior_min": self.interior_min,
            "boundary_min": self.boundary_min,
            "margin_min": self.margin_min,
            "witness_max": list(self.argmax_interior),
            "witness_min": list(self.argmin_interior),
            **self.extra,
        }


def check_max_principle(fld: GridField, tol: float = MARGIN_TOL) -> MaxPrincipleReport:
    U, V = fld.grid.mesh()
    bmask = fld.grid.boundary_mask()
    inner = fld.interior
    iu, iv = np.unravel_index(np.argmax(inner), inner.shape)
    ju, jv = np.unravel_index(np.argmin(inner), inner.shape)
    return MaxPrincipleReport(
        interior_max=float(inner.max()),
        boundary_max=float(fld.values[bmask].max()),
        interior_min=float(inner.min()),
        boundary_min=float(fld.values[bmask].min()),
        argmax_interior=(float(U[iu + 1, iv + 1]), float(V[iu + 1, iv + 1])),
        argmin_interior=(float(U[ju + 1, jv + 1]), float(V[ju + 1, jv + 1])),
        tol=tol,
    )


def grid_residual(sampler: Callable, fld: GridField) -> GridField:
    """Central-difference residual of an equation at interior nodes; the ring is NaN."""
    grid = fld.grid
    y = fld.values
    hu, hv = grid.hu, grid.hv
    c = y[1:-1, 1:-1]
    yuu = (y[2:, 1:-1] - 2 * c + y[:-2, 1:-1]) / hu**2
    yvv = (y[1:-1, 2:] - 2 * c + y[1:-1, :-2]) / hv**2
    yuv = (y[2:, 2:] - y[2:, :-2] - y[:-2, 2:] + y[:-2, :-2]) / (4 * hu * hv)
    yu = (y[2:, 1:-1] - y[:-2, 1:-1]) / (2 * hu)
    yv = (y[1:-1, 2:] - y[1:-1, :-2]) / (2 * hv)
    U, V = grid.interior_mesh()
    k = np.asarray(sampler(U, V), float)
    res = np.full_like(y, np.nan)
    res[1:-1, 1:-1] = (
        k[..., 0] * yuu + k[..., 1] * yuv + k[..., 2] * yvv + k[..., 3] * yu + k[..., 4] * yv
    )
    return GridField(res, grid)


def write_grid_csv(path: str | Path, fld: GridField, residual: GridField | None = None):
    U, V = fld.grid.mesh()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["u", "v", "value", "residual"])
        for idx in np.ndindex(U.shape):
            r = "" if residual is None or not np.isfinite(residual.values[idx]) else f"{residual.values[idx]:.17g}"
            w.writerow([f"{U[idx]:.17g}", f"{V[idx]:.17g}", f"{fld.values[idx]:.17g}", r])
