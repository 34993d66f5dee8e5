"""Elimination of y1, y2 from the extended system: second-order equations for y3.

Rows 1-4 of the extended system, solved for ``X = (y1u, y2u, y1v, y2v)``,
read ``D X = Z`` with ``Z`` linear in ``(y3u, y3v)``.  Cramer's rule gives
``X_i = (p_i y3u + q_i y3v) / d`` with ``d = det D``.  Cross-differentiating
the X_1/X_3 and X_2/X_4 pairs yields two second-order relations for y3
(``rel_a`` and ``rel_b`` below); their sum and difference give the two
equations returned by :func:`assemble_pdes`.

Two assemblies are offered.  ``form="closed"`` uses the closed principal
parts ``(h22, 0, h11)`` and ``(0, h12, 0)`` with first-order coefficients
rho_i built from r_i.  ``form="direct"`` divides the computed ``rel_a`` by
``-n2`` and ``rel_b`` by ``n1`` and combines them without further algebra.
The two agree when h12 = 0.  Otherwise the computed mixed coefficient of the
first relation is ``-2 lam h12`` rather than ``+2 lam h12``; the two relations
then coincide and the difference equation vanishes identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import HypothesisViolation, NumericalFailure, first_witness
from .frames import FrameData
from .jets import Jet3

__all__ = [
    "N_TOL",
    "D_REL_TOL",
    "CLASS_TOL",
    "ReductionData",
    "SecondOrderPDE",
    "compute_d",
    "compute_omega",
    "d_matrix",
    "z_vector",
    "cross_check_d_as_det",
    "compute_pq",
    "pq_by_cramer",
    "hypothesis_violations",
    "cramer_solve",
    "dense_solve",
    "reduce",
    "assemble_pdes",
    "closed_forms",
    "direct_forms",
    "classify",
    "pde_residual",
]

N_TOL = 1e-6
D_REL_TOL = 1e-8
CLASS_TOL = 1e-9


def _parts(f: FrameData):
    n1, n2, n3 = f.n
    x1u, x2u, x3u = f.xu
    x1v, x2v, x3v = f.xv
    return n1, n2, n3, x1u, x2u, x3u, x1v, x2v, x3v, f.h11, f.h12, f.h22


def compute_d(f: FrameData) -> Jet3:
    """h11 x3v^2 - 2 h12 x3u x3v + h22 x3u^2 (order-1 jet)."""
    x3u, x3v = f.xu[2], f.xv[2]
    return f.h11 * x3v * x3v - 2 * f.h12 * x3u * x3v + f.h22 * x3u * x3u


def compute_omega(f: FrameData) -> Jet3:
    n3, x3u, x3v = f.n[2], f.xu[2], f.xv[2]
    return f.lam * n3 * n3 + x3u * x3u + x3v * x3v


def d_matrix(f: FrameData) -> np.ndarray:
    """The 4x4 matrix D acting on (y1u, y2u, y1v, y2v), shape ``(*batch, 4, 4)``."""
    n1, n2, _, x1u, x2u, _, x1v, x2v, _, h11, h12, h22 = (
        a.val for a in _parts(f)
    )
    z = np.zeros_like(n1)
    rows = [
        [n1, n2, z, z],
        [z, z, n1, n2],
        [x1u, x2u, x1v, x2v],
        [
            h12 * x1u + h22 * x1v,
            h12 * x2u + h22 * x2v,
            -(h11 * x1u + h12 * x1v),
            -(h11 * x2u + h12 * x2v),
        ],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def z_vector(f: FrameData, y3u, y3v) -> np.ndarray:
    _, _, n3, _, _, x3u, _, _, x3v, h11, h12, h22 = (a.val for a in _parts(f))
    return np.stack(
        [
            -n3 * y3u,
            -n3 * y3v,
            -(x3u * y3u + x3v * y3v),
            -(h12 * x3u + h22 * x3v) * y3u + (h11 * x3u + h12 * x3v) * y3v,
        ],
        axis=-1,
    )


def cross_check_d_as_det(f: FrameData) -> np.ndarray:
    return np.abs(np.linalg.det(d_matrix(f)) - compute_d(f).val)


def compute_pq(f: FrameData):
    """Closed forms of the Cramer numerators, as order-1 jets.

    Returns ``(p, q, omega)`` with ``p`` and ``q`` 4-tuples of jets such that
    ``det D_i = p_i y3u + q_i y3v``.
    """
    n1, n2, _, x1u, x2u, x3u, x1v, x2v, x3v, h11, h12, h22 = _parts(f)
    om = compute_omega(f)
    p = (
        h11 * x1v * x3v - 2 * h12 * x1v * x3u + h22 * x1u * x3u,
        h11 * x2v * x3v - 2 * h12 * x2v * x3u + h22 * x2u * x3u,
        -(h22 * n2 * om),
        h22 * n1 * om,
    )
    q = (
        h11 * n2 * om,
        -(h11 * n1 * om),
        h11 * x1v * x3v - 2 * h12 * x1u * x3v + h22 * x1u * x3u,
        h11 * x2v * x3v - 2 * h12 * x2u * x3v + h22 * x2u * x3u,
    )
    return p, q, om


def pq_by_cramer(f: FrameData):
    """p_i, q_i as determinants of D with column i replaced by Z(1,0) and Z(0,1)."""
    D = d_matrix(f)
    zp = z_vector(f, 1.0, 0.0)
    zq = z_vector(f, 0.0, 1.0)
    p, q = [], []
    for i in range(4):
        Di = D.copy()
        Di[..., :, i] = zp
        p.append(np.linalg.det(Di))
        Di[..., :, i] = zq
        q.append(np.linalg.det(Di))
    return np.stack(p, axis=-1), np.stack(q, axis=-1)


def hypothesis_violations(f: FrameData, d: Jet3 | None = None) -> dict[str, np.ndarray]:
    """Masks of points where n1, n2 or d are too small for the elimination."""
    d = compute_d(f) if d is None else d
    n1, n2 = f.n[0].val, f.n[1].val
    return {
        "n1": np.abs(n1) <= N_TOL,
        "n2": np.abs(n2) <= N_TOL,
        "d": np.abs(d.val) <= D_REL_TOL * f.h_scale * f.lam.val,
    }


def _require(f: FrameData, viol: dict[str, np.ndarray]):
    for name, mask in viol.items():
        if np.any(mask):
            raise HypothesisViolation(f"{name} vanishes", first_witness(mask, f.u0, f.v0))


def cramer_solve(f: FrameData, y3u, y3v) -> np.ndarray:
    """(y1u, y2u, y1v, y2v) from (y3u, y3v) via the closed-form numerators."""
    d = compute_d(f)
    _require(f, hypothesis_violations(f, d))
    p, q, _ = compute_pq(f)
    return np.stack([(pi.val * y3u + qi.val * y3v) / d.val for pi, qi in zip(p, q)], axis=-1)


def dense_solve(f: FrameData, y3u, y3v) -> np.ndarray:
    D = d_matrix(f)
    Z = z_vector(f, y3u, y3v)
    try:
        return np.linalg.solve(D, Z[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"singular D: {exc}") from None


@dataclass
class ReductionData:
    d: Jet3
    omega: Jet3
    p: tuple[Jet3, ...]
    q: tuple[Jet3, ...]
    rel_a: np.ndarray  # (*batch, 5): uu, uv, vv, u, v coefficients
    rel_b: np.ndarray
    r: np.ndarray  # (*batch, 4)
    rho: np.ndarray  # (*batch, 4)
    violations: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def admissible(self) -> np.ndarray:
        bad = np.zeros(np.shape(self.d.val), bool)
        for m in self.violations.values():
            bad |= m
        return ~bad


def reduce(f: FrameData, strict: bool = True) -> ReductionData:
    """Everything the two second-order equations need, at each point of ``f``.

    With ``strict=False`` inadmissible points get NaN coefficients instead of
    raising :class:`HypothesisViolation`.
    """
    d = compute_d(f)
    viol = hypothesis_violations(f, d)
    if strict:
        _require(f, viol)
    p, q, om = compute_pq(f)
    P = [a.val for a in p]
    Q = [a.val for a in q]
    dv, du_, dd = d.dv, d.du, d.val
    n1, n2 = f.n[0].val, f.n[1].val
    lam = f.lam.val
    with np.errstate(divide="ignore", invalid="ignore"):
        rel_a = np.stack(
            [
                P[2],
                Q[2] - P[0],
                -Q[0],
                p[2].du - p[0].dv + (P[0] * dv - P[2] * du_) / dd,
                q[2].du - q[0].dv + (Q[0] * dv - Q[2] * du_) / dd,
            ],
            axis=-1,
        )
        rel_b = np.stack(
            [
                P[3],
                Q[3] - P[1],
                -Q[1],
                p[3].du - p[1].dv + (P[1] * dv - P[3] * du_) / dd,
                q[3].du - q[1].dv + (Q[1] * dv - Q[3] * du_) / dd,
            ],
            axis=-1,
        )
        r = np.stack(
            [rel_a[..., 3] / -n2, rel_a[..., 4] / -n2, rel_b[..., 3] / n1, rel_b[..., 4] / n1], axis=-1
        )
        w = om.val
        rho = np.stack(
            [
                (r[..., 0] + r[..., 2]) / (2 * w),
                (r[..., 1] + r[..., 3]) / (2 * w),
                (r[..., 0] - r[..., 2]) / (4 * lam),
                (r[..., 1] - r[..., 3]) / (4 * lam),
            ],
            axis=-1,
        )
    bad = viol["n1"] | viol["n2"] | viol["d"]
    if np.any(bad):
        r = np.where(bad[..., None], np.nan, r)
        rho = np.where(bad[..., None], np.nan, rho)
    return ReductionData(d, om, p, q, rel_a, rel_b, r, rho, viol)


@dataclass
class SecondOrderPDE:
    """a_uu y_uu + a_uv y_uv + a_vv y_vv + b_u y_u + b_v y_v = 0 at each point."""

    which: str
    coeffs: np.ndarray  # (*batch, 5)
    scale: np.ndarray  # magnitude below which the principal part counts as zero

    @property
    def a_uu(self):
        return self.coeffs[..., 0]

    @property
    def a_uv(self):
        return self.coeffs[..., 1]

    @property
    def a_vv(self):
        return self.coeffs[..., 2]

    @property
    def b_u(self):
        return self.coeffs[..., 3]

    @property
    def b_v(self):
        return self.coeffs[..., 4]

    def normalized(self) -> np.ndarray:
        """Coefficients divided by the largest principal magnitude (unchanged where that is ~0)."""
        m = np.max(np.abs(self.coeffs[..., :3]), axis=-1)
        ok = m > CLASS_TOL * self.scale
        return np.where(ok[..., None], self.coeffs / np.where(ok, m, 1.0)[..., None], self.coeffs)

    @property
    def classification(self) -> np.ndarray:
        return classify(self.coeffs[..., :3], self.scale)


def classify(principal: np.ndarray, scale, tol: float = CLASS_TOL) -> np.ndarray:
    """'elliptic' / 'hyperbolic' / 'parabolic' / 'degenerate' per point."""
    principal = np.asarray(principal, float)
    m = np.max(np.abs(principal), axis=-1)
    degenerate = ~(m > tol * np.asarray(scale))
    a = principal / np.where(degenerate, 1.0, m)[..., None]
    disc = a[..., 1] ** 2 - 4 * a[..., 0] * a[..., 2]
    out = np.where(disc < -tol, "elliptic", np.where(disc > tol, "hyperbolic", "parabolic"))
    out = np.where(degenerate, "degenerate", out)
    return np.where(np.isnan(m), "inadmissible", out)


def closed_forms(rd: ReductionData, f: FrameData) -> tuple[np.ndarray, np.ndarray]:
    """The two intermediate relations with closed-form principal parts (coefficient vectors)."""
    h11, h12, h22 = f.h
    w, lam = rd.omega.val, f.lam.val
    r = rd.r
    first = np.stack([w * h22, 2 * lam * h12, w * h11, r[..., 0], r[..., 1]], axis=-1)
    second = np.stack([w * h22, -2 * lam * h12, w * h11, r[..., 2], r[..., 3]], axis=-1)
    return first, second


def direct_forms(rd: ReductionData, f: FrameData) -> tuple[np.ndarray, np.ndarray]:
    """The same relations obtained by dividing the computed rel_a by -n2 and rel_b by n1."""
    n1, n2 = f.n[0].val, f.n[1].val
    with np.errstate(divide="ignore", invalid="ignore"):
        return rd.rel_a / -n2[..., None], rd.rel_b / n1[..., None]


def assemble_pdes(rd: ReductionData, f: FrameData, form: str = "closed"):
    """The two second-order equations for y3, as :class:`SecondOrderPDE` objects."""
    h11, h12, h22 = f.h
    scale = f.h_scale
    if form == "closed":
        z = np.zeros_like(h11)
        bad = ~rd.admissible
        nanify = lambda a: np.where(bad, np.nan, a)  # noqa: E731
        eq18 = np.stack([nanify(h22), nanify(z), nanify(h11), rd.rho[..., 0], rd.rho[..., 1]], axis=-1)
        eq19 = np.stack([nanify(z), nanify(h12), nanify(z), rd.rho[..., 2], rd.rho[..., 3]], axis=-1)
    elif form == "direct":
        a, b = direct_forms(rd, f)
        w, lam = rd.omega.val[..., None], f.lam.val[..., None]
        eq18 = (a + b) / (2 * w)
        eq19 = (a - b) / (4 * lam)
        bad = ~rd.admissible[..., None]
        eq18 = np.where(bad, np.nan, eq18)
        eq19 = np.where(bad, np.nan, eq19)
    else:
        raise ValueError(f"unknown form {form!r}")
    return SecondOrderPDE("eq18", eq18, scale), SecondOrderPDE("eq19", eq19, scale)


def pde_residual(pde: SecondOrderPDE, y3: Jet3) -> np.ndarray:
    c = pde.coeffs
    return (
        c[..., 0] * y3.duu
        + c[..., 1] * y3.duv
        + c[..., 2] * y3.dvv
        + c[..., 3] * y3.du
        + c[..., 4] * y3.dv
    )
