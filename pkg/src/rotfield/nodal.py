"""Zero-level curves of n1, n2 and d by marching squares.

Nodes with ``|f| < ZERO_REL * max|f|`` count as positive, so every node has a
two-way sign.  Saddle cells (four crossed edges) are resolved by sampling the
field at the cell centre.  Segments are stitched into chains through the
shared edge crossings, so each vertex is emitted once.
"""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .frames import frame
from .pde import GridSpec
from .reduction import compute_d
from .surfaces import SurfaceDef

__all__ = [
    "ZERO_REL",
    "Polyline",
    "ZeroCurveSet",
    "field_sampler",
    "scan_zero_curves",
    "hausdorff",
    "write_curves_csv",
    "write_curves_json",
]

ZERO_REL = 1e-12
WHICH = ("n1", "n2", "d")


def field_sampler(surface: SurfaceDef, which: str) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    if which not in WHICH:
        raise ValueError(f"which must be one of {WHICH}, got {which!r}")

    def sample(u, v):
        f = frame(surface.jets(u, v))
        if which == "d":
            return compute_d(f).val
        return f.n_val[..., 0 if which == "n1" else 1]

    return sample


@dataclass
class Polyline:
    points: np.ndarray  # (k, 2) columns u, v
    closed: bool = False


@dataclass
class ZeroCurveSet:
    which: str
    grid: GridSpec
    polylines: list[Polyline]
    scale: float
    isolated_zeros: list[tuple[float, float]] = field(default_factory=list)
    vertex_max_abs: float = 0.0

    @property
    def identically_zero(self) -> bool:
        return self.scale == 0.0

    @property
    def n_vertices(self) -> int:
        return sum(len(p.points) for p in self.polylines)

    def to_dict(self) -> dict:
        return {
            "which": self.which,
            "grid": {"rect": list(self.grid.rect), "nu": self.grid.nu, "nv": self.grid.nv},
            "scale": self.scale,
            "identically_zero": self.identically_zero,
            "vertex_max_abs": self.vertex_max_abs,
            "isolated_zeros": [list(p) for p in self.isolated_zeros],
            "polylines": [
                {"id": k, "closed": p.closed, "points": p.points.tolist()} for k, p in enumerate(self.polylines)
            ],
        }


# corner k of a cell sits at offset _CORNER[k]; edge e joins corners _EDGE[e]
_CORNER = ((0, 0), (1, 0), (1, 1), (0, 1))
_EDGE = ((0, 1), (1, 2), (3, 2), (0, 3))


def _edge_key(i, j, e):
    # global id of edge e in cell (i, j): ("u", a, b) runs along u from node (a, b)
    return (("u", i, j), ("v", i + 1, j), ("u", i, j + 1), ("v", i, j))[e]


def _cell_segments(s: tuple[bool, bool, bool, bool], center_pos: Callable[[], bool]):
    crossed = [e for e, (a, b) in enumerate(_EDGE) if s[a] != s[b]]
    if len(crossed) == 2:
        return [tuple(crossed)]
    if len(crossed) == 4:
        # diagonal corners 0 and 2 share a sign; the centre decides whether they connect
        if center_pos() == s[0]:
            return [(0, 1), (2, 3)]  # cut off corners 1 and 3
        return [(3, 0), (1, 2)]  # cut off corners 0 and 2
    return []


def _stitch(segments: list[tuple]) -> list[tuple[list, bool]]:
    adj = defaultdict(list)
    for a, b in segments:
        adj[a].append(b)
        adj[b].append(a)
    seen = set()
    chains = []

    def walk(start):
        chain = [start]
        seen.add(start)
        prev, cur = None, start
        while True:
            nxt = [n for n in adj[cur] if n != prev and n not in seen]
            if not nxt:
                closed = len(chain) > 2 and start in adj[cur] and prev is not None
                return chain, closed
            prev, cur = cur, nxt[0]
            seen.add(cur)
            chain.append(cur)

    for k in sorted(adj, key=lambda x: (len(adj[x]) != 1, x)):
        if k not in seen:
            chains.append(walk(k))
    return chains


def _isolated_zeros(F: np.ndarray, pos: np.ndarray, U, V, rel: float) -> list[tuple[float, float]]:
    """Interior nodes where |F| has a local minimum whose quadratic model reaches ~0
    while the 3x3 neighbourhood shows no sign change.  Adjacent hits (a zero between
    nodes ties several of them) are merged into their centroid."""
    A = np.abs(F)
    hits = []
    for i in range(1, F.shape[0] - 1):
        for j in range(1, F.shape[1] - 1):
            blk_pos = pos[i - 1 : i + 2, j - 1 : j + 2]
            if blk_pos.min() != blk_pos.max():
                continue
            blk = A[i - 1 : i + 2, j - 1 : j + 2]
            c = blk[1, 1]
            nb = np.delete(blk.ravel(), 4)
            if not np.all(nb >= c) or nb.max() == c:
                continue
            m = c
            for fm, fp in ((blk[0, 1], blk[2, 1]), (blk[1, 0], blk[1, 2])):
                curv = fp - 2 * c + fm
                if curv > 0:
                    m -= (fp - fm) ** 2 / (8 * curv)
            if abs(m) <= rel * (nb.max() - c):
                hits.append((i, j))
    clusters: list[list[tuple[int, int]]] = []
    for h in hits:
        for cl in clusters:
            if any(abs(h[0] - a) <= 1 and abs(h[1] - b) <= 1 for a, b in cl):
                cl.append(h)
                break
        else:
            clusters.append([h])
    return [
        (float(np.mean([U[a, b] for a, b in cl])), float(np.mean([V[a, b] for a, b in cl]))) for cl in clusters
    ]


def scan_zero_curves(
    sampler: Callable[[np.ndarray, np.ndarray], np.ndarray],
    grid: GridSpec,
    which: str = "f",
    isolated_rel: float = 0.05,
) -> ZeroCurveSet:
    U, V = grid.mesh()
    F = np.asarray(sampler(U, V), float) * np.ones_like(U)
    if not np.all(np.isfinite(F)):
        raise ValueError("field is not finite on the grid")
    scale = float(np.max(np.abs(F)))
    if scale == 0.0:
        return ZeroCurveSet(which, grid, [], 0.0)
    tol = ZERO_REL * scale
    pos = (F > 0) | (np.abs(F) < tol)

    hu, hv = grid.hu, grid.hv
    segments = []
    for i in range(F.shape[0] - 1):
        for j in range(F.shape[1] - 1):
            s = tuple(bool(pos[i + di, j + dj]) for di, dj in _CORNER)
            if all(s) or not any(s):
                continue

            def center_pos(i=i, j=j):
                fc = float(sampler(np.array(U[i, j] + hu / 2), np.array(V[i, j] + hv / 2)))
                return fc > 0 or abs(fc) < tol

            for ea, eb in _cell_segments(s, center_pos):
                segments.append((_edge_key(i, j, ea), _edge_key(i, j, eb)))

    def vertex(key):
        axis, a, b = key
        a1, b1 = (a + 1, b) if axis == "u" else (a, b + 1)
        f0, f1 = F[a, b], F[a1, b1]
        t = 0.5 if f0 == f1 else min(max(f0 / (f0 - f1), 0.0), 1.0)
        return (1 - t) * U[a, b] + t * U[a1, b1], (1 - t) * V[a, b] + t * V[a1, b1]

    polylines = []
    for chain, closed in _stitch(segments):
        polylines.append(Polyline(np.array([vertex(k) for k in chain]), closed))
    vmax = 0.0
    if polylines:
        pts = np.concatenate([p.points for p in polylines])
        vmax = float(np.max(np.abs(sampler(pts[:, 0], pts[:, 1]))))
    iso = _isolated_zeros(F, pos, U, V, isolated_rel)
    return ZeroCurveSet(which, grid, polylines, scale, iso, vmax)


def hausdorff(a: ZeroCurveSet, b: ZeroCurveSet) -> float:
    """Symmetric Hausdorff distance between the vertex sets of two curve sets."""
    pa = np.concatenate([p.points for p in a.polylines]) if a.polylines else np.zeros((0, 2))
    pb = np.concatenate([p.points for p in b.polylines]) if b.polylines else np.zeros((0, 2))
    if len(pa) == 0 or len(pb) == 0:
        return 0.0 if len(pa) == len(pb) else float("inf")
    dist = np.linalg.norm(pa[:, None, :] - pb[None, :, :], axis=-1)
    return float(max(dist.min(axis=1).max(), dist.min(axis=0).max()))


def write_curves_csv(path: str | Path, curves: ZeroCurveSet):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["curve_id", "u", "v"])
        for k, p in enumerate(curves.polylines):
            for u, v in p.points:
                w.writerow([k, f"{u:.17g}", f"{v:.17g}"])


def write_curves_json(path: str | Path, curves: ZeroCurveSet):
    Path(path).write_text(json.dumps(curves.to_dict(), indent=2))
