"""Surface definitions, the built-in presets and the JSON surface-file format."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import dsl
from .jets import Jet3

__all__ = ["SurfaceDef", "SurfaceJet", "PRESETS", "preset", "load_surface", "rotation_zx", "SurfaceError"]


class SurfaceError(ValueError):
    pass


@dataclass(frozen=True)
class SurfaceJet:
    """Jets of the three chart components at a common batch of base points."""

    x: tuple[Jet3, Jet3, Jet3]

    def __post_init__(self):
        a = self.x[0]
        for c in self.x[1:]:
            a._coerce(c)

    @property
    def u0(self):
        return self.x[0].u0

    @property
    def v0(self):
        return self.x[0].v0

    def value(self) -> np.ndarray:
        return np.stack([c.val for c in self.x], axis=-1)


@dataclass(frozen=True)
class SurfaceDef:
    name: str
    x: tuple[str, str, str]
    params: dict[str, float] = field(default_factory=dict)
    domain: tuple[float, float, float, float] = (-1.0, 1.0, -1.0, 1.0)
    # ("u", c) stands for the line u = c
    excluded_lines: tuple[tuple[str, float], ...] = ()
    # row factors that turn the normalised Darboux rows into the reference scaling
    paper_row_scale: tuple[str, str, str, str] | None = None

    def __post_init__(self):
        if len(self.x) != 3:
            raise SurfaceError("a chart needs exactly three component expressions")
        u_min, u_max, v_min, v_max = self.domain
        if not (u_min < u_max and v_min < v_max):
            raise SurfaceError(f"degenerate domain {self.domain}")
        for axis, _ in self.excluded_lines:
            if axis not in ("u", "v"):
                raise SurfaceError(f"excluded line axis must be u or v, got {axis!r}")
        object.__setattr__(self, "asts", tuple(dsl.parse(e, self.params) for e in self.x))
        scale = None
        if self.paper_row_scale is not None:
            if len(self.paper_row_scale) != 4:
                raise SurfaceError("paper_row_scale needs four expressions")
            scale = tuple(dsl.parse(e, self.params) for e in self.paper_row_scale)
        object.__setattr__(self, "scale_asts", scale)

    def with_params(self, **params) -> SurfaceDef:
        unknown = set(params) - set(self.params)
        if unknown:
            raise SurfaceError(f"undeclared parameter(s): {sorted(unknown)}")
        return replace(self, params={**self.params, **params})

    def jets(self, u, v, params=None) -> SurfaceJet:
        p = {**self.params, **(params or {})}
        return SurfaceJet(tuple(dsl.eval_jet(a, u, v, p) for a in self.asts))

    def point(self, u, v) -> np.ndarray:
        return self.jets(u, v).value()

    def param_derivative(self, name: str, u, v, step: float = 1e-30) -> SurfaceJet:
        """Jets of dx/d(param) by complex-step differentiation (exact to rounding)."""
        if name not in self.params:
            raise SurfaceError(f"undeclared parameter {name!r}")
        p = {**self.params, name: self.params[name] + 1j * step}
        cx = [dsl.eval_jet(a, u, v, p) for a in self.asts]
        out = []
        for j in cx:
            j = j.imag
            j.c = j.c / step
            out.append(j)
        return SurfaceJet(tuple(out))

    def row_scale(self, u, v) -> np.ndarray:
        """Declared row factors, shape ``(*batch, 4)``; ones when none are declared."""
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        if self.scale_asts is None:
            return np.ones(u.shape + (4,))
        return np.stack(
            [np.broadcast_to(dsl.eval_value(a, u, v, self.params), u.shape) for a in self.scale_asts], axis=-1
        )

    def near_excluded(self, u, v, tol: float) -> np.ndarray:
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        mask = np.zeros(u.shape, bool)
        for axis, c in self.excluded_lines:
            mask |= np.abs((u if axis == "u" else v) - c) <= tol
        return mask

    def rotated(self, matrix, name: str | None = None) -> SurfaceDef:
        """The chart composed with a fixed rotation ``x -> R x`` (row factors dropped)."""
        R = np.asarray(matrix, float)
        if R.shape != (3, 3) or not np.allclose(R @ R.T, np.eye(3), atol=1e-12):
            raise SurfaceError("rotation matrix must be 3x3 orthogonal")
        x = tuple(" + ".join(f"({float(R[i, j])!r})*({self.x[j]})" for j in range(3)) for i in range(3))
        return replace(self, name=name or f"{self.name}-rotated", x=x, paper_row_scale=None)

    def to_json(self) -> dict:
        d = {
            "name": self.name,
            "params": dict(self.params),
            "x": list(self.x),
            "domain": list(self.domain),
            "excluded_lines": [f"{a}={c!r}" for a, c in self.excluded_lines],
        }
        if self.paper_row_scale is not None:
            d["paper_row_scale"] = list(self.paper_row_scale)
        return d

    @classmethod
    def from_json(cls, data: dict) -> SurfaceDef:
        try:
            params = {str(k): float(v) for k, v in data.get("params", {}).items()}
            domain = data.get("domain", [-1, 1, -1, 1])
            if isinstance(domain, dict):
                domain = [*domain["u"], *domain["v"]]
            lines = tuple(_parse_line(s, params) for s in data.get("excluded_lines", []))
            scale = data.get("paper_row_scale")
            return cls(
                name=data.get("name", "surface"),
                x=tuple(data["x"]),
                params=params,
                domain=tuple(float(b) for b in domain),
                excluded_lines=lines,
                paper_row_scale=None if scale is None else tuple(scale),
            )
        except KeyError as exc:
            raise SurfaceError(f"surface file missing field {exc}") from None


def _parse_line(text: str, params) -> tuple[str, float]:
    axis, sep, rhs = text.partition("=")
    axis = axis.strip()
    if not sep or axis not in ("u", "v"):
        raise SurfaceError(f"excluded line must look like 'u=<const>' or 'v=<const>': {text!r}")
    ast = dsl.parse(rhs, params)
    if dsl.free_names(ast) & {"u", "v"}:
        raise SurfaceError(f"excluded line value must be constant: {text!r}")
    return axis, float(dsl.eval_value(ast, 0.0, 0.0, params))


_SPHERE_DEN = "(u^2+v^2+1)"

PRESETS: dict[str, SurfaceDef] = {
    "plane": SurfaceDef(
        name="plane",
        x=("u", "v", "0"),
        domain=(-2.0, 2.0, -2.0, 2.0),
    ),
    "sphere-stereo": SurfaceDef(
        name="sphere-stereo",
        x=(f"2*u/{_SPHERE_DEN}", f"2*v/{_SPHERE_DEN}", f"(u^2+v^2-1)/{_SPHERE_DEN}"),
        domain=(-2.0, 2.0, -2.0, 2.0),
        excluded_lines=(("u", 0.0), ("v", 0.0)),
        paper_row_scale=(
            f"-{_SPHERE_DEN}",
            f"-{_SPHERE_DEN}",
            f"{_SPHERE_DEN}^2/2",
            f"{_SPHERE_DEN}^4/8",
        ),
    ),
    "helicoid-catenoid": SurfaceDef(
        name="helicoid-catenoid",
        x=(
            "cos(t)*sin(u)*sinh(v) + sin(t)*cos(u)*cosh(v)",
            "-cos(t)*cos(u)*sinh(v) + sin(t)*sin(u)*cosh(v)",
            "u*cos(t) + v*sin(t)",
        ),
        params={"t": math.pi / 4},
        domain=(0.0, 2 * math.pi, -1.5, 1.5),
        excluded_lines=tuple(("u", k * math.pi / 2) for k in range(5)),
        paper_row_scale=("cosh(v)", "cosh(v)", "1", "1"),
    ),
}
PRESETS["sphere"] = PRESETS["sphere-stereo"]
PRESETS["helicoid"] = PRESETS["helicoid-catenoid"]


def rotation_zx(a: float, b: float) -> np.ndarray:
    """``Rz(b) @ Rx(a)``."""
    ca, sa, cb, sb = math.cos(a), math.sin(a), math.cos(b), math.sin(b)
    rx = np.array([[1, 0, 0], [0, ca, -sa], [0, sa, ca]])
    rz = np.array([[cb, -sb, 0], [sb, cb, 0], [0, 0, 1]])
    return rz @ rx


def preset(name: str, **params) -> SurfaceDef:
    try:
        s = PRESETS[name]
    except KeyError:
        raise SurfaceError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return s.with_params(**params) if params else s


def load_surface(source: str | Path, **params) -> SurfaceDef:
    """A preset name or a path to a JSON surface file."""
    if str(source) in PRESETS:
        return preset(str(source), **params)
    path = Path(source)
    if not path.exists():
        raise SurfaceError(f"no preset or file named {str(source)!r}")
    s = SurfaceDef.from_json(json.loads(path.read_text()))
    return s.with_params(**params) if params else s
