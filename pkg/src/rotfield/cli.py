"""Command-line driver: ``rotfield {analyze,reduce,max-principle,nodal,verify-field}``.

Reports are JSON with a schema version; floats carry 17 significant digits.
Exit codes: 0 success, 2 parse error, 3 precondition violation, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import math
import sys
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import golden
from .darboux import assemble, minor_det, rank
from .dsl import ParseError, eval_value, free_names, parse
from .errors import NumericalFailure, PreconditionError, first_witness
from .frames import check_identities_20, frame, weingarten_check
from .nodal import field_sampler, scan_zero_curves, write_curves_csv, write_curves_json
from .pde import (
    GridField,
    GridSpec,
    check_m_matrix,
    check_max_principle,
    coefficient_sampler,
    discretize_eq18,
    grid_residual,
    solve_dirichlet,
    write_grid_csv,
)
from .reduction import assemble_pdes, compute_d, reduce
from .report import SCHEMA_VERSION, check, dumps, envelope
from .surfaces import SurfaceDef, SurfaceError, load_surface
from .verify import verify_bending_field

EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, EXIT_NUMERICAL = 0, 2, 3, 4

COMMANDS = ("analyze", "reduce", "max-principle", "nodal", "verify-field")


@dataclass
class RunConfig:
    command: str
    surface: str = "sphere-stereo"
    # a repeated --param name gives a sweep over its values
    params: dict[str, list[float]] = field(default_factory=dict)
    grid: tuple[int, int] | None = None
    rect: tuple[float, float, float, float] | None = None
    tol_iso: float = 1e-8
    tol_rank: float = 1e-9
    seed: int = 0
    out: str | None = None
    paper_scaling: bool = False
    form: str = "closed"
    trials: int = 1
    constant: float | None = None
    dump_csv: bool = False
    bend_param: str | None = None
    samples: int = 100
    fd_step: float = 1e-4
    fd_step2: float = 1e-2

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        for name in ("tol_iso", "tol_rank", "fd_step", "fd_step2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name, vals in self.params.items():
            if not vals:
                raise ValueError(f"empty sweep for parameter {name!r}")
        if self.trials < 1 or self.samples < 1:
            raise ValueError("trials and samples must be at least 1")
        if self.form not in ("closed", "direct"):
            raise ValueError("form must be 'closed' or 'direct'")

    def sweep(self):
        names = list(self.params)
        for combo in itertools.product(*(self.params[n] for n in names)):
            yield dict(zip(names, combo))


def _const(text: str) -> float:
    ast = parse(text)
    if free_names(ast):
        raise ParseError(f"expected a constant, found names {sorted(free_names(ast))}", 0, text)
    return float(eval_value(ast, 0.0, 0.0, {}))


def _parse_grid(text: str) -> tuple[int, int]:
    a, sep, b = text.lower().partition("x")
    if not sep:
        raise argparse.ArgumentTypeError(f"grid must look like NUxNV, got {text!r}")
    return int(a), int(b)


def _parse_rect(text: str) -> tuple[float, float, float, float]:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(f"rect must be u0,u1,v0,v1, got {text!r}")
    return tuple(_const(p) for p in parts)


def _parse_params(items: list[str]) -> dict[str, list[float]]:
    out: dict[str, list[float]] = {}
    for item in items:
        name, sep, val = item.partition("=")
        if not sep or not name.strip():
            raise argparse.ArgumentTypeError(f"--param expects name=value, got {item!r}")
        out.setdefault(name.strip(), []).append(_const(val))
    return out


# ---------------------------------------------------------------- helpers


def _surfaces(cfg: RunConfig):
    base = load_surface(cfg.surface)
    for p in cfg.sweep():
        yield p, (base.with_params(**p) if p else base)


def _rect(cfg: RunConfig, s: SurfaceDef):
    return cfg.rect if cfg.rect is not None else s.domain


def _sample_mesh(cfg: RunConfig, s: SurfaceDef, default=(50, 50)):
    nu, nv = cfg.grid or default
    u0, u1, v0, v1 = _rect(cfg, s)
    return np.meshgrid(np.linspace(u0, u1, nu), np.linspace(v0, v1, nv), indexing="ij")


def _worst(values, U, V):
    values = np.asarray(values, float)
    k = np.unravel_index(int(np.nanargmax(values)), values.shape)
    return (float(np.broadcast_to(U, values.shape)[k]), float(np.broadcast_to(V, values.shape)[k])), k


def _golden_entry(value, reference, where) -> dict:
    e = golden.compare(value, reference)
    return {
        "at": list(where),
        "value": float(value),
        "reference": float(reference),
        "abs_err": float(e["abs_err"]),
        "rel_err": float(e["rel_err"]),
    }


def _write(cfg: RunConfig, name: str) -> Path | None:
    if cfg.out is None:
        return None
    d = Path(cfg.out)
    d.mkdir(parents=True, exist_ok=True)
    return d / name


def _tag(params: dict) -> str:
    return "_".join(f"{k}{v:.6g}" for k, v in params.items()) or "base"


# ---------------------------------------------------------------- commands


def cmd_analyze(cfg: RunConfig) -> dict:
    runs, checks, notes = [], [], []
    for params, s in _surfaces(cfg):
        U, V = _sample_mesh(cfg, s)
        f = frame(s.jets(U, V), cfg.tol_iso)
        ident = check_identities_20(s.jets(U, V), f)
        wein = weingarten_check(f)
        dm = assemble(f, s, cfg.paper_scaling)
        rk = rank(dm, cfg.tol_rank)
        off = ~s.near_excluded(U, V, 1e-9)
        hist = dict(sorted(Counter(rk.ravel().tolist()).items()))
        hist_off = dict(sorted(Counter(rk[off].tolist()).items()))
        viol = reduce(f, strict=False).violations
        run = {
            "params": params,
            "points": int(U.size),
            "isothermal_residual_max": float(np.max(f.iso_residual)),
            "identity_residual_max": float(np.max(ident)),
            "weingarten_residual_max": float(np.max(wein)),
            "rank_histogram": hist,
            "rank_histogram_off_excluded": hist_off,
            "admissible_points": int(np.sum(~(viol["n1"] | viol["n2"] | viol["d"]))),
            "violations": {k: int(np.sum(m)) for k, m in viol.items()},
        }
        row4 = np.max(np.abs(dm.m[..., 3, :]))
        if row4 == 0.0:
            notes.append({"params": params, "note": "row 4 of the extended system vanishes identically"})
        tag = f"[{_tag(params)}]"
        w, _ = _worst(ident, U, V)
        checks.append(check(f"identities {tag}", float(np.max(ident)) < 1e-10, float(np.max(ident)), 1e-10, w))
        w, _ = _worst(wein, U, V)
        checks.append(check(f"weingarten {tag}", float(np.max(wein)) < 1e-8, float(np.max(wein)), 1e-8, w))
        if s.name in golden.RANK:
            expected = golden.RANK[s.name]
            bad = off & (rk != expected)
            checks.append(
                check(f"rank == {expected} off excluded lines {tag}", not bad.any(), int(bad.sum()), 0,
                      first_witness(bad, U, V))
            )
        if cfg.paper_scaling and s.name in golden.MINORS:
            gold = {}
            for pair, fn in golden.MINORS[s.name].items():
                val = minor_det(dm, pair)
                ref = fn(U, V, s.params)
                rel = golden.compare(val, ref)["rel_err"]
                w, k = _worst(rel, U, V)
                gold[f"minor_{pair[0]}{pair[1]}"] = _golden_entry(val[k], ref[k], w)
                checks.append(check(f"minor {pair} closed form {tag}", float(np.max(rel)) < 1e-9,
                                    float(np.max(rel)), 1e-9, w))
            run["golden_minors"] = gold
        runs.append(run)
    return envelope("analyze", asdict(cfg), {"runs": runs, "notes": notes}, checks, [])


def _class_csv(path, U, V, c18, c19, f):
    h11, h12, h22 = f.h
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["u", "v", "class18", "class19", "h11*h22", "h12"])
        for k in np.ndindex(U.shape):
            w.writerow([f"{U[k]:.17g}", f"{V[k]:.17g}", c18[k], c19[k], f"{h11[k] * h22[k]:.17g}", f"{h12[k]:.17g}"])


def cmd_reduce(cfg: RunConfig) -> dict:
    runs, checks, disc = [], [], []
    for params, s in _surfaces(cfg):
        U, V = _sample_mesh(cfg, s)
        f = frame(s.jets(U, V), cfg.tol_iso)
        rd = reduce(f, strict=False)
        eq18, eq19 = assemble_pdes(rd, f, cfg.form)
        c18, c19 = eq18.classification, eq19.classification
        adm = rd.admissible
        tag = f"[{_tag(params)}]"
        run = {
            "params": params,
            "form": cfg.form,
            "admissible_points": int(adm.sum()),
            "class18": dict(sorted(Counter(c18.ravel().tolist()).items())),
            "class19": dict(sorted(Counter(c19.ravel().tolist()).items())),
        }
        if adm.any():
            run["omega_min"] = float(np.min(rd.omega.val[adm]))
        path = _write(cfg, f"reduce_{_tag(params)}.csv")
        if path is not None:
            _class_csv(path, U, V, c18, c19, f)
            run["csv"] = str(path)

        expected = golden.CLASSES.get(s.name)
        t = s.params.get("t")
        if s.name == "helicoid-catenoid" and not (t is not None and 0 < t < math.pi / 2):
            expected = None
        if expected is not None:
            if expected[0] == "inadmissible":
                bad = adm
            else:
                bad = adm & ((c18 != expected[0]) | (c19 != expected[1]))
            checks.append(
                check(f"classification {expected} {tag}", not bad.any() and (expected[0] == "inadmissible" or adm.any()),
                      int(bad.sum()), 0, first_witness(bad, U, V) if bad.any() else None)
            )

        # closed against direct assembly
        d18, d19 = assemble_pdes(rd, f, "direct" if cfg.form == "closed" else "closed")
        if adm.any():
            gap = np.max(np.abs(eq18.normalized() - d18.normalized()), axis=-1)
            gap = np.where(adm, gap, 0.0)
            if np.max(gap) > 1e-8:
                w, _ = _worst(gap, U, V)
                disc.append({
                    "params": params,
                    "flag": "closed and direct assemblies differ where h12 != 0",
                    "detail": "the computed mixed coefficient of the first relation is -2*lam*h12 and the second-order "
                              "equation for y3 with principal part (0, h12, 0) then vanishes identically",
                    "max_normalized_gap": float(np.max(gap)),
                    "witness": list(w),
                })

        if s.name in golden.D_STATED and adm.any():
            d = compute_d(f).val
            ref_direct = golden.D_DIRECT[s.name](U, V, s.params)
            ref_stated = golden.D_STATED[s.name](U, V, s.params)
            w, k = _worst(np.abs(d - ref_direct), U, V)
            entry_direct = _golden_entry(d[k], ref_direct[k] if np.ndim(ref_direct) else ref_direct, w)
            entry_stated = _golden_entry(d[k], ref_stated, w)
            run["golden_d"] = {"direct": entry_direct, "stated": entry_stated}
            checks.append(check(f"d matches its defining formula {tag}", entry_direct["rel_err"] < 1e-10,
                                entry_direct["rel_err"], 1e-10, w))
            if entry_stated["rel_err"] > 1e-10:
                disc.append({
                    "params": params,
                    "flag": "reference closed form d = -2 cos^2 t sin t disagrees with the defining formula (-sin t)",
                    "detail": "both have no zeros for t in (0, pi), so admissibility is unaffected",
                    "stated": entry_stated,
                    "direct": entry_direct,
                })
        runs.append(run)
    return envelope("reduce", asdict(cfg), {"runs": runs}, checks, disc)


def random_boundary(grid: GridSpec, rng: np.random.Generator, modes: int = 3) -> GridField:
    """Smooth random trigonometric data on the whole grid (only the ring is used)."""
    U, V = grid.mesh()
    u0, u1, v0, v1 = grid.rect
    xi, eta = (U - u0) / (u1 - u0), (V - v0) / (v1 - v0)
    g = np.zeros_like(U)
    for k in range(modes + 1):
        for m in range(modes + 1):
            a = rng.normal() / (1 + k + m)
            phi = rng.uniform(0, 2 * math.pi)
            g += a * np.cos(math.pi * (k * xi + m * eta) + phi)
    return GridField(g, grid)


def cmd_maxprinciple(cfg: RunConfig) -> dict:
    runs, checks = [], []
    for params, s in _surfaces(cfg):
        nu, nv = cfg.grid or (64, 64)
        grid = GridSpec(tuple(_rect(cfg, s)), nu, nv)
        system = discretize_eq18(s, grid, cfg.form)
        mm = check_m_matrix(system)
        tag = f"[{_tag(params)}]"
        checks.append(check(f"M-matrix structure {tag}", all(mm.values()), mm))
        trials = []
        if cfg.constant is not None:
            seeds = [None]
        else:
            seeds = [cfg.seed + k for k in range(cfg.trials)]
        sampler = coefficient_sampler(s, "eq18", cfg.form)
        for sd in seeds:
            if sd is None:
                bnd = GridField(np.full((nu + 2, nv + 2), float(cfg.constant)), grid)
            else:
                bnd = random_boundary(grid, np.random.default_rng(sd))
            fld = solve_dirichlet(system, bnd)
            rep = check_max_principle(fld)
            entry = {"seed": sd, **rep.to_dict()}
            if cfg.dump_csv:
                path = _write(cfg, f"field_{_tag(params)}_{'const' if sd is None else f'seed{sd}'}.csv")
                if path is not None:
                    write_grid_csv(path, fld, grid_residual(sampler, fld))
                    entry["csv"] = str(path)
            trials.append(entry)
            checks.append(check(f"max principle {tag} seed={sd}", rep.passed, min(rep.margin, rep.margin_min),
                                rep.tol, rep.argmax_interior if rep.margin < rep.margin_min else rep.argmin_interior))
        runs.append({"params": params, "grid": {"rect": list(grid.rect), "nu": nu, "nv": nv},
                     "stencil": system.stencil_counts, "m_matrix": mm, "trials": trials})
    return envelope("max-principle", asdict(cfg), {"runs": runs}, checks, [])


def cmd_nodal(cfg: RunConfig) -> dict:
    runs, checks, disc, notes = [], [], [], []
    for params, s in _surfaces(cfg):
        nu, nv = cfg.grid or (100, 100)
        grid = GridSpec(tuple(_rect(cfg, s)), nu, nv)
        tag = f"[{_tag(params)}]"
        sets = {}
        run = {"params": params, "grid": {"rect": list(grid.rect), "nu": nu, "nv": nv}, "fields": {}}
        for which in ("n1", "n2", "d"):
            cs = scan_zero_curves(field_sampler(s, which), grid, which)
            sets[which] = cs
            info = {
                "polylines": len(cs.polylines),
                "vertices": cs.n_vertices,
                "identically_zero": cs.identically_zero,
                "isolated_zeros": [list(p) for p in cs.isolated_zeros],
                "vertex_max_abs": cs.vertex_max_abs,
            }
            if cs.isolated_zeros and not cs.polylines:
                info["note"] = "no curve; isolated zero suspected near " + ", ".join(
                    f"({u:.6g}, {v:.6g})" for u, v in cs.isolated_zeros)
            for ext, writer in (("csv", write_curves_csv), ("json", write_curves_json)):
                path = _write(cfg, f"nodal_{_tag(params)}_{which}.{ext}")
                if path is not None:
                    writer(path, cs)
                    info[ext] = str(path)
            run["fields"][which] = info
        if all(cs.identically_zero for cs in sets.values()):
            notes.append({"params": params, "note": "n1, n2 and d vanish identically; the reduction does not apply"})
        cell = math.hypot(grid.hu, grid.hv)
        if s.name in golden.N1_LINES and sets["n1"].polylines:
            axis, off, period = golden.N1_LINES[s.name]
            pts = np.concatenate([p.points for p in sets["n1"].polylines])
            dist = golden.line_distance(pts, axis, off, period)
            k = int(np.argmax(dist))
            run["n1_line_distance_max"] = float(dist[k])
            checks.append(check(f"n1 zero curves on {axis}={off:.6g}" + (f"+k*{period:.6g}" if period else "") + f" {tag}",
                                float(dist[k]) <= cell, float(dist[k]), cell, tuple(pts[k])))
            if s.name in golden.N1_LINES_STATED:
                a2, o2, p2 = golden.N1_LINES_STATED[s.name]
                d2 = golden.line_distance(pts, a2, o2, p2)
                if np.max(d2) > cell:
                    disc.append({
                        "params": params,
                        "flag": f"n1 vanishes on {axis}={off:g}, not on {a2}={o2:g} as the reference labelling states",
                        "detail": "the labels of the n1 and n2 zero lines are swapped in the reference",
                        "max_distance_to_stated_line": float(np.max(d2)),
                    })
        elif s.name in golden.N1_LINES:
            checks.append(check(f"n1 zero curves present {tag}", False, 0, None, None))
        if s.name in golden.D_POINT:
            p0 = golden.D_POINT[s.name]
            cs = sets["d"]
            near = [z for z in cs.isolated_zeros if math.hypot(z[0] - p0[0], z[1] - p0[1]) <= cell]
            ok = bool(near) and not cs.polylines
            checks.append(check(f"d isolated zero near {p0} {tag}", ok, len(cs.polylines), 0,
                                None if ok else (cs.polylines[0].points[0].tolist() if cs.polylines else list(p0))))
        runs.append(run)
    return envelope("nodal", asdict(cfg), {"runs": runs, "notes": notes}, checks, disc)


def cmd_verify_field(cfg: RunConfig) -> dict:
    runs, checks = [], []
    for params, s in _surfaces(cfg):
        name = cfg.bend_param
        if name is None:
            if len(s.params) != 1:
                raise PreconditionError("--bend-param is required unless the surface has exactly one parameter")
            name = next(iter(s.params))
        rng = np.random.default_rng(cfg.seed)
        u0, u1, v0, v1 = _rect(cfg, s)
        margin = 0.02 * min(u1 - u0, v1 - v0)
        u = np.empty(0)
        v = np.empty(0)
        while u.size < cfg.samples:
            uu = rng.uniform(u0 + margin, u1 - margin, 4 * cfg.samples)
            vv = rng.uniform(v0 + margin, v1 - margin, 4 * cfg.samples)
            keep = ~s.near_excluded(uu, vv, margin)
            u, v = np.concatenate([u, uu[keep]]), np.concatenate([v, vv[keep]])
        u, v = u[: cfg.samples], v[: cfg.samples]
        res = verify_bending_field(s, name, u, v, cfg.fd_step, cfg.fd_step2, cfg.form)
        half = verify_bending_field(s, name, u, v, cfg.fd_step, cfg.fd_step2 / 2, cfg.form)
        tag = f"[{_tag(params)}]"
        summary = {}
        tols = {"bending": 1e-10, "lsq": 1e-10, "r5": 1e-6, "r8": 1e-6, "r9": 1e-6, "r10": 1e-6, "r11": 1e-6,
                "eq18": 1e-4, "eq19": 1e-4}
        for key, arr in res.items():
            finite = np.isfinite(arr)
            summary[key] = {"max": float(np.max(arr[finite])) if finite.any() else None, "points": int(finite.sum())}
            if finite.any():
                k = int(np.argmax(np.where(finite, arr, -1.0)))
                checks.append(check(f"{key} residual {tag}", float(arr[k]) < tols[key], float(arr[k]), tols[key],
                                    (float(u[k]), float(v[k]))))
        ratios = {}
        for key in ("eq18", "eq19"):
            a, b = np.nanmax(res[key]), np.nanmax(half[key])
            ratios[key] = float(a / b) if b > 0 else None
        runs.append({"params": params, "bend_param": name, "samples": int(u.size), "residuals": summary,
                     "fd_halving_ratio": ratios})
    return envelope("verify-field", asdict(cfg), {"runs": runs}, checks, [])


HANDLERS = {
    "analyze": cmd_analyze,
    "reduce": cmd_reduce,
    "max-principle": cmd_maxprinciple,
    "nodal": cmd_nodal,
    "verify-field": cmd_verify_field,
}


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rotfield", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--surface", default="sphere-stereo", help="preset name or JSON surface file")
    common.add_argument("--param", action="append", default=[], metavar="NAME=VAL",
                        help="parameter value; repeat a name to sweep")
    common.add_argument("--grid", type=_parse_grid, metavar="NUxNV")
    common.add_argument("--rect", type=_parse_rect, metavar="u0,u1,v0,v1")
    common.add_argument("--tol-iso", type=float, default=1e-8)
    common.add_argument("--tol-rank", type=float, default=1e-9)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", metavar="DIR", help="write report.json and data files here (default: stdout)")
    common.add_argument("--paper-scaling", action="store_true", help="use the reference row scaling of the Darboux matrix")
    common.add_argument("--form", choices=("closed", "direct"), default="closed")
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "max-principle":
            p.add_argument("--trials", type=int, default=1)
            p.add_argument("--constant", type=_const, help="constant boundary value instead of random data")
            p.add_argument("--dump-csv", action="store_true")
        if name == "verify-field":
            p.add_argument("--bend-param")
            p.add_argument("--samples", type=int, default=100)
            p.add_argument("--fd-step", type=float, default=1e-4)
            p.add_argument("--fd-step2", type=float, default=1e-2)
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    kw = {k: v for k, v in vars(ns).items() if k in RunConfig.__dataclass_fields__ and k != "params"}
    return RunConfig(params=_parse_params(ns.param), **kw)


def _error_report(cfg_dict, exc, code) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": (cfg_dict or {}).get("command"),
        "config": cfg_dict,
        "verdict": "ERROR",
        "exit_code": code,
        "error": {"type": type(exc).__name__, "message": str(exc), "witness": getattr(exc, "witness", None)},
    }


def _bind_values(argv: list[str]) -> list[str]:
    # "--rect -1,1,-1,1" would otherwise read the value as an option
    out, it = [], iter(argv)
    for tok in it:
        if tok in ("--rect", "--param"):
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    argv = _bind_values(sys.argv[1:] if argv is None else list(argv))
    cfg_dict = None
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return int(exc.code or 0)
    try:
        cfg = config_from_args(ns)
        cfg_dict = asdict(cfg)
        report = HANDLERS[cfg.command](cfg)
        code = EXIT_OK
    except (ParseError, SurfaceError, argparse.ArgumentTypeError) as exc:
        report, code = _error_report(cfg_dict, exc, EXIT_PARSE), EXIT_PARSE
    except PreconditionError as exc:
        report, code = _error_report(cfg_dict, exc, EXIT_PRECONDITION), EXIT_PRECONDITION
    except (NumericalFailure, np.linalg.LinAlgError) as exc:
        report, code = _error_report(cfg_dict, exc, EXIT_NUMERICAL), EXIT_NUMERICAL
    except ValueError as exc:
        report, code = _error_report(cfg_dict, exc, EXIT_PARSE), EXIT_PARSE
    text = dumps(report)
    path = _write(cfg, "report.json") if cfg_dict is not None else None
    if path is not None:
        path.write_text(text)
    else:
        sys.stdout.write(text)
    if code != EXIT_OK:
        print(f"error: {report['error']['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
