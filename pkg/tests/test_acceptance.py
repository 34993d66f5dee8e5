"""Acceptance criteria 1-10. Each test prints one ``[k] PASS|FAIL ...`` line, then asserts."""

import math
import time

import numpy as np
import pytest

from rotfield import golden
from rotfield.cli import random_boundary
from rotfield.darboux import assemble, minor_det, rank, residuals_from_block
from rotfield.frames import frame
from rotfield.nodal import field_sampler, scan_zero_curves
from rotfield.pde import GridField, GridSpec, check_max_principle, discretize_eq18, solve_dirichlet
from rotfield.reduction import (
    assemble_pdes,
    closed_forms,
    compute_d,
    compute_pq,
    cramer_solve,
    cross_check_d_as_det,
    dense_solve,
    reduce,
)
from rotfield.surfaces import preset
from rotfield.verify import verify_bending_field

from .conftest import away_from_lines

T_FAMILY = (math.pi / 6, math.pi / 4, math.pi / 3)


@pytest.fixture
def emit(capsys):
    def _emit(k, ok, text):
        with capsys.disabled():
            print(f"\n[{k}] {'PASS' if ok else 'FAIL'} {text}")
        assert ok, text

    return _emit


def rel_err(a, b):
    return np.abs(a - b) / np.abs(b)


def helicoid_uv(rng, n, v_max=1.5, gap=0.1):
    return away_from_lines(rng, n, 0.0, 2 * math.pi, math.pi / 2, gap=gap), rng.uniform(-v_max, v_max, n)


def test_1_sphere_golden_minors(rng, emit):
    t0 = time.perf_counter()
    s = preset("sphere")
    u, v = rng.uniform(-2, 2, 100), rng.uniform(-2, 2, 100)
    dm = assemble(frame(s.jets(u, v)), s, paper_scaling=True)
    e36 = rel_err(minor_det(dm, (3, 6)), golden.MINORS[s.name][(3, 6)](u, v, {}))
    e25 = rel_err(minor_det(dm, (2, 5)), golden.MINORS[s.name][(2, 5)](u, v, {}))
    dt = time.perf_counter() - t0
    err = max(e36.max(), e25.max())
    emit(1, err < 1e-9 and dt < 1.0, f"sphere minors (3,6),(2,5): max rel err {err:.2e} < 1e-9, {dt:.3f} s < 1 s")


def test_2_helicoid_golden_minor(rng, emit):
    worst = 0.0
    for t in (*T_FAMILY, math.pi / 2):
        s = preset("helicoid", t=t)
        u, v = rng.uniform(0, 2 * math.pi, 100), rng.uniform(-1.5, 1.5, 100)
        dm = assemble(frame(s.jets(u, v)), s, paper_scaling=True)
        worst = max(worst, rel_err(minor_det(dm, (3, 6)), golden.MINORS[s.name][(3, 6)](u, v, {"t": t})).max())
    emit(2, worst < 1e-9, f"helicoid minor (3,6) at 4 values of t: max rel err {worst:.2e} < 1e-9")


def test_3_rank_claims(rng, emit):
    n = 10_000
    s = preset("sphere")
    u, v = rng.uniform(-2, 2, n), rng.uniform(-2, 2, n)
    fail_s = int(np.sum(rank(assemble(frame(s.jets(u, v)))) != 4))
    fail_h = 0
    for t in np.linspace(0.05, math.pi - 0.05, 20):
        u, v = helicoid_uv(rng, n // 20, gap=0.02)
        fail_h += int(np.sum(rank(assemble(frame(preset("helicoid", t=t).jets(u, v)))) != 4))
    p = preset("plane")
    u, v = rng.uniform(-1, 1, n), rng.uniform(-1, 1, n)
    fail_p = int(np.sum(rank(assemble(frame(p.jets(u, v)))) != 3))
    total = fail_s + fail_h + fail_p
    emit(3, total == 0, f"rank failures over 1e4 points each: sphere {fail_s}, helicoid {fail_h}, plane {fail_p}")


def _cross_matrix(xu, xv):
    eye = np.eye(3)
    left = np.stack([np.cross(eye[k], xv) for k in range(3)], axis=-1)
    right = np.stack([-np.cross(eye[k], xu) for k in range(3)], axis=-1)
    return np.concatenate([left, right], axis=-1)


def _null_sample(mats, rng):
    _, _, vt = np.linalg.svd(mats)
    y = np.einsum("...k,...kj->...j", rng.normal(size=mats.shape[:-2] + (3,)), vt[..., -3:, :])
    return y / np.linalg.norm(y, axis=-1, keepdims=True)


def test_4_first_order_equivalence(rng, emit):
    worst_fwd = worst_back = 0.0
    for s in (preset("plane"), preset("sphere"), preset("helicoid", t=math.pi / 4)):
        u0, u1, v0, v1 = s.domain
        f = frame(s.jets(rng.uniform(u0, u1, 1000), rng.uniform(v0, v1, 1000)))
        y = _null_sample(assemble(f).m[..., :3, :], rng)
        worst_fwd = max(worst_fwd, np.max(np.abs(residuals_from_block(y[..., :3], y[..., 3:], f)["r5"])))
        y = _null_sample(_cross_matrix(f.xu_val, f.xv_val), rng)
        r = residuals_from_block(y[..., :3], y[..., 3:], f)
        worst_back = max(worst_back, max(np.max(np.abs(r[k])) for k in ("r8", "r9", "r10")))
    ok = worst_fwd < 1e-10 and worst_back < 1e-10
    emit(4, ok, f"rows 1-3 null space -> |r5| max {worst_fwd:.2e}; cross-product null space -> rows max "
                f"{worst_back:.2e} (both < 1e-10, 1e3 points per preset)")


def test_5_new_row_end_to_end(rng, emit):
    worst = 0.0
    for t in T_FAMILY:
        u, v = helicoid_uv(rng, 100, v_max=1.4)
        res = verify_bending_field(preset("helicoid", t=t), "t", u, v, h_first=1e-4)
        worst = max(worst, res["r11"].max())
    emit(5, worst < 1e-6, f"|r11| max {worst:.2e} < 1e-6 (100 points per t, h = 1e-4)")


def test_6_second_order_end_to_end(rng, emit):
    worst = {"eq18": 0.0, "eq19": 0.0}
    ratios = {"eq18": [], "eq19": []}
    h = 1e-2
    for t in T_FAMILY:
        s = preset("helicoid", t=t)
        u, v = helicoid_uv(rng, 100, v_max=1.4)
        a = verify_bending_field(s, "t", u, v, h_second=h)
        b = verify_bending_field(s, "t", u, v, h_second=h / 2)
        for k in worst:
            worst[k] = max(worst[k], np.nanmax(a[k]))
            ratios[k].append(np.nanmax(a[k]) / np.nanmax(b[k]))
    r18 = ratios["eq18"]
    ok18 = worst["eq18"] < 1e-4 and all(3.5 < r < 4.5 for r in r18)
    # eq19 carries no truncation error for this field (y3 depends on v only and the v-coefficient
    # vanishes), so its residual sits at the rounding floor for every step
    ok19 = worst["eq19"] < 1e-4 and (worst["eq19"] < 1e-10 or all(3.5 < r < 4.5 for r in ratios["eq19"]))
    emit(6, ok18 and ok19, f"eq18 max {worst['eq18']:.2e}, halving ratios {np.round(r18, 3).tolist()}; "
                           f"eq19 max {worst['eq19']:.2e} (rounding floor); tol 1e-4")


def test_7_classification_map(rng, emit):
    def classes(s, u, v):
        f = frame(s.jets(u, v))
        rd = reduce(f, strict=False)
        e18, e19 = assemble_pdes(rd, f)
        return set(zip(e18.classification.tolist(), e19.classification.tolist())), rd.admissible

    u, v = rng.uniform(-2, 2, 2000), rng.uniform(-2, 2, 2000)
    sph, adm = classes(preset("sphere"), u, v)
    ok = sph == {golden.CLASSES["sphere-stereo"]} and adm.all()
    got = {"sphere": sorted(sph)}
    for t in np.linspace(0.05, math.pi / 2 - 0.05, 12):
        hel, adm = classes(preset("helicoid", t=t), *helicoid_uv(rng, 300))
        ok &= hel == {golden.CLASSES["helicoid-catenoid"]} and adm.all()
        got.setdefault("helicoid", set()).update(hel)
    pl, adm = classes(preset("plane"), rng.uniform(-1, 1, 500), rng.uniform(-1, 1, 500))
    ok &= pl == {golden.CLASSES["plane"]} and not adm.any()
    got["helicoid"] = sorted(got["helicoid"])
    got["plane"] = sorted(pl)
    emit(7, ok, f"classes {got}")


def test_8_maximum_principle(emit):
    t0 = time.perf_counter()
    grid = GridSpec((0.5, 1.5, 0.5, 1.5), 64, 64)
    system = discretize_eq18(preset("sphere"), grid)
    reports = [check_max_principle(solve_dirichlet(system, random_boundary(grid, np.random.default_rng(seed))))
               for seed in range(50)]
    const = check_max_principle(solve_dirichlet(system, GridField(np.full((66, 66), 0.7), grid)))
    dt = time.perf_counter() - t0
    worst = min(min(r.margin, r.margin_min) for r in reports)
    n_pass = sum(r.passed for r in reports)
    ok = n_pass == 50 and worst >= -1e-10 and const.margin == 0 and const.margin_min == 0 and dt < 30
    emit(8, ok, f"{n_pass}/50 PASS, worst margin {worst:.3e} >= -1e-10, constant margin {const.margin!r}, "
                f"{dt:.2f} s < 30 s")


def test_9_internal_consistency(rng, emit):
    e = dict.fromkeys(("det", "cramer", "grad", "assembly"), 0.0)
    omega_min = np.inf
    hh = 1e-5
    for s in (preset("sphere"), preset("helicoid", t=0.9)):
        if s.name == "sphere-stereo":
            u = away_from_lines(rng, 300, -2, 2, 4.0, offset=0.0, gap=0.05)
            v = away_from_lines(rng, 300, -2, 2, 4.0, offset=0.0, gap=0.05)
        else:
            u, v = helicoid_uv(rng, 300, v_max=1.2)
        f = frame(s.jets(u, v))
        e["det"] = max(e["det"], np.max(cross_check_d_as_det(f)))
        a, b = rng.normal(size=u.size), rng.normal(size=u.size)
        e["cramer"] = max(e["cramer"], np.max(np.abs(cramer_solve(f, a, b) - dense_solve(f, a, b))))

        def vals(x, y):
            g = frame(s.jets(x, y))
            p, q, _ = compute_pq(g)
            return np.stack([compute_d(g).val] + [j.val for j in p + q], -1)

        p, q, _ = compute_pq(f)
        jets = [compute_d(f)] + list(p + q)
        gu = np.stack([j.du for j in jets], -1) - (vals(u + hh, v) - vals(u - hh, v)) / (2 * hh)
        gv = np.stack([j.dv for j in jets], -1) - (vals(u, v + hh) - vals(u, v - hh)) / (2 * hh)
        e["grad"] = max(e["grad"], np.max(np.abs(gu)), np.max(np.abs(gv)))

        rd = reduce(f)
        omega_min = min(omega_min, rd.omega.val.min())
        first, second = closed_forms(rd, f)
        e18, e19 = assemble_pdes(rd, f)
        w, lam = rd.omega.val[..., None], f.lam.val[..., None]
        e["assembly"] = max(e["assembly"], np.max(np.abs((first + second) / (2 * w) - e18.coeffs)),
                            np.max(np.abs((first - second) / (4 * lam) - e19.coeffs)))
    ok = e["det"] < 1e-10 and e["cramer"] < 1e-10 and e["grad"] < 1e-6 and omega_min > 0 and e["assembly"] < 1e-10
    emit(9, ok, f"|d - det D| {e['det']:.1e}, cramer vs dense {e['cramer']:.1e}, jet vs FD gradients "
                f"{e['grad']:.1e}, min omega {omega_min:.3g}, assembly identity {e['assembly']:.1e}")


def test_10_nodal_lines(emit):
    h = preset("helicoid", t=math.pi / 3)
    grid = GridSpec(h.domain, 100, 100)
    n1 = scan_zero_curves(field_sampler(h, "n1"), grid, "n1")
    pts = np.concatenate([p.points for p in n1.polylines])
    axis, off, period = golden.N1_LINES[h.name]
    dist = golden.line_distance(pts, axis, off, period).max()
    ok_h = dist <= grid.hu and len(n1.polylines) >= 2
    s = preset("sphere")
    sgrid = GridSpec(s.domain, 100, 100)
    d = scan_zero_curves(field_sampler(s, "d"), sgrid, "d")
    iso = d.isolated_zeros
    ok_s = not d.polylines and len(iso) == 1 and math.hypot(*iso[0]) <= math.hypot(sgrid.hu, sgrid.hv)
    emit(10, ok_h and ok_s, f"helicoid n1 max distance to u = pi/2 + k pi {dist:.2e} <= cell {grid.hu:.3g}; "
                            f"sphere d isolated zeros {iso}, polylines {len(d.polylines)}")
