import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rotfield.errors import HypothesisViolation
from rotfield.frames import frame
from rotfield.reduction import (
    assemble_pdes,
    classify,
    closed_forms,
    compute_d,
    compute_pq,
    cramer_solve,
    cross_check_d_as_det,
    dense_solve,
    direct_forms,
    pde_residual,
    pq_by_cramer,
    reduce,
)
from rotfield.surfaces import SurfaceDef, preset, rotation_zx
from rotfield.verify import fd_first

from .conftest import away_from_lines

TILT = rotation_zx(0.7, 0.3)


def tilted(t=0.9):
    return preset("helicoid", t=t).rotated(TILT)


def cone(phi=0.4, c=1.0):
    """Isothermal chart of a circular cone, parameter plane rotated by phi so h12 != 0."""
    s = 1 / math.sqrt(1 + c * c)
    U = f"(u*{math.cos(phi)!r} - v*{math.sin(phi)!r})"
    V = f"(u*{math.sin(phi)!r} + v*{math.cos(phi)!r})"
    return SurfaceDef(
        name="cone",
        x=(f"exp({s!r}*{U})*cos({V})", f"exp({s!r}*{U})*sin({V})", f"{c!r}*exp({s!r}*{U})"),
        domain=(-1.0, 1.0, -1.0, 1.0),
    )


def helicoid_points(rng, n, v_max=1.2):
    return away_from_lines(rng, n, 0.0, 2 * math.pi, math.pi / 2), rng.uniform(-v_max, v_max, n)


def test_d_examples():
    assert compute_d(frame(preset("sphere").jets(1.0, 0.0))).val == pytest.approx(1.0)
    assert compute_d(frame(preset("plane").jets(0.3, 0.1))).val == 0
    t = math.pi / 4
    d = compute_d(frame(preset("helicoid", t=t).jets(np.array([0.3, 2.0]), np.array([0.5, -1.0]))))
    np.testing.assert_allclose(d.val, -math.sin(t), rtol=1e-13)


@given(st.floats(0.05, math.pi / 2 - 0.05))
def test_helicoid_d_zero_set(t):
    """d = -sin t: no zeros for t in (0, pi/2), same zero set as -2 cos^2 t sin t there."""
    d = compute_d(frame(preset("helicoid", t=t).jets(np.array([0.4, 1.9]), np.array([0.2, -0.7])))).val
    np.testing.assert_allclose(d, -math.sin(t), rtol=1e-12)
    assert np.all(d < 0) and -2 * math.cos(t) ** 2 * math.sin(t) < 0


@pytest.mark.parametrize(
    "surf,u,v",
    [(preset("sphere"), 1.0, 0.0), (preset("helicoid", t=math.pi / 3), 0.5, 0.5), (preset("plane"), 0.2, 0.3)],
)
def test_d_is_det_examples(surf, u, v):
    assert cross_check_d_as_det(frame(surf.jets(u, v))) < 1e-12


def test_pq_examples():
    f = frame(preset("sphere").jets(1.0, 0.0))
    _, _, om = compute_pq(f)
    assert om.val == pytest.approx(1.0)
    p, q, _ = compute_pq(frame(preset("plane").jets(0.3, -0.2)))
    assert all(a.val == 0 for a in p + q)
    u = np.array([0.3, 1.0, 2.5])
    f = frame(preset("helicoid", t=math.pi / 2).jets(u, 0 * u))
    p, q, om = compute_pq(f)
    np.testing.assert_allclose(f.h11.val, -1, rtol=1e-14)
    np.testing.assert_allclose(f.n[1].val, np.sin(u), atol=1e-14)
    np.testing.assert_allclose(q[0].val, -np.sin(u) * om.val, rtol=1e-13)


@pytest.mark.parametrize("name", ["sphere", "helicoid", "tilted", "cone"])
def test_pq_closed_forms_match_cramer_determinants(name, rng):
    s = {"sphere": preset("sphere"), "helicoid": preset("helicoid", t=1.1), "tilted": tilted(), "cone": cone()}[name]
    u0, u1, v0, v1 = s.domain
    u, v = rng.uniform(u0, u1, 200), rng.uniform(max(v0, -1.2), min(v1, 1.2), 200)
    f = frame(s.jets(u, v))
    p, q, _ = compute_pq(f)
    P, Q = pq_by_cramer(f)
    scale = np.max(np.abs(P), axis=-1, keepdims=True) + np.max(np.abs(Q), axis=-1, keepdims=True)
    assert np.max(np.abs(np.stack([a.val for a in p], -1) - P) / scale) < 1e-12
    assert np.max(np.abs(np.stack([a.val for a in q], -1) - Q) / scale) < 1e-12


def test_zero_pattern_on_sphere_axes(rng):
    s = preset("sphere")
    w = rng.uniform(-2, 2, 50)
    p, q, _ = compute_pq(frame(s.jets(0 * w, w)))  # u = 0: n1 = 0
    assert np.max(np.abs(q[1].val)) < 1e-14 and np.max(np.abs(p[3].val)) < 1e-14
    p, q, _ = compute_pq(frame(s.jets(w, 0 * w)))  # v = 0: n2 = 0
    assert np.max(np.abs(q[0].val)) < 1e-14 and np.max(np.abs(p[2].val)) < 1e-14


@pytest.mark.parametrize("name", ["sphere", "helicoid", "tilted"])
def test_gradients_vs_finite_differences(name, rng):
    s = {"sphere": preset("sphere"), "helicoid": preset("helicoid", t=0.8), "tilted": tilted()}[name]
    u = away_from_lines(rng, 30, 0.1, 1.4, math.pi / 2)
    v = rng.uniform(-1, 1, 30)
    h = 1e-5

    def vals(a, b):
        f = frame(s.jets(a, b))
        p, q, _ = compute_pq(f)
        return np.stack([compute_d(f).val] + [x.val for x in p + q], -1)

    f = frame(s.jets(u, v))
    p, q, _ = compute_pq(f)
    jets = [compute_d(f)] + list(p + q)
    ju = np.stack([j.du for j in jets], -1)
    jv = np.stack([j.dv for j in jets], -1)
    assert np.max(np.abs(ju - (vals(u + h, v) - vals(u - h, v)) / (2 * h))) < 1e-6
    assert np.max(np.abs(jv - (vals(u, v + h) - vals(u, v - h)) / (2 * h))) < 1e-6


def test_cramer_examples(rng):
    s = preset("sphere")
    f = frame(s.jets(1.0, 1.0))
    np.testing.assert_array_equal(cramer_solve(f, 0.0, 0.0), np.zeros(4))
    p, _, _ = compute_pq(f)
    d = compute_d(f).val
    np.testing.assert_allclose(cramer_solve(f, 1.0, 0.0), [a.val / d for a in p], rtol=1e-14)
    u, v = rng.uniform(0.1, 2, 100), rng.uniform(0.1, 2, 100)
    f = frame(s.jets(u, v))
    a, b = rng.normal(size=100), rng.normal(size=100)
    np.testing.assert_allclose(cramer_solve(f, a, b), dense_solve(f, a, b), rtol=1e-10, atol=1e-10)


def test_cramer_recovers_field_derivatives():
    h = preset("helicoid", t=math.pi / 4)
    f = frame(h.jets(1.0, 1.0))
    from rotfield.darboux import rotation_field_sampler

    yu, yv = fd_first(rotation_field_sampler(h, "t"), np.array(1.0), np.array(1.0), 1e-4)
    X = cramer_solve(f, yu[2], yv[2])
    np.testing.assert_allclose(X, [yu[0], yu[1], yv[0], yv[1]], atol=1e-6)


def test_hypothesis_violations_are_reported():
    with pytest.raises(HypothesisViolation) as e:
        reduce(frame(preset("plane").jets(np.array([0.5, 0.1]), np.array([0.2, 0.2]))))
    assert e.value.witness == (0.5, 0.2)
    with pytest.raises(HypothesisViolation):
        cramer_solve(frame(preset("sphere").jets(0.0, 0.7)), 1.0, 0.0)
    rd = reduce(frame(preset("sphere").jets(np.array([0.0, 0.5]), np.array([0.5, 0.5]))), strict=False)
    assert rd.admissible.tolist() == [False, True]
    assert np.all(np.isnan(rd.rho[0])) and np.all(np.isfinite(rd.rho[1]))


def test_assembled_equations_examples(rng):
    u, v = rng.uniform(0.2, 1.8, 20), rng.uniform(0.2, 1.8, 20)
    f = frame(preset("sphere").jets(u, v))
    eq18, eq19 = assemble_pdes(reduce(f), f)
    np.testing.assert_allclose(eq18.a_uu, f.lam.val, rtol=1e-13)
    np.testing.assert_allclose(eq18.a_vv, f.lam.val, rtol=1e-13)
    assert np.all(eq18.a_uv == 0) and np.all(eq19.a_uu == 0) and np.all(eq19.a_vv == 0)
    assert set(eq18.classification) == {"elliptic"} and set(eq19.classification) == {"degenerate"}
    t = math.pi / 4
    u, v = helicoid_points(rng, 20)
    f = frame(preset("helicoid", t=t).jets(u, v))
    eq18, eq19 = assemble_pdes(reduce(f), f)
    np.testing.assert_allclose(eq18.coeffs[..., :3], np.broadcast_to([math.sin(t), 0, -math.sin(t)], (20, 3)),
                               atol=1e-14)
    np.testing.assert_allclose(eq19.a_uv, math.cos(t), rtol=1e-13)
    assert set(eq18.classification) == {"hyperbolic"} and set(eq19.classification) == {"hyperbolic"}
    f = frame(preset("plane").jets(u, v))
    eq18, _ = assemble_pdes(reduce(f, strict=False), f)
    assert set(eq18.classification) == {"inadmissible"}


def test_classify_rules():
    assert classify(np.array([[1, 0, 1], [1, 0, -1], [1, 2, 1], [0, 0, 0]]), 1.0).tolist() == [
        "elliptic",
        "hyperbolic",
        "parabolic",
        "degenerate",
    ]


@pytest.mark.parametrize("name", ["sphere", "helicoid", "tilted", "cone"])
def test_omega_positive_and_d_is_det(name, rng):
    s = {"sphere": preset("sphere"), "helicoid": preset("helicoid", t=0.4), "tilted": tilted(), "cone": cone()}[name]
    u0, u1, v0, v1 = s.domain
    u, v = rng.uniform(u0, u1, 500), rng.uniform(v0, v1, 500)
    f = frame(s.jets(u, v))
    assert np.all(reduce(f, strict=False).omega.val > 0)
    assert np.max(cross_check_d_as_det(f) / (1 + np.abs(compute_d(f).val))) < 1e-10


@pytest.mark.parametrize("name", ["sphere", "helicoid", "tilted", "cone"])
def test_final_assembly_identity(name, rng):
    """(first + second) / 2w and (first - second) / 4 lam reproduce the closed-form equations."""
    s = {"sphere": preset("sphere"), "helicoid": preset("helicoid", t=1.2), "tilted": tilted(), "cone": cone()}[name]
    u = away_from_lines(rng, 200, 0.1, 1.4, math.pi / 2)
    v = rng.uniform(-0.9, 0.9, 200)
    f = frame(s.jets(u, v))
    rd = reduce(f, strict=False)
    ok = rd.admissible
    first, second = closed_forms(rd, f)
    w, lam = rd.omega.val[..., None], f.lam.val[..., None]
    eq18, eq19 = assemble_pdes(rd, f)
    sc18 = np.max(np.abs(eq18.coeffs), axis=-1, keepdims=True)
    sc19 = np.max(np.abs(eq19.coeffs), axis=-1, keepdims=True)
    assert np.max((np.abs((first + second) / (2 * w) - eq18.coeffs) / sc18)[ok]) < 1e-10
    assert np.max((np.abs((first - second) / (4 * lam) - eq19.coeffs) / sc19)[ok]) < 1e-10


@pytest.mark.parametrize("name", ["tilted", "cone", "helicoid"])
def test_direct_relations_coincide(name, rng):
    """Computed relations: mixed coefficient -2 lam h12 and the two relations agree."""
    s = {"tilted": tilted(), "cone": cone(), "helicoid": preset("helicoid", t=1.0)}[name]
    u = away_from_lines(rng, 200, 0.1, 1.4, math.pi / 2)
    v = rng.uniform(-0.9, 0.9, 200)
    f = frame(s.jets(u, v))
    rd = reduce(f, strict=False)
    ok = rd.admissible
    a, b = direct_forms(rd, f)
    w, lam = rd.omega.val, f.lam.val
    h11, h12, h22 = f.h
    want = np.stack([w * h22, -2 * lam * h12, w * h11], -1)
    scale = np.max(np.abs(want), axis=-1, keepdims=True)
    assert np.max((np.abs(a[..., :3] - want) / scale)[ok]) < 1e-9
    assert np.max((np.abs(b[..., :3] - want) / scale)[ok]) < 1e-9
    assert np.max((np.abs(a - b) / np.max(np.abs(a), axis=-1, keepdims=True))[ok]) < 1e-8
    assert np.max(np.abs(h12[ok])) > 0.1


def test_rotation_field_residuals_discriminate_assemblies(rng):
    """On the tilted helicoid y = -n has y3uv != 0: only the direct assembly annihilates it."""
    s = tilted(0.9)
    u, v = helicoid_points(rng, 50, 1.0)
    f = frame(s.jets(u, v))
    rd = reduce(f, strict=False)
    ok = rd.admissible
    y3 = -f.n[2]
    assert np.min(np.abs(y3.duv[ok])) > 0 and np.median(np.abs(y3.duv[ok])) > 1e-2
    d18, d19 = assemble_pdes(rd, f, "direct")
    c18, c19 = assemble_pdes(rd, f, "closed")
    assert np.max(np.abs(pde_residual(d18, y3)[ok])) < 1e-10
    assert np.max(np.abs(pde_residual(d19, y3)[ok])) < 1e-10
    assert np.median(np.abs(pde_residual(c18, y3)[ok])) > 1e-3
    # untilted: y3 = tanh v has y3uv = 0 and both assemblies agree
    h = preset("helicoid", t=0.9)
    f = frame(h.jets(u, v))
    rd = reduce(f, strict=False)
    y3 = -f.n[2]
    np.testing.assert_allclose(y3.val, np.tanh(v), atol=1e-14)
    for form in ("closed", "direct"):
        e18, e19 = assemble_pdes(rd, f, form)
        assert np.nanmax(np.abs(pde_residual(e18, y3))) < 1e-10
        assert np.nanmax(np.abs(pde_residual(e19, y3))) < 1e-10


def test_pde_residual_of_constant_is_zero(rng):
    u, v = rng.uniform(0.2, 1.5, 10), rng.uniform(0.2, 1.5, 10)
    f = frame(preset("sphere").jets(u, v))
    for pde in assemble_pdes(reduce(f), f):
        assert np.all(pde_residual(pde, f.lam * 0 + 3.0) == 0)


def test_classification_tracks_h11_h22_sign(rng):
    for s in (preset("sphere"), preset("helicoid", t=0.5), tilted(), cone()):
        u = away_from_lines(rng, 100, 0.1, 1.4, math.pi / 2)
        v = rng.uniform(-0.9, 0.9, 100)
        f = frame(s.jets(u, v))
        rd = reduce(f, strict=False)
        ok = rd.admissible
        eq18, _ = assemble_pdes(rd, f)
        h11, _, h22 = f.h
        assert np.all((eq18.classification == "elliptic")[ok] == (h11 * h22 > 0)[ok])
