import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaffkorn.domains import (
    Family,
    boundary_frame,
    boundary_point,
    collar_profile,
    div_extension,
    div_extension_bound,
    domain_config_text,
    extension_field,
    make_domain,
    metric_determinant,
    nearest_point,
    parse_domain_config,
    reach_analytic,
    reach_numeric,
    signed_distance,
    tubular_map,
)
from gaffkorn.errors import InvalidAspect, InvalidParams, NotUnique, OutOfChart, OutOfTube
from gaffkorn.fields import finite_difference_jacobian
from gaffkorn.quadrature import make_rule

DOMAINS = [
    make_domain("ball", r=1.0, n=2),
    make_domain("ball", r=2.0, n=3),
    make_domain("ball", r=0.7, n=4),
    make_domain("annulus", r0=1.0, r1=2.0, n=2),
    make_domain("annulus", r0=0.5, r1=2.5, n=3),
    make_domain("ellipse", a=2.0, b=1.0),
    make_domain("ellipse", a=1.5, b=1.2),
    make_domain("torus", r=1.0, R=2.0),
    make_domain("torus", r=0.5, R=2.0),
]


def random_chart(domain, rng, m):
    fam, n = domain.family, domain.n
    if fam is Family.ELLIPSE:
        return rng.uniform(0, 2 * np.pi, (m, 1))
    if fam is Family.TORUS:
        return rng.uniform(0, 2 * np.pi, (m, 2))
    ang = np.hstack([rng.uniform(0, np.pi, (m, n - 2)), rng.uniform(0, 2 * np.pi, (m, 1))])
    if fam is Family.ANNULUS:
        return np.hstack([rng.integers(0, 2, (m, 1)).astype(float), ang])
    return ang


def chart_map(domain, U):
    return boundary_frame(domain, U).points


# --- construction ----------------------------------------------------------


def test_make_domain_examples():
    assert make_domain("Ball", r=1, n=3).n == 3
    assert make_domain("SolidTorus3D", r=1, R=2, n=3).aspect_ratio == 2.0
    with pytest.raises(InvalidParams):
        make_domain("SolidTorus3D", r=2, R=1, n=3)
    with pytest.raises(InvalidAspect):
        make_domain("torus", r=1, R=1)


@pytest.mark.parametrize("bad", [
    dict(family="ball", r=-1.0), dict(family="annulus", r0=2.0, r1=1.0),
    dict(family="ellipse", a=1.0, b=2.0), dict(family="ball", r=1.0, n=1),
    dict(family="ellipse", a=2.0, b=1.0, n=3), dict(family="ball", r=float("nan")),
])
def test_make_domain_rejects(bad):
    fam = bad.pop("family")
    with pytest.raises(InvalidParams):
        make_domain(fam, **bad)


def test_config_round_trip():
    for d in DOMAINS:
        assert parse_domain_config(domain_config_text(d)) == d
    d = parse_domain_config("family=torus r=1 R=3")
    assert d.aspect_ratio == 3.0
    assert parse_domain_config("ball r=2", n=4).n == 4
    with pytest.raises(InvalidParams):
        parse_domain_config("family=ball q=1")


def test_volumes_and_areas():
    d = make_domain("torus", r=1.0, R=2.0)
    assert d.volume() == pytest.approx(2 * math.pi**2 * 2.0, rel=1e-14)
    assert d.surface_area() == pytest.approx(4 * math.pi**2 * 2.0, rel=1e-14)
    assert make_domain("ball", r=1.0, n=3).volume() == pytest.approx(4 * math.pi / 3, rel=1e-14)


# --- boundary geometry -----------------------------------------------------


def test_boundary_point_examples():
    bp = boundary_point(make_domain("ball", r=2.0, n=3), [0.3, 1.0])
    assert bp.principal_curvatures == pytest.approx((-0.5, -0.5))
    assert bp.mean_curvature == pytest.approx(-0.5)
    bp = boundary_point(make_domain("ellipse", a=2.0, b=1.0), [0.0])
    assert np.allclose(bp.position, [2.0, 0.0])
    assert bp.principal_curvatures[0] == pytest.approx(-2.0)
    bp = boundary_point(make_domain("annulus", r0=1.0, r1=2.0, n=2), [0.0, 0.4])
    assert bp.principal_curvatures[0] == pytest.approx(1.0)
    assert np.allclose(bp.normal, -bp.position)


def test_out_of_chart():
    with pytest.raises(OutOfChart):
        boundary_point(make_domain("ball", r=1.0, n=3), [4.0, 0.0])
    with pytest.raises(OutOfChart):
        boundary_point(make_domain("annulus", r0=1.0, r1=2.0, n=2), [0.5, 0.0])
    with pytest.raises(OutOfChart):
        boundary_point(make_domain("torus", r=1.0, R=2.0), [0.0])


@pytest.mark.parametrize("domain", DOMAINS, ids=lambda d: d.id)
def test_frame_unit_normals_and_curvature_bound(domain):
    rule = make_rule(domain)
    F = rule.boundary
    assert np.max(np.abs(np.linalg.norm(F.normals, axis=1) - 1)) < 1e-12
    # tangent directions orthonormal and orthogonal to N
    G = np.einsum("pki,pli->pkl", F.directions, F.directions)
    assert np.max(np.abs(G - np.eye(domain.n - 1))) < 1e-12
    assert np.max(np.abs(np.einsum("pki,pi->pk", F.directions, F.normals))) < 1e-12
    rho = reach_analytic(domain).value
    assert np.max(np.abs(F.curvatures)) <= 1 / rho + 1e-9


@pytest.mark.parametrize("domain", DOMAINS, ids=lambda d: d.id)
def test_shape_operator_finite_differences(domain):
    """dN(v) = -s(v): differentiate the normal along the chart and compare."""
    rng = np.random.default_rng(1)
    U = random_chart(domain, rng, 6)
    if domain.family in (Family.BALL, Family.ANNULUS) and domain.n > 2:
        lo = 1 if domain.family is Family.ANNULUS else 0
        U[:, lo:lo + domain.n - 2] = np.clip(U[:, lo:lo + domain.n - 2], 0.3, np.pi - 0.3)
    F = boundary_frame(domain, U)
    h = 1e-6
    first = 1 if domain.family is Family.ANNULUS else 0
    for j in range(first, U.shape[1]):
        E = np.zeros_like(U)
        E[:, j] = h
        Fp, Fm = boundary_frame(domain, U + E), boundary_frame(domain, U - E)
        dX = (Fp.points - Fm.points) / (2 * h)
        dN = (Fp.normals - Fm.normals) / (2 * h)
        S = F.shape_operators
        assert np.allclose(dN, -np.einsum("pij,pj->pi", S, dX), atol=1e-6)


# --- reach -----------------------------------------------------------------


def test_reach_analytic_examples():
    assert reach_analytic(make_domain("ball", r=3.0)).value == 3.0
    assert reach_analytic(make_domain("torus", r=1.0, R=2.0)).value == 1.0
    assert reach_analytic(make_domain("ellipse", a=2.0, b=1.0)).value == 0.5
    assert reach_analytic(make_domain("annulus", r0=1.0, r1=4.0)).value == 1.0
    assert reach_analytic(make_domain("annulus", r0=1.0, r1=2.0)).value == 0.5


@pytest.mark.parametrize("domain", [
    make_domain("ball", r=1.0, n=3), make_domain("torus", r=1.0, R=3.0),
    make_domain("torus", r=1.0, R=1.5), make_domain("ellipse", a=2.0, b=1.0),
    make_domain("annulus", r0=1.0, r1=2.0), make_domain("annulus", r0=0.5, r1=3.0),
], ids=lambda d: d.id)
def test_reach_numeric_matches(domain):
    est = reach_numeric(domain, 1e-3)
    assert est.method == "UniformBallBisection"
    assert abs(est.value - reach_analytic(domain).value) <= 2e-3


# --- distance and projection -----------------------------------------------


def test_signed_distance_examples():
    ball = make_domain("ball", r=1.0, n=3)
    assert signed_distance(ball, [0, 0, 0]) == pytest.approx(-1.0)
    assert signed_distance(ball, [2, 0, 0]) == pytest.approx(1.0)
    assert np.allclose(nearest_point(ball, [2, 0, 0]).position, [1, 0, 0])
    torus = make_domain("torus", r=1.0, R=2.0)
    assert signed_distance(torus, [0.0, 2.0, 0.0]) == pytest.approx(-1.0)
    with pytest.raises(NotUnique):
        nearest_point(ball, [0.0, 0.0, 0.0])
    with pytest.raises(NotUnique):
        nearest_point(torus, [0.0, 2.0, 0.0])
    with pytest.raises(NotUnique):
        nearest_point(make_domain("ellipse", a=2.0, b=1.0), [0.5, 0.0])


def test_torus_distance_against_dense_sampling():
    torus = make_domain("torus", r=1.0, R=2.0)
    ph, ps = np.meshgrid(np.linspace(0, 2 * np.pi, 400), np.linspace(0, 2 * np.pi, 400))
    S = boundary_frame(torus, np.stack([ph.ravel(), ps.ravel()], axis=1)).points
    rng = np.random.default_rng(3)
    X = rng.uniform(-3.5, 3.5, (20, 3))
    d = np.min(np.linalg.norm(X[:, None, :] - S[None], axis=2), axis=1)
    b = np.abs(signed_distance(torus, X))
    # sampled distances overestimate by at most O(spacing^2)
    assert np.all(d >= b - 1e-12)
    assert np.all(d - b <= 3e-3)


@pytest.mark.parametrize("domain", DOMAINS, ids=lambda d: d.id)
def test_projection_recovers_chart(domain):
    rng = np.random.default_rng(7)
    rho = reach_analytic(domain).value
    for u in random_chart(domain, rng, 25):
        t = rng.uniform(-0.9, 0.9) * rho
        x = tubular_map(domain, t, u)
        bp = nearest_point(domain, x)
        assert np.allclose(bp.position, boundary_point(domain, u).position, atol=1e-8)
        assert signed_distance(domain, x) == pytest.approx(t, abs=1e-9)


# --- tubular map -----------------------------------------------------------


def test_metric_determinant_examples():
    ball = make_domain("ball", r=1.0, n=3)
    assert metric_determinant(ball, 0.0, [1.0, 1.0]) == 1.0
    # outward t = 1/2 on the unit sphere: (1 + 1/2)^4
    assert metric_determinant(ball, 0.5, [1.0, 1.0]) == pytest.approx(5.0625)
    ell = make_domain("ellipse", a=2.0, b=1.0)
    # inward depth 0.4 at the major vertex: (1 + 0.4 * (-2))^2
    assert metric_determinant(ell, -0.4, [0.0]) == pytest.approx(0.04)
    with pytest.raises(OutOfTube):
        metric_determinant(ell, 0.5, [0.0])
    with pytest.raises(OutOfTube):
        tubular_map(ball, -1.0, [1.0, 1.0])


def _chart_volume_element(domain, t, u, h=1e-6):
    """sqrt det of the pulled-back metric of (u) -> Psi(t, u), by differences."""
    u = np.asarray(u, dtype=float)
    first = 1 if domain.family is Family.ANNULUS else 0
    cols = []
    for j in range(first, len(u)):
        e = np.zeros_like(u)
        e[j] = h
        cols.append((tubular_map(domain, t, u + e) - tubular_map(domain, t, u - e)) / (2 * h))
    D = np.array(cols)
    return np.linalg.det(D @ D.T)


@pytest.mark.parametrize("domain", DOMAINS, ids=lambda d: d.id)
def test_metric_determinant_vs_finite_differences(domain):
    rng = np.random.default_rng(11)
    rho = reach_analytic(domain).value
    for u in random_chart(domain, rng, 8):
        if domain.n > 2 and domain.family in (Family.BALL, Family.ANNULUS):
            lo = 1 if domain.family is Family.ANNULUS else 0
            u[lo:lo + domain.n - 2] = np.clip(u[lo:lo + domain.n - 2], 0.3, np.pi - 0.3)
        t = rng.uniform(-0.8, 0.8) * rho
        ratio = _chart_volume_element(domain, t, u) / _chart_volume_element(domain, 0.0, u)
        assert metric_determinant(domain, t, u) == pytest.approx(ratio, rel=1e-6)


def test_tubular_map_injective_on_grid():
    dom = make_domain("ellipse", a=2.0, b=1.0)
    rho = reach_analytic(dom).value
    ts = np.linspace(-0.9, 0.9, 9) * rho
    us = np.linspace(0, 2 * np.pi, 60, endpoint=False)
    P = np.array([tubular_map(dom, t, [u]) for t in ts for u in us])
    D = np.linalg.norm(P[:, None] - P[None], axis=2) + np.eye(len(P))
    assert D.min() > 1e-4


# --- extension field ---------------------------------------------------------


def test_collar_profile():
    psi, dpsi = collar_profile([0.0, 0.25, 0.5, 0.7], 0.5, 1.0)
    assert np.allclose(psi, [1.0, 0.5, 0.0, 0.0])
    assert np.allclose(dpsi, [-2.0, -2.0, 0.0, 0.0])


def test_extension_ball_example():
    ball = make_domain("ball", r=1.0, n=3)
    # psi' = -2 and the curvature sum -2 give |div X| = 4 at the boundary
    assert div_extension(ball, 0.5, 0.0, [1.0, 2.0]) == pytest.approx(4.0)
    assert div_extension_bound(ball, 0.5) == pytest.approx(4.0)
    assert div_extension(ball, 0.5, 0.6, [1.0, 2.0]) == 0.0
    t = 0.3
    expected = 2.0 + (1 - 2 * t) * 2 / (1 - t)
    assert div_extension(ball, 0.5, t, [1.0, 2.0]) == pytest.approx(expected)
    X = extension_field(ball, 0.5)
    bp = boundary_point(ball, [1.0, 2.0])
    assert np.allclose(X(bp.position), bp.normal)
    assert np.allclose(X(0.3 * bp.position), 0.0)


@pytest.mark.parametrize("domain", DOMAINS, ids=lambda d: d.id)
@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.9])
def test_extension_bounds(domain, alpha):
    rng = np.random.default_rng(5)
    rho = reach_analytic(domain).value
    m = 10_000
    U = random_chart(domain, rng, m)
    t = rng.uniform(0, 0.999 * rho, m)
    div = div_extension(domain, alpha, t, U)
    assert np.all(np.abs(div) <= div_extension_bound(domain, alpha) * (1 + 1e-12))
    X = extension_field(domain, alpha)
    F = boundary_frame(domain, U[:500])
    pts = F.points - t[:500, None] * F.normals
    assert np.all(np.linalg.norm(X(pts), axis=1) <= 1 + 1e-12)
    live = t[:500] < alpha * rho - 1e-9
    tr = np.trace(X.grad(pts), axis1=1, axis2=2)
    assert np.allclose(tr[live], div[:500][live], atol=1e-9)


@pytest.mark.parametrize("domain", DOMAINS[:8], ids=lambda d: d.id)
def test_extension_divergence_vs_finite_differences(domain):
    rng = np.random.default_rng(2)
    alpha = 0.5
    rho = reach_analytic(domain).value
    U = random_chart(domain, rng, 20)
    t = rng.uniform(0.02, 0.45, 20) * rho  # stay off the kinks of the tent
    F = boundary_frame(domain, U)
    pts = F.points - t[:, None] * F.normals
    X = extension_field(domain, alpha)
    fd = np.trace(finite_difference_jacobian(X, pts, 1e-7), axis1=1, axis2=2)
    assert np.allclose(fd, div_extension(domain, alpha, t, U), rtol=1e-5, atol=1e-5)
    assert np.allclose(finite_difference_jacobian(X, pts, 1e-7), X.grad(pts), atol=1e-5)


@settings(max_examples=30, deadline=None)
@given(r=st.floats(0.2, 5.0), R_over_r=st.floats(1.05, 6.0), s=st.floats(-0.95, 0.95),
       ph=st.floats(0, 2 * np.pi), ps=st.floats(0, 2 * np.pi))
def test_torus_tube_round_trip_property(r, R_over_r, s, ph, ps):
    dom = make_domain("torus", r=r, R=r * R_over_r)
    rho = reach_analytic(dom).value
    x = tubular_map(dom, s * rho, [ph, ps])
    assert signed_distance(dom, x) == pytest.approx(s * rho, abs=1e-9 * dom.length_scale)
    assert np.allclose(nearest_point(dom, x).position, boundary_point(dom, [ph, ps]).position,
                       atol=1e-8 * dom.length_scale)
