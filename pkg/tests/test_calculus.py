import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import ellipe

from gaffkorn.calculus import (
    BoundaryCondition,
    bc_residual,
    boundary_mean_term,
    boundary_shape_term,
    curl_matrix,
    divergence,
    norms,
    satisfies_bc,
    sym_grad,
)
from gaffkorn.domains import make_domain
from gaffkorn.errors import (
    AxisTooClose,
    InvalidParams,
    QuadratureUnderResolved,
    SingularPoint,
    SupportTouchesBoundary,
)
from gaffkorn.fields import (
    ScalarPoly,
    bump_supported_field,
    curl_bump_field,
    finite_difference_jacobian,
    gradient_field,
    parse_poly_spec,
    poly_field,
    position,
    resolve_field,
    rotation_xy,
    torus_gamma,
)
from gaffkorn.quadrature import make_rule

BALL3 = make_domain("ball", r=1.0, n=3)


def random_poly_field(rng, n, degree=3):
    comps = []
    for _ in range(n):
        coeffs = {}
        for _ in range(6):
            e = rng.integers(0, degree + 1, n)
            if e.sum() <= degree:
                coeffs[tuple(int(k) for k in e)] = float(rng.normal())
        comps.append(ScalarPoly(n, coeffs))
    return poly_field("random", comps)


# --- pointwise operators ---------------------------------------------------


def test_curl_examples():
    C = curl_matrix(rotation_xy(3), [0.3, -0.2, 0.5])
    assert np.allclose(C, -C.T)
    assert np.sum(C**2) == pytest.approx(4.0, abs=1e-14)
    C2 = curl_matrix(rotation_xy(2), [0.1, 0.7])
    assert np.allclose(np.abs(C2[[0, 1], [1, 0]]), math.sqrt(2))
    assert np.sum(C2**2) == pytest.approx(4.0, abs=1e-14)
    h = ScalarPoly(3, {(2, 1, 0): 1.0, (0, 0, 3): -2.0, (1, 1, 1): 0.5})
    assert np.allclose(curl_matrix(gradient_field("grad_h", h), [0.2, 0.4, -0.3]), 0.0, atol=1e-14)


def test_curl_sign_convention():
    # (curl B)_ij = (d_j B^i - d_i B^j)/sqrt(2); for B = (-y, x) entry (0, 1) is -sqrt(2)
    C = curl_matrix(rotation_xy(2), [0.0, 0.0])
    assert C[0, 1] == pytest.approx(-math.sqrt(2))


def test_sym_grad_and_div_examples():
    x = np.array([0.1, 0.2, -0.3, 0.4])
    assert np.allclose(sym_grad(position(4), x), np.eye(4))
    assert divergence(position(4), x) == pytest.approx(4.0)
    assert np.allclose(sym_grad(rotation_xy(4), x), 0.0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(2, 5))
def test_trace_identity(seed, n):
    rng = np.random.default_rng(seed)
    f = random_poly_field(rng, n)
    X = rng.uniform(-1, 1, (5, n))
    S = sym_grad(f, X)
    assert np.allclose(np.trace(S, axis1=1, axis2=2), divergence(f, X), atol=1e-14, rtol=0)
    assert np.allclose(S, np.swapaxes(S, 1, 2))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_curl_matches_classical_vector(seed):
    rng = np.random.default_rng(seed)
    f = random_poly_field(rng, 3)
    X = rng.uniform(-1, 1, (5, 3))
    J = f.grad(X)
    w = np.stack([J[:, 2, 1] - J[:, 1, 2], J[:, 0, 2] - J[:, 2, 0], J[:, 1, 0] - J[:, 0, 1]], axis=1)
    C = curl_matrix(f, X)
    assert np.allclose(np.sum(C**2, axis=(1, 2)), np.sum(w**2, axis=1), rtol=1e-12, atol=1e-12)


# --- jacobians versus finite differences ------------------------------------


REGISTRY_CASES = [
    ("rotation_xy", BALL3),
    ("position", BALL3),
    ("torus_gamma", make_domain("torus", r=1.0, R=2.0)),
    ("bump", BALL3),
    ("bump", make_domain("annulus", r0=1.0, r1=2.0)),
    ("elliptic_rotation", make_domain("ellipse", a=2.0, b=1.0)),
    ("level_gradient", make_domain("ellipse", a=2.0, b=1.0)),
    ("perp_of:rotation_xy", make_domain("ball", r=1.0, n=2)),
    ("perp_of:bump", make_domain("ball", r=1.0, n=2)),
    ("poly:x*y;z^2;x-y*z", BALL3),
]


@pytest.mark.parametrize("name,domain", REGISTRY_CASES, ids=lambda v: getattr(v, "id", v))
def test_registered_jacobians_match_finite_differences(name, domain):
    f = resolve_field(name, domain)
    rng = np.random.default_rng(7)
    X = make_rule(domain, 6).points
    X = X[rng.choice(len(X), 40, replace=False)]
    J = f.grad(X)
    Jfd = finite_difference_jacobian(f, X)
    scale = max(1.0, float(np.max(np.abs(J))))
    assert np.max(np.abs(J - Jfd)) <= 1e-6 * scale


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_bump_and_curl_bump_jacobians(seed):
    rng = np.random.default_rng(seed)
    c = rng.uniform(-0.2, 0.2, 3)
    f = bump_supported_field(BALL3, c, 0.5, rng.normal(size=3))
    g = curl_bump_field(BALL3, c, 0.5, axis=rng.normal(size=3))
    X = c + rng.uniform(-0.35, 0.35, (10, 3))
    for fld in (f, g):
        assert np.allclose(fld.grad(X), finite_difference_jacobian(fld, X), atol=1e-6)
    assert np.allclose(divergence(g, X), 0.0, atol=1e-12)


def test_field_registry_errors():
    with pytest.raises(InvalidParams):
        resolve_field("nope", BALL3)
    with pytest.raises(InvalidParams):
        parse_poly_spec("x;y", 3)
    with pytest.raises(InvalidParams):
        parse_poly_spec("sin(x);y;z", 3)
    with pytest.raises(AxisTooClose):
        resolve_field("torus_gamma", BALL3)
    with pytest.raises(SingularPoint):
        torus_gamma(3)([0.0, 0.0, 1.0])
    with pytest.raises(SupportTouchesBoundary):
        bump_supported_field(BALL3, np.zeros(3), 1.0)


def test_poly_spec_single_component_is_scalar():
    f = resolve_field("poly:x^2", BALL3)
    assert np.allclose(f([0.5, 1.0, 2.0]), [0.25, 0.0, 0.0])


# --- quadrature --------------------------------------------------------------


def _closed_volumes():
    return [
        (make_domain("ball", r=1.5, n=2), math.pi * 2.25, 2 * math.pi * 1.5),
        (make_domain("ball", r=1.0, n=3), 4 * math.pi / 3, 4 * math.pi),
        (make_domain("ball", r=1.0, n=4), math.pi**2 / 2, 2 * math.pi**2),
        (make_domain("annulus", r0=1.0, r1=2.0, n=2), 3 * math.pi, 6 * math.pi),
        (make_domain("annulus", r0=0.5, r1=1.0, n=3), 4 * math.pi / 3 * 0.875, 4 * math.pi * 1.25),
        (make_domain("torus", r=1.0, R=2.0), 2 * math.pi**2 * 2.0, 4 * math.pi**2 * 2.0),
        (make_domain("ellipse", a=2.0, b=1.0), 2 * math.pi, 4 * 2.0 * ellipe(1 - 0.25)),
    ]


@pytest.mark.parametrize("domain,vol,area", _closed_volumes(), ids=lambda v: getattr(v, "id", ""))
def test_quadrature_reproduces_volume_and_area(domain, vol, area):
    rule = make_rule(domain)
    assert np.all(rule.weights > 0) and np.all(rule.boundary_weights > 0)
    assert rule.weights.sum() == pytest.approx(vol, rel=1e-10)
    assert rule.boundary_weights.sum() == pytest.approx(area, rel=1e-10)


def test_boundary_nodes_iterate_points():
    rule = make_rule(make_domain("ball", r=1.0, n=2), 4)
    nodes = list(rule.boundary_nodes())
    assert len(nodes) == rule.size[1]
    bp, w = nodes[0]
    assert np.linalg.norm(bp.position) == pytest.approx(1.0)
    assert w > 0


# --- norms ----------------------------------------------------------------------


def test_norm_examples_rotation_on_ball():
    nm = norms(rotation_xy(3), BALL3, check_resolution=True)
    assert nm.B_L2 == pytest.approx(8 * math.pi / 15, rel=1e-12)
    assert nm.grad_B_L2 == pytest.approx(8 * math.pi / 3, rel=1e-12)
    assert nm.curl_B_L2 == pytest.approx(4 * 4 * math.pi / 3, rel=1e-12)
    assert nm.sym_grad_B_L2 == pytest.approx(0.0, abs=1e-13)
    assert nm.div_B_L2 == pytest.approx(0.0, abs=1e-13)


def test_constant_field_norms():
    dom = make_domain("annulus", r0=1.0, r1=2.0, n=3)
    f = resolve_field("poly:2;-1;0.5", dom)
    nm = norms(f, dom)
    assert nm.grad_B_L2 == 0.0
    assert nm.B_L2 == pytest.approx(dom.volume() * 5.25, rel=1e-12)


def test_norms_nonnegative_and_json():
    nm = norms(position(3), BALL3)
    d = nm.as_dict()
    assert set(d) == {"B_L2", "grad_B_L2", "curl_B_L2", "div_B_L2", "sym_grad_B_L2", "B_L2_boundary"}
    assert all(v >= 0 for v in d.values())
    assert '"B_L2"' in nm.to_json()


def test_quadrature_under_resolved():
    f = resolve_field("poly:x^12;y^12;z^12", BALL3)
    with pytest.raises(QuadratureUnderResolved):
        norms(f, BALL3, make_rule(BALL3, 3), check_resolution=True)


def test_norm_doubling_gate_for_registered_fields():
    for name, dom in REGISTRY_CASES:
        norms(resolve_field(name, dom), dom, check_resolution=True)


# --- boundary terms and boundary conditions --------------------------------------


def test_boundary_term_examples():
    assert boundary_shape_term(rotation_xy(3), BALL3) == pytest.approx(-8 * math.pi / 3, rel=1e-12)
    assert boundary_mean_term(position(3), BALL3) == pytest.approx(-8 * math.pi, rel=1e-12)
    bump = bump_supported_field(BALL3, np.zeros(3), 0.5)
    assert boundary_shape_term(bump, BALL3) == 0.0
    assert boundary_mean_term(bump, BALL3) == 0.0


def test_shape_term_uses_tangential_part():
    # the normal field x has no tangential part
    assert boundary_shape_term(position(3), BALL3) == pytest.approx(0.0, abs=1e-13)


def test_bc_residual_examples():
    torus = make_domain("torus", r=1.0, R=2.0)
    annulus = make_domain("annulus", r0=1.0, r1=2.0)
    for dom in (BALL3, torus, annulus):
        assert bc_residual(rotation_xy(dom.n), dom, None, "tangent") < 1e-13
    assert bc_residual(position(3), BALL3, None, BoundaryCondition.NORMAL) < 1e-13
    ball2 = make_domain("ball", r=2.5, n=3)
    assert bc_residual(position(3), ball2, None, "tangent") == pytest.approx(2.5)
    assert satisfies_bc(rotation_xy(3), BALL3, None, "t")
    assert not satisfies_bc(position(3), BALL3, None, "t")


def test_boundary_condition_parse():
    assert BoundaryCondition.parse("Normal") is BoundaryCondition.NORMAL
    with pytest.raises(ValueError):
        BoundaryCondition.parse("sideways")


# --- interior identities for compactly supported fields ----------------------------


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_bump_interior_identities(seed):
    rng = np.random.default_rng(seed)
    c = rng.uniform(-0.25, 0.25, 3)
    f = bump_supported_field(BALL3, c, 0.5, rng.normal(size=3))
    nm = norms(f, BALL3)
    scale = nm.grad_B_L2
    assert abs(nm.grad_B_L2 - nm.curl_B_L2 - nm.div_B_L2) <= 1e-10 * scale
    assert abs(nm.grad_B_L2 - 2 * nm.sym_grad_B_L2 + nm.div_B_L2) <= 1e-10 * scale


def test_curl_bump_is_divergence_free_in_norm():
    f = curl_bump_field(BALL3, np.array([0.1, 0.0, -0.1]), 0.6)
    nm = norms(f, BALL3)
    assert nm.div_B_L2 <= 1e-20 * nm.grad_B_L2 + 1e-28
    assert nm.grad_B_L2 == pytest.approx(2 * nm.sym_grad_B_L2, rel=1e-10)
