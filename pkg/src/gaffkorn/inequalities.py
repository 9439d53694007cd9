"""Dimensional constants, integral identities, the trace inequality and the
homogeneous Gaffney/Korn quotients as executable checks."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .calculus import (
    BoundaryCondition,
    Norms,
    bc_residual,
    boundary_mean_term,
    boundary_shape_term,
    norms,
    satisfies_bc,
)
from .domains import Domain, reach_analytic, reach_numeric
from .errors import BCViolated, DomainNotConvex, InvalidDimension, ZeroField
from .fields import VectorField
from .quadrature import QuadratureRule, make_rule

SLACK_RTOL = 1e-8


def _check_n(n) -> int:
    if int(n) != n or n < 2:
        raise InvalidDimension(f"dimension must be an integer >= 2, got {n}")
    return int(n)


def constant_c1(n: int) -> float:
    """1 + (1 + sqrt(1 + n))^2 = n + 3 + 2 sqrt(1 + n)."""
    n = _check_n(n)
    return 1.0 + (1.0 + math.sqrt(1.0 + n)) ** 2


def constant_c2(n: int) -> float:
    """1 + (n - 1 + sqrt(n - 1) sqrt(2n - 1))^2."""
    n = _check_n(n)
    return 1.0 + (n - 1 + math.sqrt(n - 1) * math.sqrt(2 * n - 1)) ** 2


def theorem_constant(bc, n: int) -> float:
    bc = BoundaryCondition.parse(bc)
    return constant_c1(n) if bc is BoundaryCondition.TANGENT else constant_c2(n)


@dataclass(frozen=True)
class EpsilonChoice:
    c_n: float
    epsilon: float
    amplification: float

    def identity_residual(self, n: int) -> float:
        """Relative gap between (c/(1 - c eps))(n + 1/eps) and the amplification."""
        c, e = self.c_n, self.epsilon
        lhs = c / (1.0 - c * e) * (n + 1.0 / e)
        return abs(lhs - self.amplification) / self.amplification


def optimal_epsilon(bc, n: int) -> EpsilonChoice:
    """The epsilon balancing the trace inequality against the curvature bound:
    eps = 1 / (c + sqrt(c) sqrt(c + n)) with c = 1 (tangent) or n - 1 (normal)."""
    n = _check_n(n)
    bc = BoundaryCondition.parse(bc)
    c = 1.0 if bc is BoundaryCondition.TANGENT else float(n - 1)
    root = c + math.sqrt(c) * math.sqrt(c + n)
    return EpsilonChoice(c, 1.0 / root, root * root)


def corollary_transfer(constant: float, rho: float) -> float:
    """Bound on the classical (non-homogeneous) constant: C max(rho^2, rho^-2)."""
    if not rho > 0:
        raise ValueError("reach must be positive")
    return constant * max(rho * rho, 1.0 / (rho * rho))


# ---------------------------------------------------------------------------
# integral identities


def _require_bc(field, domain, rule, bc):
    if not satisfies_bc(field, domain, rule, bc):
        res = bc_residual(field, domain, rule, bc)
        raise BCViolated(f"{field.name} violates the {bc.value} condition (residual {res:.3e})")


def boundary_term(field, domain, rule, bc) -> float:
    bc = BoundaryCondition.parse(bc)
    if bc is BoundaryCondition.TANGENT:
        return boundary_shape_term(field, domain, rule)
    return boundary_mean_term(field, domain, rule)


def _identity_parts(field, domain, rule, bc, nrm=None, bterm=None):
    bc = BoundaryCondition.parse(bc)
    rule = rule if rule is not None else make_rule(domain)
    _require_bc(field, domain, rule, bc)
    nrm = nrm if nrm is not None else norms(field, domain, rule)
    bterm = bterm if bterm is not None else boundary_term(field, domain, rule, bc)
    return nrm, bterm


def _scale(*vals) -> float:
    return max(max(abs(v) for v in vals), np.finfo(float).tiny)


def gaffney_identity_residual(field: VectorField, domain: Domain, rule: QuadratureRule | None, bc,
                              relative: bool = False, *, _norms=None, _bterm=None) -> float:
    """|grad|^2 - (|curl|^2 + |div|^2 + boundary term) with the shape-operator
    term for tangent fields and the mean-curvature term for normal fields."""
    nrm, bt = _identity_parts(field, domain, rule, bc, _norms, _bterm)
    lhs = nrm.grad_B_L2
    rhs = nrm.curl_B_L2 + nrm.div_B_L2 + bt
    res = abs(lhs - rhs)
    return res / _scale(lhs, nrm.curl_B_L2 + nrm.div_B_L2, bt) if relative else res


def korn_identity_residual(field: VectorField, domain: Domain, rule: QuadratureRule | None, bc,
                           relative: bool = False, *, _norms=None, _bterm=None) -> float:
    """|grad|^2 - (2|Sym grad|^2 - |div|^2 - boundary term)."""
    nrm, bt = _identity_parts(field, domain, rule, bc, _norms, _bterm)
    lhs = nrm.grad_B_L2
    rhs = 2.0 * nrm.sym_grad_B_L2 - nrm.div_B_L2 - bt
    res = abs(lhs - rhs)
    return res / _scale(lhs, 2.0 * nrm.sym_grad_B_L2, nrm.div_B_L2, bt) if relative else res


# ---------------------------------------------------------------------------
# trace inequality


def trace_inequality(field_or_norms, domain: Domain, rule: QuadratureRule | None, epsilon: float,
                     rho: float | None = None) -> tuple[float, float]:
    """(|B|^2_{L2(bdry)}, eps rho |grad B|^2 + (n + 1/eps)/rho |B|^2)."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    nrm = field_or_norms if isinstance(field_or_norms, Norms) else norms(field_or_norms, domain, rule)
    rho = rho if rho is not None else reach_analytic(domain).value
    lhs = nrm.B_L2_boundary
    rhs = epsilon * rho * nrm.grad_B_L2 + (domain.n + 1.0 / epsilon) / rho * nrm.B_L2
    return lhs, rhs


def trace_slack(field_or_norms, domain: Domain, rule: QuadratureRule | None, epsilon: float,
                rho: float | None = None) -> float:
    lhs, rhs = trace_inequality(field_or_norms, domain, rule, epsilon, rho)
    return rhs - lhs


# ---------------------------------------------------------------------------
# homogeneous quotients


CSV_COLUMNS = ("domain", "field", "bc", "rho", "q_gaffney", "q_korn", "C_bound",
               "slack_g", "slack_k", "res_gaffney_id", "res_korn_id")


def fmt(x) -> str:
    """Stable text form for artifacts (12 significant digits)."""
    if isinstance(x, float):
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return format(x, ".12g")
    return str(x)


def _round(x):
    return float(fmt(x)) if isinstance(x, float) and math.isfinite(x) else x


@dataclass(frozen=True)
class QuotientReport:
    domain: str
    field: str
    bc: str
    rho: float
    rho_method: str
    norms: Norms
    boundary_term: float
    quotient_gaffney: float
    quotient_korn: float
    constant_bound: float
    slack_gaffney: float
    slack_korn: float
    identity_residuals: tuple  # relative (gaffney, korn)

    @property
    def passed(self) -> bool:
        tol = SLACK_RTOL * self.constant_bound
        return (self.slack_gaffney >= -tol and self.slack_korn >= -tol
                and max(self.identity_residuals) <= 1e-7)

    def as_dict(self) -> dict:
        return {
            "domain": self.domain,
            "field": self.field,
            "bc": self.bc,
            "rho": _round(self.rho),
            "rho_method": self.rho_method,
            "norms": {k: _round(v) for k, v in self.norms.as_dict().items()},
            "boundary_term": _round(self.boundary_term),
            "quotient_gaffney": _round(self.quotient_gaffney),
            "quotient_korn": _round(self.quotient_korn),
            "constant_bound": _round(self.constant_bound),
            "slack_gaffney": _round(self.slack_gaffney),
            "slack_korn": _round(self.slack_korn),
            "identity_residuals": [_round(v) for v in self.identity_residuals],
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)

    def csv_row(self) -> list[str]:
        return [self.domain, self.field, self.bc, fmt(self.rho), fmt(self.quotient_gaffney),
                fmt(self.quotient_korn), fmt(self.constant_bound), fmt(self.slack_gaffney),
                fmt(self.slack_korn), fmt(self.identity_residuals[0]), fmt(self.identity_residuals[1])]


def summary_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()


def homogeneous_quotients(field: VectorField, domain: Domain, rule: QuadratureRule | None, bc,
                          rho: float | None = None) -> QuotientReport:
    """Evaluate both homogeneous quotients of a boundary-condition-respecting field.

    gaffney = (|B|^2/rho^2 + |grad B|^2) / (|B|^2/rho^2 + |curl B|^2 + |div B|^2)
    korn    = (|B|^2/rho^2 + |grad B|^2) / (|B|^2/rho^2 + |Sym grad B|^2)
    """
    bc = BoundaryCondition.parse(bc)
    rule = rule if rule is not None else make_rule(domain)
    _require_bc(field, domain, rule, bc)
    if rho is None:
        try:
            est = reach_analytic(domain)
        except NotImplementedError:  # pragma: no cover - every family has a closed form
            est = reach_numeric(domain)
        rho, method = est.value, est.method
    else:
        method = "Given"
    nrm = norms(field, domain, rule)
    if not nrm.B_L2 > 0:
        raise ZeroField(f"{field.name} vanishes on {domain.id}")
    bt = boundary_term(field, domain, rule, bc)
    mass = nrm.B_L2 / rho**2
    num = mass + nrm.grad_B_L2
    qg = num / (mass + nrm.curl_B_L2 + nrm.div_B_L2)
    qk = num / (mass + nrm.sym_grad_B_L2)
    C = theorem_constant(bc, domain.n)
    res = (
        gaffney_identity_residual(field, domain, rule, bc, True, _norms=nrm, _bterm=bt),
        korn_identity_residual(field, domain, rule, bc, True, _norms=nrm, _bterm=bt),
    )
    return QuotientReport(domain.id, field.name, bc.value, float(rho), method, nrm, bt,
                          qg, qk, C, C - qg, C - qk, res)


def convexity_special_case(field: VectorField, domain: Domain, rule: QuadratureRule | None, bc) -> float:
    """(|curl|^2 + |div|^2) - |grad|^2, nonnegative for tangent fields on convex
    domains and for normal fields on mean-convex domains."""
    bc = BoundaryCondition.parse(bc)
    rule = rule if rule is not None else make_rule(domain)
    K = rule.boundary.curvatures
    tol = 1e-12 / reach_analytic(domain).value
    if bc is BoundaryCondition.TANGENT:
        if not (domain.is_convex and np.max(K) <= tol):
            raise DomainNotConvex(f"{domain.id} is not convex")
    elif np.max(K.mean(axis=1)) > tol:
        raise DomainNotConvex(f"{domain.id} is not mean-convex")
    _require_bc(field, domain, rule, bc)
    nrm = norms(field, domain, rule)
    return nrm.curl_B_L2 + nrm.div_B_L2 - nrm.grad_B_L2


# ---------------------------------------------------------------------------
# registry of checked triples


CONCRETE_FIELDS = ("rotation_xy", "position", "torus_gamma", "bump", "elliptic_rotation",
                   "level_gradient", "perp_of:rotation_xy", "perp_of:position", "perp_of:bump",
                   "perp_of:elliptic_rotation", "poly:-y*(1-x^2-y^2);x*(1-x^2-y^2)")


def canonical_domains() -> list[Domain]:
    from .domains import make_domain

    return [
        make_domain("ball", r=1.0, n=2),
        make_domain("ball", r=1.0, n=3),
        make_domain("annulus", r0=1.0, r1=2.0, n=2),
        make_domain("ellipse", a=2.0, b=1.0),
        make_domain("torus", r=1.0, R=2.0),
    ]


def registered_triples(domains=None, names=CONCRETE_FIELDS):
    """(domain, field, bc) for every registered field that exists on the
    domain and satisfies the boundary condition there."""
    from .errors import GaffKornError
    from .fields import resolve_field

    out = []
    for dom in domains if domains is not None else canonical_domains():
        rule = make_rule(dom)
        for name in names:
            try:
                f = resolve_field(name, dom)
                f.validate_on(dom)
            except GaffKornError:
                continue
            for bc in BoundaryCondition:
                if satisfies_bc(f, dom, rule, bc):
                    out.append((dom, f, bc))
    return out
