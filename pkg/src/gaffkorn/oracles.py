"""Closed-form example fields and values with independent derivations.

Each OracleCase pairs closed-form scalars with a quadrature evaluation of the
same quantities.  The torus closed forms come from reducing the volume
integrals to the meridian disk D = {|(s, z) - (R, 0)| < r}:

    |Gamma|^2 = 1/s^2 and dV = s ds dz dphi, so
    ||Gamma||^2      = 2 pi  int_D s^-1 dA   = 4 pi^2 (R - sqrt(R^2 - r^2))
    ||grad Gamma||^2 = 2 pi  int_D 2 s^-3 dA = 4 pi^2 r^2 / (R^2 - r^2)^(3/2)

(both disk integrals follow from expanding in polar coordinates about the disk
centre and summing the binomial series).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .calculus import BoundaryCondition, norms
from .domains import Domain, make_domain, unit_ball_volume
from .errors import InvalidAspect, InvalidDimension, InvalidParams
from .fields import (
    VectorField,
    bump_supported_field,
    curl_bump_field,
    perp_rotate,
    rotation_xy,
)
from .fields import torus_gamma as _gamma_field
from .inequalities import homogeneous_quotients
from .quadrature import make_rule

__all__ = [
    "PUBLISHED_TORUS_A2",
    "ClosedForm",
    "OracleCase",
    "OracleCheck",
    "argmax_sweep",
    "ball_killing_case",
    "bump_supported_field",
    "case_names",
    "get_case",
    "perp_rotate",
    "run_case",
    "torus_gamma",
    "torus_gamma_norms",
    "torus_lower_bound",
    "torus_lower_bound_quadrature",
]

# value printed for the a = 2 torus; kept as a check that is expected to differ
PUBLISHED_TORUS_A2 = 1.0 + (1.0 - 2.0 / 3.0**1.5) / (6.0 * (2.0 - math.sqrt(3.0)))


def torus_gamma(r: float, R: float) -> VectorField:
    """Gamma = (-y, x, 0)/(x^2 + y^2), validated against the (r, R) torus."""
    dom = make_domain("torus", r=r, R=R)
    f = _gamma_field(3)
    f.validate_on(dom)
    return f


def torus_gamma_norms(r: float, R: float) -> tuple[float, float]:
    """Closed-form (||Gamma||^2, ||grad Gamma||^2) on the solid torus."""
    if not 0 < r < R:
        raise InvalidParams("need 0 < r < R")
    root = math.sqrt((R - r) * (R + r))
    # R - sqrt(R^2 - r^2) written without cancellation
    mass = 4.0 * math.pi**2 * r * r / (R + root)
    grad = 4.0 * math.pi**2 * r * r / root**3
    return mass, grad


def torus_lower_bound(a: float) -> float:
    """Gaffney-tangent homogeneous quotient of Gamma on the torus of aspect ratio a."""
    a = float(a)
    if not a > 1.0 or not math.isfinite(a):
        raise InvalidAspect(f"aspect ratio must exceed 1, got {a}")
    rho = min(1.0, a - 1.0)
    mass, grad = torus_gamma_norms(1.0, a)
    return 1.0 + rho * rho * grad / mass


def torus_lower_bound_quadrature(a: float, order: int | None = None) -> float:
    dom = make_domain("torus", r=1.0, R=float(a))
    rep = homogeneous_quotients(_gamma_field(3), dom, make_rule(dom, order), BoundaryCondition.TANGENT)
    return rep.quotient_gaffney


def argmax_sweep(a_grid) -> tuple[float, float]:
    """(a*, value) maximizing the closed-form torus bound over the grid."""
    grid = np.asarray(list(a_grid), dtype=float)
    vals = np.array([torus_lower_bound(a) for a in grid])
    k = int(np.argmax(vals))
    return float(grid[k]), float(vals[k])


# ---------------------------------------------------------------------------
# oracle cases


@dataclass(frozen=True)
class ClosedForm:
    value: float
    provenance: str
    tol: float | None = None


@dataclass(frozen=True)
class OracleCheck:
    name: str
    expected: float
    computed: float
    tol: float
    provenance: str

    @property
    def error(self) -> float:
        return abs(self.computed - self.expected) / max(abs(self.expected), 1e-300)

    @property
    def passed(self) -> bool:
        return self.error <= self.tol

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name}: closed_form={self.expected:.12g} "
                f"computed={self.computed:.12g} rel_err={self.error:.3e} tol={self.tol:.1e} "
                f"[{self.provenance}]")


@dataclass(frozen=True)
class OracleCase:
    name: str
    domain: Domain
    field_name: str
    bc: BoundaryCondition
    closed_form_values: Mapping[str, ClosedForm]
    evaluate: Callable[[], Mapping[str, float]] = field(repr=False, compare=False)
    tolerance: float = 1e-9


def run_case(case: OracleCase) -> list[OracleCheck]:
    computed = case.evaluate()
    out = []
    for key, cf in case.closed_form_values.items():
        tol = cf.tol if cf.tol is not None else case.tolerance
        out.append(OracleCheck(key, cf.value, float(computed[key]), tol, cf.provenance))
    return out


def ball_killing_case(n: int, r: float, order: int | None = None) -> OracleCase:
    """Rotation Y = (-x2, x1, 0, ...) on the ball B_r in R^n."""
    if int(n) != n or n < 2:
        raise InvalidDimension("n must be an integer >= 2")
    if not r > 0:
        raise InvalidParams("radius must be positive")
    dom = make_domain("ball", r=r, n=n)
    vol1 = unit_ball_volume(n)
    values = {
        "B_L2": ClosedForm(2 * r ** (n + 2) * vol1 / (n + 2), "closed form 2 r^(n+2)|B_1|/(n+2)"),
        "grad_B_L2": ClosedForm(2 * r**n * vol1, "closed form 2|B_r|"),
        "sym_grad_B_L2": ClosedForm(0.0, "Killing field", tol=0.0),
        "reach_grad_ratio": ClosedForm(float(n + 2), "rho^2 |grad Y|^2/|Y|^2 = n + 2", tol=1e-8),
        "korn_quotient": ClosedForm(float(n + 3), "Korn tangent quotient n + 3", tol=1e-8),
    }

    def evaluate():
        f = rotation_xy(n)
        rule = make_rule(dom, order)
        rep = homogeneous_quotients(f, dom, rule, BoundaryCondition.TANGENT)
        nm = rep.norms
        return {
            "B_L2": nm.B_L2,
            "grad_B_L2": nm.grad_B_L2,
            "sym_grad_B_L2": nm.sym_grad_B_L2,
            "reach_grad_ratio": rep.rho**2 * nm.grad_B_L2 / nm.B_L2,
            "korn_quotient": rep.quotient_korn,
        }

    return OracleCase(f"ball_killing_n{n}", dom, "rotation_xy", BoundaryCondition.TANGENT,
                      values, evaluate)


def torus_case(a: float = 2.0, order: int | None = None) -> OracleCase:
    dom = make_domain("torus", r=1.0, R=float(a))
    mass, grad = torus_gamma_norms(1.0, float(a))
    values = {
        "B_L2": ClosedForm(mass, "meridian-disk closed form"),
        "grad_B_L2": ClosedForm(grad, "meridian-disk closed form"),
        "curl_B_L2": ClosedForm(0.0, "harmonic field", tol=0.0),
        "div_B_L2": ClosedForm(0.0, "harmonic field", tol=0.0),
        "gaffney_quotient": ClosedForm(torus_lower_bound(a), "meridian-disk closed form"),
    }
    if a == 2.0:
        values["gaffney_quotient_published"] = ClosedForm(
            PUBLISHED_TORUS_A2, "published value 1 + (1 - 2/3^1.5)/(6(2 - sqrt 3))", tol=1e-4)

    def evaluate():
        rule = make_rule(dom, order)
        rep = homogeneous_quotients(_gamma_field(3), dom, rule, BoundaryCondition.TANGENT)
        nm = rep.norms
        out = {k: getattr(nm, k) for k in ("B_L2", "grad_B_L2", "curl_B_L2", "div_B_L2")}
        out["gaffney_quotient"] = out["gaffney_quotient_published"] = rep.quotient_gaffney
        return out

    tag = f"{a:g}".replace(".", "p")
    return OracleCase(f"torus_gamma_a{tag}", dom, "torus_gamma", BoundaryCondition.TANGENT,
                      values, evaluate)


def torus_argmax_case(step: float = 0.01) -> OracleCase:
    dom = make_domain("torus", r=1.0, R=2.0)
    grid = np.round(np.arange(1.1, 3.0 + step / 2, step), 10)

    def evaluate():
        a_star, _ = argmax_sweep(grid)
        return {"argmax_aspect": a_star}

    return OracleCase("torus_argmax", dom, "torus_gamma", BoundaryCondition.TANGENT,
                      {"argmax_aspect": ClosedForm(2.0, "maximum at aspect ratio 2", tol=step / 2)},
                      evaluate)


def bump_case(n: int = 3) -> OracleCase:
    dom = make_domain("ball", r=1.0, n=n)

    def evaluate():
        f = bump_supported_field(dom, np.full(n, 0.1), 0.5)
        rep = homogeneous_quotients(f, dom, make_rule(dom), BoundaryCondition.TANGENT)
        return {"gaffney_quotient": rep.quotient_gaffney}

    return OracleCase(f"bump_interior_n{n}", dom, "bump", BoundaryCondition.TANGENT,
                      {"gaffney_quotient": ClosedForm(1.0, "interior identity for compact support")},
                      evaluate)


def curl_bump_case() -> OracleCase:
    dom = make_domain("ball", r=1.0, n=3)

    def evaluate():
        f = curl_bump_field(dom, np.array([0.1, -0.05, 0.0]), 0.6, axis=(0.3, 0.4, 1.0))
        nm = norms(f, dom, make_rule(dom))
        return {"grad_over_sym": nm.grad_B_L2 / nm.sym_grad_B_L2}

    return OracleCase("curl_bump_n3", dom, "curl_bump", BoundaryCondition.TANGENT,
                      {"grad_over_sym": ClosedForm(2.0, "divergence-free compact support", tol=1e-7)},
                      evaluate)


def disk_perp_case() -> OracleCase:
    dom = make_domain("ball", r=1.0, n=2)

    def evaluate():
        rule = make_rule(dom)
        y = rotation_xy(2)
        g = homogeneous_quotients(y, dom, rule, BoundaryCondition.TANGENT).quotient_gaffney
        p = homogeneous_quotients(perp_rotate(y), dom, rule, BoundaryCondition.NORMAL).quotient_gaffney
        return {"perp_gaffney_quotient": p, "gaffney_quotient": g}

    # Y on the unit disk: |Y|^2 = pi/2, |grad Y|^2 = 2 pi, |curl Y|^2 = 4 pi
    q = (math.pi / 2 + 2 * math.pi) / (math.pi / 2 + 4 * math.pi)
    return OracleCase("disk_perp", dom, "rotation_xy", BoundaryCondition.TANGENT,
                      {"gaffney_quotient": ClosedForm(q, "closed-form disk norms"),
                       "perp_gaffney_quotient": ClosedForm(q, "curl/div swap under perp")},
                      evaluate)


_REGISTRY: dict[str, Callable[[], OracleCase]] = {
    "torus_gamma_a2": lambda: torus_case(2.0),
    "torus_gamma_a1p5": lambda: torus_case(1.5),
    "torus_gamma_a3": lambda: torus_case(3.0),
    "torus_argmax": torus_argmax_case,
    "bump_interior_n3": bump_case,
    "curl_bump_n3": curl_bump_case,
    "disk_perp": disk_perp_case,
    **{f"ball_killing_n{k}": (lambda k=k: ball_killing_case(k, 1.0)) for k in range(2, 7)},
}


def case_names() -> list[str]:
    return sorted(_REGISTRY)


def get_case(name: str) -> OracleCase:
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise InvalidParams(f"unknown oracle case {name!r}; known: {', '.join(case_names())}") from None
