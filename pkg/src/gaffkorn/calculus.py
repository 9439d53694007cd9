"""Differential operators, L^2 norms and the boundary curvature terms."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from .domains import Domain
from .errors import QuadratureUnderResolved, SupportTouchesBoundary
from .fields import VectorField
from .quadrature import QuadratureRule, ball_rule, make_rule

SQRT2 = math.sqrt(2.0)
BC_TOL = 1e-10


class BoundaryCondition(str, Enum):
    TANGENT = "tangent"
    NORMAL = "normal"

    @classmethod
    def parse(cls, value) -> "BoundaryCondition":
        if isinstance(value, cls):
            return value
        v = str(value).strip().lower()
        aliases = {"t": cls.TANGENT, "tangent": cls.TANGENT, "parallel": cls.TANGENT,
                   "n": cls.NORMAL, "normal": cls.NORMAL, "perpendicular": cls.NORMAL}
        if v not in aliases:
            raise ValueError(f"unknown boundary condition {value!r}")
        return aliases[v]


# ---------------------------------------------------------------------------
# pointwise operators


def curl_matrix(field: VectorField, x) -> np.ndarray:
    """(curl B)_ij = (d_j B^i - d_i B^j) / sqrt(2)."""
    J = field.grad(x)
    return (J - np.swapaxes(J, -1, -2)) / SQRT2


def sym_grad(field: VectorField, x) -> np.ndarray:
    J = field.grad(x)
    return 0.5 * (J + np.swapaxes(J, -1, -2))


def divergence(field: VectorField, x):
    return np.trace(field.grad(x), axis1=-2, axis2=-1)


# ---------------------------------------------------------------------------
# integrated quantities


NORM_NAMES = ("B_L2", "grad_B_L2", "curl_B_L2", "div_B_L2", "sym_grad_B_L2", "B_L2_boundary")


@dataclass(frozen=True)
class Norms:
    """Squared L^2 norms of B and its derivatives over the domain, plus the
    squared boundary trace norm."""

    B_L2: float
    grad_B_L2: float
    curl_B_L2: float
    div_B_L2: float
    sym_grad_B_L2: float
    B_L2_boundary: float

    def as_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=False)


def _volume_nodes(field: VectorField, rule: QuadratureRule):
    if field.support is None:
        return rule.points, rule.weights
    c, rad = field.support
    from .domains import signed_distance

    if not signed_distance(rule.domain, c) < -rad:
        raise SupportTouchesBoundary("field support reaches the boundary")
    # piecewise polynomial fields are integrated on their own support ball
    return ball_rule(c, rad, rule.domain.n, rule.order)


def _volume_densities(J: np.ndarray, V: np.ndarray):
    Jt = np.swapaxes(J, -1, -2)
    grad = np.einsum("pij,pij->p", J, J)
    curl = 0.5 * np.einsum("pij,pij->p", J - Jt, J - Jt)
    div = np.trace(J, axis1=1, axis2=2) ** 2
    S = 0.5 * (J + Jt)
    sym = np.einsum("pij,pij->p", S, S)
    val = np.einsum("pi,pi->p", V, V)
    return val, grad, curl, div, sym


def _wsum(w, f) -> float:
    # numpy's pairwise summation keeps the reduction order fixed
    return float(np.sum(w * f))


def _boundary_values(field: VectorField, rule: QuadratureRule) -> np.ndarray:
    if field.support is not None:
        return np.zeros_like(rule.boundary.points)
    return field(rule.boundary.points)


def norms(field: VectorField, domain: Domain, rule: QuadratureRule | None = None,
          check_resolution: bool = False, rtol: float = 1e-8) -> Norms:
    """All six squared norms by quadrature.

    With check_resolution the computation is repeated at twice the order and
    QuadratureUnderResolved is raised if any value moves by more than rtol
    (relative to the largest of the six).
    """
    field.validate_on(domain)
    rule = rule if rule is not None else make_rule(domain)
    if rule.domain != domain:
        raise ValueError("quadrature rule belongs to a different domain")
    pts, w = _volume_nodes(field, rule)
    V = field(pts)
    J = field.grad(pts)
    val, grad, curl, div, sym = _volume_densities(J, V)
    Vb = _boundary_values(field, rule)
    out = Norms(
        _wsum(w, val), _wsum(w, grad), _wsum(w, curl), _wsum(w, div), _wsum(w, sym),
        _wsum(rule.boundary_weights, np.einsum("pi,pi->p", Vb, Vb)),
    )
    if check_resolution:
        fine = norms(field, domain, rule.refined(2))
        a, b = np.array(astuple(out)), np.array(astuple(fine))
        scale = max(np.max(np.abs(b)), np.finfo(float).tiny)
        if np.max(np.abs(a - b)) > rtol * scale:
            raise QuadratureUnderResolved(
                f"order {rule.order} -> {2 * rule.order} changes norms by {np.max(np.abs(a - b)) / scale:.2e}"
            )
    return out


def astuple(n: Norms) -> tuple:
    return tuple(getattr(n, k) for k in NORM_NAMES)


def boundary_shape_term(field: VectorField, domain: Domain, rule: QuadratureRule | None = None) -> float:
    """Integral over the boundary of s(B_t) . B_t with B_t the tangential part."""
    field.validate_on(domain)
    rule = rule if rule is not None else make_rule(domain)
    if field.support is not None:
        return 0.0
    F = rule.boundary
    B = field(F.points)
    Bt = B - np.einsum("pi,pi->p", B, F.normals)[:, None] * F.normals
    # s(v).v = sum_k kappa_k (t_k . v)^2
    proj = np.einsum("pki,pi->pk", F.directions, Bt)
    dens = np.einsum("pk,pk->p", F.curvatures, proj**2)
    return _wsum(rule.boundary_weights, dens)


def boundary_mean_term(field: VectorField, domain: Domain, rule: QuadratureRule | None = None) -> float:
    """(n - 1) times the boundary integral of H |B|^2."""
    field.validate_on(domain)
    rule = rule if rule is not None else make_rule(domain)
    if field.support is not None:
        return 0.0
    F = rule.boundary
    B = field(F.points)
    dens = F.curvatures.sum(axis=1) * np.einsum("pi,pi->p", B, B)
    return _wsum(rule.boundary_weights, dens)


def bc_residual(field: VectorField, domain: Domain, rule: QuadratureRule | None, bc) -> float:
    """max |B.N| (tangent) or max |B - (B.N)N| (normal) over boundary nodes."""
    bc = BoundaryCondition.parse(bc)
    field.validate_on(domain)
    rule = rule if rule is not None else make_rule(domain)
    if field.support is not None:
        return 0.0
    F = rule.boundary
    B = field(F.points)
    bn = np.einsum("pi,pi->p", B, F.normals)
    if bc is BoundaryCondition.TANGENT:
        return float(np.max(np.abs(bn)))
    return float(np.max(np.linalg.norm(B - bn[:, None] * F.normals, axis=1)))


def satisfies_bc(field: VectorField, domain: Domain, rule: QuadratureRule | None, bc) -> bool:
    rule = rule if rule is not None else make_rule(domain)
    if field.support is not None:
        return True
    scale = max(1.0, float(np.max(np.linalg.norm(field(rule.boundary.points), axis=1))))
    return bc_residual(field, domain, rule, bc) <= BC_TOL * scale
