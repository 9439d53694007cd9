"""Tensor-product quadrature in chart coordinates.

Radial parameters use Gauss-Legendre, polar angles of hyperspheres use
Gauss-Jacobi in cos(theta) (absorbing the sin^k weight), and periodic
angles use the offset trapezoid rule, so no node sits on a seam or pole.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .domains import BoundaryFrame, BoundaryPoint, Domain, Family, boundary_frame


def default_order(n: int) -> int:
    if n <= 3:
        return 24
    return 10 if n == 4 else 6


@dataclass(frozen=True)
class QuadratureRule:
    domain: Domain
    order: int
    points: np.ndarray  # (P, n)
    weights: np.ndarray  # (P,)
    boundary: BoundaryFrame
    boundary_weights: np.ndarray
    boundary_chart: np.ndarray

    @property
    def size(self) -> tuple[int, int]:
        return len(self.weights), len(self.boundary_weights)

    def boundary_nodes(self):
        """Yield (BoundaryPoint, weight) pairs."""
        F = self.boundary
        for i, w in enumerate(self.boundary_weights):
            bp = BoundaryPoint(
                tuple(self.boundary_chart[i]), F.points[i], F.normals[i],
                tuple(F.curvatures[i]), F.directions[i],
            )
            yield bp, float(w)

    def refined(self, factor: int = 2) -> "QuadratureRule":
        return make_rule(self.domain, self.order * factor)


def _gauss01(q: int):
    x, w = roots_legendre(q)
    return 0.5 * (x + 1.0), 0.5 * w


def _periodic(m: int):
    t = (np.arange(m) + 0.5) * (2 * np.pi / m)
    return t, np.full(m, 2 * np.pi / m)


@lru_cache(maxsize=64)
def sphere_rule(n: int, order: int):
    """Angles (P, n-1) and weights on the unit sphere S^{n-1}."""
    nodes = []
    for k in range(1, n - 1):
        alpha = (n - 2 - k) / 2.0
        t, w = roots_jacobi(order, alpha, alpha)
        nodes.append((np.arccos(t), w))
    nodes.append(_periodic(2 * order))
    grids = np.meshgrid(*[a for a, _ in nodes], indexing="ij")
    wgrids = np.meshgrid(*[w for _, w in nodes], indexing="ij")
    ang = np.stack([g.ravel() for g in grids], axis=1)
    w = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    return ang, w


def ball_rule(center, radius: float, n: int, order: int):
    """Volume nodes and weights of the ball B_radius(center) in R^n."""
    from .domains import sphere_points

    ang, ws = sphere_rule(n, order)
    S = sphere_points(ang)
    s, wr = _gauss01(order)
    rad = radius * s
    pts = (rad[:, None, None] * S[None, :, :]).reshape(-1, n) + np.asarray(center, dtype=float)
    w = ((radius**n) * s ** (n - 1) * wr)[:, None] * ws[None, :]
    return pts, w.ravel()


def make_rule(domain: Domain, order: int | None = None) -> QuadratureRule:
    n = domain.n
    q = int(order if order is not None else default_order(n))
    if q < 1:
        raise ValueError("quadrature order must be positive")
    fam = domain.family
    s, ws = _gauss01(q)

    if fam is Family.BALL:
        pts, w = ball_rule(np.zeros(n), domain["r"], n, q)
        ang, wsph = sphere_rule(n, q)
        U = ang
        bw = domain["r"] ** (n - 1) * wsph
    elif fam is Family.ANNULUS:
        from .domains import sphere_points

        r0, r1 = domain["r0"], domain["r1"]
        ang, wsph = sphere_rule(n, q)
        S = sphere_points(ang)
        rad = r0 + (r1 - r0) * s
        pts = (rad[:, None, None] * S[None]).reshape(-1, n)
        w = ((r1 - r0) * ws * rad ** (n - 1))[:, None] * wsph[None, :]
        w = w.ravel()
        m = len(ang)
        U = np.vstack([np.hstack([np.zeros((m, 1)), ang]), np.hstack([np.ones((m, 1)), ang])])
        bw = np.concatenate([r0 ** (n - 1) * wsph, r1 ** (n - 1) * wsph])
    elif fam is Family.ELLIPSE:
        a, b = domain["a"], domain["b"]
        th, wt = _periodic(2 * q)
        S, T = np.meshgrid(s, th, indexing="ij")
        W = np.outer(ws * s, wt) * a * b
        pts = np.stack([a * S.ravel() * np.cos(T.ravel()), b * S.ravel() * np.sin(T.ravel())], axis=1)
        w = W.ravel()
        U = th[:, None]
        bw = np.sqrt(a * a * np.sin(th) ** 2 + b * b * np.cos(th) ** 2) * wt
    else:
        r, R = domain["r"], domain["R"]
        ps, wp = _periodic(2 * q)
        ph, wf = _periodic(2 * q)
        S, PS, PH = np.meshgrid(s, ps, ph, indexing="ij")
        rho = R + S * r * np.cos(PS)
        pts = np.stack([
            (rho * np.cos(PH)).ravel(), (rho * np.sin(PH)).ravel(), (S * r * np.sin(PS)).ravel()
        ], axis=1)
        W = (ws[:, None, None] * wp[None, :, None] * wf[None, None, :]) * r * r * S * rho
        w = W.ravel()
        PSb, PHb = np.meshgrid(ps, ph, indexing="ij")
        U = np.stack([PHb.ravel(), PSb.ravel()], axis=1)
        bw = (np.outer(wp, wf) * r * (R + r * np.cos(PSb))).ravel()

    F = boundary_frame(domain, U)
    return QuadratureRule(domain, q, np.ascontiguousarray(pts), np.ascontiguousarray(w), F,
                          np.ascontiguousarray(bw), U)
