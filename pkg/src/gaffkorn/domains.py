"""Parametrized C^{1,1} domain families with exact boundary geometry.

Curvature convention: principal curvatures are taken with respect to the
outward unit normal N and satisfy dN(v) = -kappa v along principal
directions, so a convex domain has kappa_i <= 0 (the unit sphere has
kappa = -1).  The shape operator is s = sum_i kappa_i t_i t_i^T acting on
tangent vectors; H = sum(kappa_i) / (n - 1).

Charts
------
Ball         angles (theta_1, ..., theta_{n-2}, phi) of the hyperspherical
             chart, theta_k in [0, pi], phi periodic.
Annulus      (sheet, theta_1, ..., phi) with sheet 0 = inner sphere,
             sheet 1 = outer sphere.
Ellipse2D    (theta,) with boundary point (a cos theta, b sin theta).
SolidTorus3D (phi, psi): toroidal and poloidal angle, both periodic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

import numpy as np
from scipy.optimize import brentq
from scipy.spatial import cKDTree
from scipy.special import ellipe, gamma

from .errors import InvalidAspect, InvalidParams, NoConvergence, NotUnique, OutOfChart, OutOfTube


class Family(str, Enum):
    BALL = "Ball"
    ANNULUS = "Annulus"
    ELLIPSE = "Ellipse2D"
    TORUS = "SolidTorus3D"


_ALIASES = {
    "ball": Family.BALL,
    "disk": Family.BALL,
    "disc": Family.BALL,
    "annulus": Family.ANNULUS,
    "shell": Family.ANNULUS,
    "ellipse": Family.ELLIPSE,
    "ellipse2d": Family.ELLIPSE,
    "torus": Family.TORUS,
    "solidtorus": Family.TORUS,
    "solidtorus3d": Family.TORUS,
}

_KEYS = {
    Family.BALL: ("r",),
    Family.ANNULUS: ("r0", "r1"),
    Family.ELLIPSE: ("a", "b"),
    Family.TORUS: ("r", "R"),
}

CONFIG_KEYS = ("family", "n", "r", "R", "r0", "r1", "a", "b")


def parse_family(name) -> Family:
    if isinstance(name, Family):
        return name
    key = str(name).strip().lower().replace("_", "").replace("-", "")
    if key in _ALIASES:
        return _ALIASES[key]
    for fam in Family:
        if fam.value.lower() == key:
            return fam
    raise InvalidParams(f"unknown domain family {name!r}")


@dataclass(frozen=True)
class Domain:
    family: Family
    n: int
    params: tuple

    def __getitem__(self, key: str) -> float:
        for k, v in self.params:
            if k == key:
                return v
        raise KeyError(key)

    @property
    def id(self) -> str:
        body = ",".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.family.value}(n={self.n},{body})"

    @property
    def chart_dim(self) -> int:
        return self.n if self.family is Family.ANNULUS else self.n - 1

    @property
    def aspect_ratio(self) -> float:
        if self.family is not Family.TORUS:
            raise AttributeError("aspect ratio is defined for tori only")
        return self["R"] / self["r"]

    @property
    def length_scale(self) -> float:
        return {
            Family.BALL: lambda: self["r"],
            Family.ANNULUS: lambda: self["r1"],
            Family.ELLIPSE: lambda: self["a"],
            Family.TORUS: lambda: self["R"] + self["r"],
        }[self.family]()

    @property
    def diameter(self) -> float:
        return 2.0 * self.length_scale

    @property
    def is_convex(self) -> bool:
        return self.family in (Family.BALL, Family.ELLIPSE)

    def volume(self) -> float:
        n = self.n
        if self.family is Family.BALL:
            return unit_ball_volume(n) * self["r"] ** n
        if self.family is Family.ANNULUS:
            return unit_ball_volume(n) * (self["r1"] ** n - self["r0"] ** n)
        if self.family is Family.ELLIPSE:
            return math.pi * self["a"] * self["b"]
        return 2.0 * math.pi**2 * self["R"] * self["r"] ** 2

    def surface_area(self) -> float:
        n = self.n
        sphere = n * unit_ball_volume(n)
        if self.family is Family.BALL:
            return sphere * self["r"] ** (n - 1)
        if self.family is Family.ANNULUS:
            return sphere * (self["r1"] ** (n - 1) + self["r0"] ** (n - 1))
        if self.family is Family.ELLIPSE:
            a, b = self["a"], self["b"]
            return 4.0 * a * float(ellipe(1.0 - (b / a) ** 2))
        return 4.0 * math.pi**2 * self["R"] * self["r"]


def unit_ball_volume(n: int) -> float:
    """|B_1| in R^n via the Gamma function."""
    return math.pi ** (n / 2) / float(gamma(n / 2 + 1))


def make_domain(family, params: Mapping[str, float] | None = None, n: int | None = None, **kw) -> Domain:
    """Validate parameters and build a :class:`Domain`.

    >>> make_domain("SolidTorus3D", {"r": 1, "R": 2}).aspect_ratio
    2.0
    """
    fam = parse_family(family)
    values = dict(params or {})
    values.update(kw)
    if "n" in values:
        if n is not None and int(values["n"]) != n:
            raise InvalidParams("conflicting dimension")
        n = values.pop("n")
    keys = _KEYS[fam]
    extra = set(values) - set(keys)
    if extra:
        raise InvalidParams(f"unexpected parameters for {fam.value}: {sorted(extra)}")
    missing = [k for k in keys if k not in values]
    if missing:
        raise InvalidParams(f"missing parameters for {fam.value}: {missing}")
    try:
        vals = {k: float(values[k]) for k in keys}
    except (TypeError, ValueError) as exc:
        raise InvalidParams(str(exc)) from None
    for k, v in vals.items():
        if not (math.isfinite(v) and v > 0):
            raise InvalidParams(f"{k} must be a positive length, got {v}")

    fixed = {Family.ELLIPSE: 2, Family.TORUS: 3}.get(fam)
    if n is None:
        n = fixed if fixed is not None else (3 if fam is Family.BALL else 2)
    if int(n) != n:
        raise InvalidParams(f"dimension must be an integer, got {n}")
    n = int(n)
    if n < 2:
        raise InvalidParams("dimension must be at least 2")
    if fixed is not None and n != fixed:
        raise InvalidParams(f"{fam.value} lives in dimension {fixed}")

    if fam is Family.ANNULUS and not vals["r0"] < vals["r1"]:
        raise InvalidParams("annulus needs r0 < r1")
    if fam is Family.ELLIPSE and not vals["a"] >= vals["b"]:
        raise InvalidParams("ellipse needs a >= b")
    if fam is Family.TORUS and not vals["r"] < vals["R"]:
        raise InvalidAspect(f"solid torus needs r < R (aspect ratio {vals['R'] / vals['r']:g})")
    return Domain(fam, n, tuple((k, vals[k]) for k in keys))


def parse_domain_config(text: str, n: int | None = None) -> Domain:
    """Build a domain from a plain-text block.

    Accepts ``key=value`` tokens separated by whitespace, commas or newlines
    (keys: family, n, r, R, r0, r1, a, b).  A bare leading token is taken as
    the family name; missing lengths fall back to the canonical instance.
    """
    tokens = text.replace(",", " ").replace(";", " ").split()
    values: dict[str, str] = {}
    for i, tok in enumerate(tokens):
        if "=" not in tok:
            if i == 0 and "family" not in values:
                values["family"] = tok
                continue
            raise InvalidParams(f"malformed token {tok!r}")
        k, v = tok.split("=", 1)
        k = k.strip()
        if k not in CONFIG_KEYS:
            raise InvalidParams(f"unknown domain key {k!r}")
        values[k] = v.strip()
    if "family" not in values:
        raise InvalidParams("domain block needs a family")
    fam = parse_family(values.pop("family"))
    defaults = {
        Family.BALL: {"r": 1.0},
        Family.ANNULUS: {"r0": 1.0, "r1": 2.0},
        Family.ELLIPSE: {"a": 2.0, "b": 1.0},
        Family.TORUS: {"r": 1.0, "R": 2.0},
    }[fam]
    dim = values.pop("n", None)
    if dim is not None:
        try:
            dim = int(dim)
        except ValueError:
            raise InvalidParams(f"bad dimension {dim!r}") from None
    elif n is not None and fam in (Family.BALL, Family.ANNULUS):
        dim = n
    params = {**defaults, **values}
    return make_domain(fam, params, dim)


def domain_config_text(domain: Domain) -> str:
    body = " ".join(f"{k}={v!r}" for k, v in domain.params)
    return f"family={domain.family.value} n={domain.n} {body}"


# ---------------------------------------------------------------------------
# boundary geometry


@dataclass(frozen=True)
class BoundaryPoint:
    chart_coords: tuple
    position: np.ndarray
    normal: np.ndarray
    principal_curvatures: tuple
    principal_directions: np.ndarray

    @property
    def mean_curvature(self) -> float:
        k = self.principal_curvatures
        return float(sum(k) / len(k))

    @property
    def shape_operator(self) -> np.ndarray:
        T = self.principal_directions
        return (T.T * np.asarray(self.principal_curvatures)) @ T


@dataclass(frozen=True)
class BoundaryFrame:
    """Vectorised boundary data at N chart points."""

    points: np.ndarray  # (N, n)
    normals: np.ndarray  # (N, n)
    curvatures: np.ndarray  # (N, n-1)
    directions: np.ndarray  # (N, n-1, n)

    @property
    def mean_curvature(self) -> np.ndarray:
        return self.curvatures.mean(axis=1)

    @property
    def shape_operators(self) -> np.ndarray:
        T = self.directions
        return np.einsum("pk,pki,pkj->pij", self.curvatures, T, T)


def _tangent_basis(N: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the complement of each unit vector (Householder)."""
    P, n = N.shape
    s = np.where(N[:, 0] >= 0, -1.0, 1.0)
    v = N.copy()
    v[:, 0] -= s
    vv = np.einsum("pi,pi->p", v, v)
    H = np.broadcast_to(np.eye(n), (P, n, n)) - 2.0 * v[:, :, None] * v[:, None, :] / vv[:, None, None]
    # H e_1 = s N, so the remaining columns span N^perp
    return np.transpose(H[:, :, 1:], (0, 2, 1)).copy()


def sphere_points(angles: np.ndarray) -> np.ndarray:
    """Unit-sphere points of the hyperspherical chart; angles shape (N, n-1)."""
    angles = np.atleast_2d(np.asarray(angles, dtype=float))
    N, m = angles.shape
    n = m + 1
    x = np.empty((N, n))
    s = np.ones(N)
    for k in range(n - 2):
        x[:, k] = s * np.cos(angles[:, k])
        s = s * np.sin(angles[:, k])
    x[:, n - 2] = s * np.cos(angles[:, n - 2])
    x[:, n - 1] = s * np.sin(angles[:, n - 2])
    return x


def sphere_angles(x: np.ndarray) -> np.ndarray:
    """Inverse of :func:`sphere_points` for nonzero vectors."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    N, n = x.shape
    ang = np.empty((N, n - 1))
    tail = np.sqrt(np.cumsum((x**2)[:, ::-1], axis=1)[:, ::-1])
    for k in range(n - 2):
        with np.errstate(invalid="ignore", divide="ignore"):
            c = np.where(tail[:, k] > 0, x[:, k] / tail[:, k], 1.0)
        ang[:, k] = np.arccos(np.clip(c, -1.0, 1.0))
    ang[:, n - 2] = np.mod(np.arctan2(x[:, n - 1], x[:, n - 2]), 2 * np.pi)
    return ang


def _check_chart(domain: Domain, U: np.ndarray) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    if U.ndim == 1:
        U = U[None, :]
    if U.ndim != 2 or U.shape[1] != domain.chart_dim:
        raise OutOfChart(f"{domain.family.value} chart expects {domain.chart_dim} coordinates")
    if not np.all(np.isfinite(U)):
        raise OutOfChart("chart coordinates must be finite")
    fam = domain.family
    if fam in (Family.BALL, Family.ANNULUS):
        ang = U[:, 1:] if fam is Family.ANNULUS else U
        polar = ang[:, : domain.n - 2]
        if np.any(polar < 0) or np.any(polar > np.pi):
            raise OutOfChart("polar angles must lie in [0, pi]")
        if fam is Family.ANNULUS and not np.all(np.isin(U[:, 0], (0.0, 1.0))):
            raise OutOfChart("annulus sheet index must be 0 (inner) or 1 (outer)")
    return U


def boundary_frame(domain: Domain, U) -> BoundaryFrame:
    U = _check_chart(domain, U)
    fam, n = domain.family, domain.n
    P = U.shape[0]
    if fam is Family.BALL:
        r = domain["r"]
        N = sphere_points(U)
        X = r * N
        K = np.full((P, n - 1), -1.0 / r)
        T = _tangent_basis(N)
    elif fam is Family.ANNULUS:
        r0, r1 = domain["r0"], domain["r1"]
        outer = U[:, 0] == 1.0
        S = sphere_points(U[:, 1:])
        rad = np.where(outer, r1, r0)
        X = rad[:, None] * S
        N = np.where(outer[:, None], S, -S)
        K = np.repeat(np.where(outer, -1.0 / r1, 1.0 / r0)[:, None], n - 1, axis=1)
        T = _tangent_basis(N)
    elif fam is Family.ELLIPSE:
        a, b = domain["a"], domain["b"]
        th = U[:, 0]
        c, s = np.cos(th), np.sin(th)
        g = np.sqrt(a * a * s * s + b * b * c * c)
        X = np.stack([a * c, b * s], axis=1)
        N = np.stack([b * c, a * s], axis=1) / g[:, None]
        T = (np.stack([-a * s, b * c], axis=1) / g[:, None])[:, None, :]
        K = (-a * b / g**3)[:, None]
    else:
        r, R = domain["r"], domain["R"]
        ph, ps = U[:, 0], U[:, 1]
        cph, sph, cps, sps = np.cos(ph), np.sin(ph), np.cos(ps), np.sin(ps)
        rho = R + r * cps
        X = np.stack([rho * cph, rho * sph, r * sps], axis=1)
        N = np.stack([cps * cph, cps * sph, sps], axis=1)
        t_phi = np.stack([-sph, cph, np.zeros_like(ph)], axis=1)
        t_psi = np.stack([-sps * cph, -sps * sph, cps], axis=1)
        T = np.stack([t_phi, t_psi], axis=1)
        K = np.stack([-cps / rho, np.full_like(ph, -1.0 / r)], axis=1)
    return BoundaryFrame(X, N, K, T)


def boundary_point(domain: Domain, u) -> BoundaryPoint:
    """Position, outward unit normal and principal curvatures at chart point u."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.ndim != 1:
        raise OutOfChart("boundary_point takes a single chart point")
    F = boundary_frame(domain, u[None, :])
    return BoundaryPoint(
        chart_coords=tuple(float(v) for v in u),
        position=F.points[0],
        normal=F.normals[0],
        principal_curvatures=tuple(float(k) for k in F.curvatures[0]),
        principal_directions=F.directions[0],
    )


# ---------------------------------------------------------------------------
# reach


@dataclass(frozen=True)
class ReachEstimate:
    value: float
    method: str  # "Analytic" | "UniformBallBisection"
    tolerance: float = 0.0


def reach_analytic(domain: Domain) -> ReachEstimate:
    fam = domain.family
    if fam is Family.BALL:
        v = domain["r"]
    elif fam is Family.ANNULUS:
        v = min(domain["r0"], 0.5 * (domain["r1"] - domain["r0"]))
    elif fam is Family.ELLIPSE:
        v = domain["b"] ** 2 / domain["a"]
    else:
        v = min(domain["r"], domain["R"] - domain["r"])
    return ReachEstimate(float(v), "Analytic", 0.0)


def _profile(domain: Domain, spacing: float):
    """Generating curve of the boundary, its normals, and whether the
    boundary is a surface of revolution of that curve (half-plane rho >= 0)."""

    def arc(center, radius, t0, t1, sign):
        m = max(8, int(math.ceil(abs(t1 - t0) * radius / spacing)))
        t = t0 + (np.arange(m) + 0.5) * (t1 - t0) / m
        d = np.stack([np.sin(t), np.cos(t)], axis=1)
        return center + radius * d, sign * d

    fam = domain.family
    if fam is Family.BALL:
        pts, nrm = arc(np.zeros(2), domain["r"], 0.0, np.pi, 1.0)
        return pts, nrm, True
    if fam is Family.ANNULUS:
        p0, n0 = arc(np.zeros(2), domain["r0"], 0.0, np.pi, -1.0)
        p1, n1 = arc(np.zeros(2), domain["r1"], 0.0, np.pi, 1.0)
        return np.vstack([p0, p1]), np.vstack([n0, n1]), True
    if fam is Family.TORUS:
        # (rho, z) of the meridian circle; angle measured from the z axis here
        pts, nrm = arc(np.array([domain["R"], 0.0]), domain["r"], 0.0, 2 * np.pi, 1.0)
        return pts, nrm, True
    a = domain["a"]
    m = max(16, int(math.ceil(2 * np.pi * a / spacing)))
    th = (np.arange(m) + 0.5) * 2 * np.pi / m
    F = boundary_frame(domain, th[:, None])
    return F.points, F.normals, False


def _pair_ratio(Y, N, Q):
    d = Q - Y
    dd = np.einsum("ij,ij->i", d, d)
    h = np.abs(np.einsum("ij,ij->i", N, d))
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(dd > 1e-20 * (1.0 + np.einsum("ij,ij->i", Y, Y)), dd / (2.0 * h), np.inf)


def _critical_radius(pts: np.ndarray, nrm: np.ndarray, obstacles: np.ndarray,
                     rows: int = 512) -> float:
    """min over samples y and obstacles q != y of |q - y|^2 / (2 |N(y).(q - y)|).

    The open balls B_eps(y +- eps N(y)) miss q exactly when eps is at most
    this ratio, so it is the largest eps feasible for every sample at once.
    A strided subset of samples gives an upper bound U; a pair with ratio
    below U has q inside B_U(y +- U N(y)), which a tree query enumerates.
    """
    P, M = len(pts), len(obstacles)
    upper = np.inf
    for k in range(0, P, max(1, P // rows)):
        Y = np.broadcast_to(pts[k], (M, pts.shape[1]))
        N = np.broadcast_to(nrm[k], (M, pts.shape[1]))
        upper = min(upper, float(_pair_ratio(Y, N, obstacles).min()))
    tree = cKDTree(obstacles)
    centers = np.vstack([pts - upper * nrm, pts + upper * nrm])
    hits = tree.query_ball_point(centers, upper * (1 + 1e-12))
    counts = np.fromiter((len(h) for h in hits), dtype=np.intp, count=len(hits))
    if not counts.any():
        return upper
    owner = np.repeat(np.arange(2 * P) % P, counts)
    cand = np.concatenate([np.asarray(h, dtype=np.intp) for h in hits if h])
    return min(upper, float(_pair_ratio(pts[owner], nrm[owner], obstacles[cand]).min()))


def reach_numeric(domain: Domain, tol: float = 1e-3) -> ReachEstimate:
    """Reach by bisection on the uniform ball condition.

    Boundary samples have spacing tol/4 along the generating curve.  For
    surfaces of revolution the meridian cross-section (curve plus mirror
    image) is the whole boundary seen from centres in that plane, so the
    planar check is exact with respect to the rotated samples.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    pts, nrm, axisym = _profile(domain, tol / 4.0)
    obstacles = np.vstack([pts, pts * np.array([-1.0, 1.0])]) if axisym else pts
    crit = _critical_radius(pts, nrm, obstacles)
    slack = 1e-9 * domain.length_scale

    def feasible(eps):
        return eps <= crit + slack

    lo, hi = tol, domain.diameter
    if not feasible(lo):
        raise NoConvergence("uniform ball condition fails already at eps = tol")
    if feasible(hi):
        raise NoConvergence("uniform ball condition holds at the domain diameter")
    while hi - lo > tol / 4.0:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return ReachEstimate(0.5 * (lo + hi), "UniformBallBisection", tol)


# ---------------------------------------------------------------------------
# signed distance and projection


def _ellipse_project(a: float, b: float, x: float, y: float) -> tuple[float, float]:
    """Closest point on the ellipse to (x, y), robust root-finding form."""
    sx, sy = math.copysign(1.0, x), math.copysign(1.0, y)
    x0, y0 = abs(x), abs(y)
    if y0 > 0:
        if x0 > 0:
            f = lambda t: (a * x0 / (t + a * a)) ** 2 + (b * y0 / (t + b * b)) ** 2 - 1.0
            lo = -b * b + b * y0
            hi = -b * b + math.hypot(a * x0, b * y0)
            if hi <= lo:
                t = lo
            else:
                t = brentq(f, lo, hi, xtol=1e-15 * (1 + abs(hi)), rtol=4 * np.finfo(float).eps, maxiter=200)
            px, py = a * a * x0 / (t + a * a), b * b * y0 / (t + b * b)
        else:
            px, py = 0.0, b
    else:
        if x0 < (a * a - b * b) / a:
            px = a * a * x0 / (a * a - b * b)
            py = b * math.sqrt(max(0.0, 1.0 - (px / a) ** 2))
        else:
            px, py = a, 0.0
    return sx * px, sy * py


def _nearest(domain: Domain, X: np.ndarray):
    """Chart coordinates of a nearest boundary point and the signed distance.

    Returns (U, b, ambiguous) where ambiguous flags points whose nearest
    point is not unique (e.g. ball centre, torus core circle or axis).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != domain.n:
        raise ValueError(f"points must have {domain.n} coordinates")
    fam = domain.family
    P = X.shape[0]
    scale = domain.length_scale
    tiny = 1e-13 * scale
    if fam is Family.BALL:
        rad = np.linalg.norm(X, axis=1)
        amb = rad <= tiny
        safe = np.where(amb[:, None], np.eye(domain.n)[0], X)
        U = sphere_angles(safe)
        b = rad - domain["r"]
        return U, b, amb
    if fam is Family.ANNULUS:
        r0, r1 = domain["r0"], domain["r1"]
        rad = np.linalg.norm(X, axis=1)
        d_in, d_out = np.abs(rad - r0), np.abs(r1 - rad)
        outer = d_out < d_in
        amb = (rad <= tiny) | (np.abs(d_in - d_out) <= tiny)
        safe = np.where((rad <= tiny)[:, None], np.eye(domain.n)[0], X)
        U = np.hstack([outer[:, None].astype(float), sphere_angles(safe)])
        inside = (rad > r0) & (rad < r1)
        dist = np.minimum(d_in, d_out)
        b = np.where(inside, -dist, dist)
        return U, b, amb
    if fam is Family.ELLIPSE:
        a, bb = domain["a"], domain["b"]
        U = np.empty((P, 1))
        b = np.empty(P)
        amb = np.zeros(P, dtype=bool)
        c = (a * a - bb * bb) / a
        for i, (x, y) in enumerate(X):
            px, py = _ellipse_project(a, bb, x, y)
            U[i, 0] = math.atan2(py / bb, px / a) % (2 * math.pi)
            d = math.hypot(x - px, y - py)
            inside = (x / a) ** 2 + (y / bb) ** 2 < 1.0
            b[i] = -d if inside else d
            # medial segment of the ellipse interior
            amb[i] = abs(y) <= tiny and abs(x) < c - tiny and a > bb
        return U, b, amb
    r, R = domain["r"], domain["R"]
    rho = np.hypot(X[:, 0], X[:, 1])
    phi = np.mod(np.arctan2(X[:, 1], X[:, 0]), 2 * np.pi)
    dr, dz = rho - R, X[:, 2]
    d = np.hypot(dr, dz)
    psi = np.mod(np.arctan2(dz, dr), 2 * np.pi)
    amb = (rho <= tiny) | (d <= tiny)
    return np.stack([phi, psi], axis=1), d - r, amb


def signed_distance(domain: Domain, x) -> np.ndarray | float:
    """b_Omega: negative inside, zero on the boundary, positive outside."""
    X = np.asarray(x, dtype=float)
    _, b, _ = _nearest(domain, X)
    return float(b[0]) if X.ndim == 1 else b


def nearest_chart(domain: Domain, X) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised projection: chart coords of P(x) and b(x).

    Every point with |b(x)| < reach projects uniquely; beyond the tube the
    projection is still returned when it is unique (e.g. outside a ball), and
    NotUnique is raised on the set of points with several nearest points.
    """
    U, b, amb = _nearest(domain, X)
    if np.any(amb):
        raise NotUnique("point has more than one nearest boundary point")
    return U, b


def nearest_point(domain: Domain, x) -> BoundaryPoint:
    U, _ = nearest_chart(domain, np.asarray(x, dtype=float)[None, :])
    return boundary_point(domain, U[0])


# ---------------------------------------------------------------------------
# tubular coordinates


def tubular_map(domain: Domain, t: float, u) -> np.ndarray:
    """Psi(t, y) = y + t N(y); t > 0 points outward."""
    rho = reach_analytic(domain).value
    if not abs(t) < rho:
        raise OutOfTube(f"|t| = {abs(t)} is not below the reach {rho}")
    bp = boundary_point(domain, u)
    return bp.position + t * bp.normal


def metric_determinant(domain: Domain, t: float, u) -> float:
    """det g(t, y) / det g(0, y) for the tubular chart, t outward.

    Along principal directions d(y + tN) = (1 - t kappa_j) dy, so the ratio is
    prod_j (1 - t kappa_j)^2; with inward depth s = -t this is
    prod_j (1 + s kappa_j)^2.
    """
    rho = reach_analytic(domain).value
    if not abs(t) < rho:
        raise OutOfTube(f"|t| = {abs(t)} is not below the reach {rho}")
    k = np.asarray(boundary_point(domain, u).principal_curvatures)
    return float(np.prod((1.0 - t * k) ** 2))


# ---------------------------------------------------------------------------
# extension of the normal field


def collar_profile(depth, alpha: float, rho: float):
    """Tent profile psi(depth) = max(0, 1 - |depth|/(alpha rho)) and its
    derivative (one-sided inward at depth 0)."""
    depth = np.asarray(depth, dtype=float)
    h = alpha * rho
    psi = np.clip(1.0 - np.abs(depth) / h, 0.0, None)
    dpsi = np.where(np.abs(depth) < h, np.where(depth >= 0, -1.0 / h, 1.0 / h), 0.0)
    return psi, dpsi


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")


def div_extension(domain: Domain, alpha: float, t, u) -> np.ndarray | float:
    """Divergence of the collar extension X at inward depth t and chart point u.

    With y = x - t N(x) the tubular chart has metric prod(1 + t kappa_j)^2 and
    d/dt = -N, so div X = -(psi'(t) + psi(t) sum_j kappa_j / (1 + t kappa_j)).
    Accepts arrays: t shape (P,), u shape (P, chart_dim).
    """
    _check_alpha(alpha)
    rho = reach_analytic(domain).value
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(np.abs(t_arr) >= rho):
        raise OutOfTube("depth must satisfy |t| < reach")
    U = np.atleast_2d(np.asarray(u, dtype=float))
    K = boundary_frame(domain, U).curvatures
    psi, dpsi = collar_profile(t_arr, alpha, rho)
    div = -(dpsi + psi * np.sum(K / (1.0 + t_arr[:, None] * K), axis=1))
    return float(div[0]) if np.ndim(t) == 0 else div


def div_extension_bound(domain: Domain, alpha: float) -> float:
    _check_alpha(alpha)
    rho = reach_analytic(domain).value
    return (1.0 / alpha + domain.n - 1) / rho


def extension_field(domain: Domain, alpha: float):
    """Lipschitz extension X of the outward normal supported in the collar
    of inward depth alpha * reach; returned as a VectorField."""
    from .fields import VectorField

    _check_alpha(alpha)
    rho = reach_analytic(domain).value
    n = domain.n

    def _parts(X):
        X = np.atleast_2d(X)
        U, b, amb = _nearest(domain, X)
        depth = -b
        live = (np.abs(depth) < alpha * rho) & ~amb
        return U, depth, live

    def value(X):
        U, depth, live = _parts(X)
        out = np.zeros_like(np.atleast_2d(X), dtype=float)
        if np.any(live):
            F = boundary_frame(domain, U[live])
            psi, _ = collar_profile(depth[live], alpha, rho)
            out[live] = psi[:, None] * F.normals
        return out

    def jacobian(X):
        U, depth, live = _parts(X)
        out = np.zeros((np.atleast_2d(X).shape[0], n, n))
        if np.any(live):
            F = boundary_frame(domain, U[live])
            d = depth[live]
            psi, dpsi = collar_profile(d, alpha, rho)
            Nn = F.normals
            coef = -F.curvatures / (1.0 + d[:, None] * F.curvatures)
            J = -dpsi[:, None, None] * Nn[:, :, None] * Nn[:, None, :]
            J += psi[:, None, None] * np.einsum("pk,pki,pkj->pij", coef, F.directions, F.directions)
            out[live] = J
        return out

    return VectorField(f"collar_extension(alpha={alpha:g})", n, value, jacobian)
