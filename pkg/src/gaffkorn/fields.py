"""Analytic vector fields with closed-form Jacobians, and the name registry.

Jacobians follow the convention J[..., i, j] = d_j B^i.  Fields are
evaluated on arrays of points with shape (P, n).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import AxisTooClose, InvalidParams, SingularPoint, SupportTouchesBoundary


@dataclass(frozen=True)
class VectorField:
    name: str
    n: int
    value: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    singular_set: str = ""
    # returns a boolean mask of points lying on the singular set
    singular_mask: Callable[[np.ndarray], np.ndarray] | None = None
    # raises if the closure of the domain meets the singular set
    check_domain: Callable[[object], None] | None = None
    # (centre, radius) of a compact support ball, if any
    support: tuple | None = None
    meta: Mapping = field(default_factory=dict)

    def _points(self, x):
        X = np.asarray(x, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.n:
            raise ValueError(f"{self.name} expects points in R^{self.n}")
        if self.singular_mask is not None and np.any(self.singular_mask(X)):
            raise SingularPoint(f"{self.name} is singular on {self.singular_set}")
        return X, single

    def __call__(self, x):
        X, single = self._points(x)
        v = self.value(X)
        return v[0] if single else v

    def grad(self, x):
        X, single = self._points(x)
        J = self.jacobian(X)
        return J[0] if single else J

    def validate_on(self, domain) -> None:
        if domain.n != self.n:
            raise InvalidParams(f"{self.name} lives in R^{self.n}, domain in R^{domain.n}")
        if self.check_domain is not None:
            self.check_domain(domain)


# ---------------------------------------------------------------------------
# exact polynomials


class ScalarPoly:
    """Sparse real polynomial in n variables: {exponent tuple: coefficient}."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[tuple, float] | None = None):
        self.n = n
        self.terms = {tuple(int(e) for e in k): float(c) for k, c in (terms or {}).items() if c != 0.0}

    @classmethod
    def const(cls, n, c=1.0):
        return cls(n, {(0,) * n: c})

    @classmethod
    def var(cls, n, i, scale=1.0):
        e = [0] * n
        e[i] = 1
        return cls(n, {tuple(e): 1.0 / scale})

    @classmethod
    def monomial(cls, exps, scale=1.0):
        return cls(len(exps), {tuple(exps): scale ** (-sum(exps))})

    @property
    def degree(self) -> int:
        return max((sum(k) for k in self.terms), default=0)

    def __add__(self, other):
        other = other if isinstance(other, ScalarPoly) else ScalarPoly.const(self.n, other)
        t = dict(self.terms)
        for k, c in other.terms.items():
            t[k] = t.get(k, 0.0) + c
        return ScalarPoly(self.n, t)

    __radd__ = __add__

    def __neg__(self):
        return ScalarPoly(self.n, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, ScalarPoly) else -float(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, ScalarPoly):
            return ScalarPoly(self.n, {k: c * float(other) for k, c in self.terms.items()})
        t: dict = {}
        for (k1, c1), (k2, c2) in itertools.product(self.terms.items(), other.terms.items()):
            k = tuple(a + b for a, b in zip(k1, k2))
            t[k] = t.get(k, 0.0) + c1 * c2
        return ScalarPoly(self.n, t)

    __rmul__ = __mul__

    def diff(self, i: int) -> "ScalarPoly":
        t: dict = {}
        for k, c in self.terms.items():
            if k[i] > 0:
                kk = list(k)
                kk[i] -= 1
                t[tuple(kk)] = t.get(tuple(kk), 0.0) + c * k[i]
        return ScalarPoly(self.n, t)

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        if not self.terms:
            return np.zeros(X.shape[0])
        deg = max(max(k) for k in self.terms)
        pw = [np.ones((X.shape[0], self.n))]
        for _ in range(deg):
            pw.append(pw[-1] * X)
        out = np.zeros(X.shape[0])
        for k, c in sorted(self.terms.items()):
            m = np.full(X.shape[0], c)
            for i, e in enumerate(k):
                if e:
                    m = m * pw[e][:, i]
            out += m
        return out


def monomials(n: int, max_degree: int) -> list[tuple]:
    """Exponent tuples of total degree <= max_degree, graded order."""
    out = []
    for d in range(max_degree + 1):
        for c in itertools.combinations_with_replacement(range(n), d):
            e = [0] * n
            for i in c:
                e[i] += 1
            out.append(tuple(e))
    return out


def poly_field(name: str, components: Sequence[ScalarPoly], **kw) -> VectorField:
    comps = list(components)
    n = len(comps)
    grads = [[p.diff(j) for j in range(n)] for p in comps]

    def value(X):
        return np.stack([p(X) for p in comps], axis=1)

    def jacobian(X):
        return np.stack([np.stack([g(X) for g in row], axis=1) for row in grads], axis=1)

    meta = dict(kw.pop("meta", {}))
    meta.setdefault("degree", max(p.degree for p in comps))
    meta["polynomial"] = True
    return VectorField(name, n, value, jacobian, meta=meta, **kw)


def gradient_field(name: str, f: ScalarPoly, rotate: bool = False, **kw) -> VectorField:
    """grad f, or its quarter-turn (-d_y f, d_x f) in the plane when rotate."""
    g = [f.diff(i) for i in range(f.n)]
    if rotate:
        if f.n != 2:
            raise InvalidParams("rotated gradients exist in the plane only")
        g = [-g[1], g[0]]
    return poly_field(name, g, **kw)


# ---------------------------------------------------------------------------
# named fields


def rotation_xy(n: int = 3) -> VectorField:
    """Y = (-x_2, x_1, 0, ..., 0): the Killing rotation in the first plane."""
    if n < 2:
        raise InvalidParams("rotation needs n >= 2")
    c = [ScalarPoly(n) for _ in range(n)]
    c[0] = -ScalarPoly.var(n, 1)
    c[1] = ScalarPoly.var(n, 0)
    return poly_field("rotation_xy", c)


def position(n: int = 3) -> VectorField:
    return poly_field("position", [ScalarPoly.var(n, i) for i in range(n)])


def _axis_mask(X):
    return np.hypot(X[:, 0], X[:, 1]) == 0.0


def _axis_clearance(domain) -> float:
    from .domains import Family

    fam = domain.family
    if fam is Family.TORUS:
        return domain["R"] - domain["r"]
    if fam is Family.ANNULUS and domain.n == 2:
        return domain["r0"]
    return 0.0


def torus_gamma(n: int = 3) -> VectorField:
    """Gamma = Y / |Y|^2 with Y = (-y, x, 0): curl- and divergence-free off
    the z axis (the origin when n = 2)."""
    if n not in (2, 3):
        raise InvalidParams("torus_gamma is defined for n = 2 or 3")

    def value(X):
        q = X[:, 0] ** 2 + X[:, 1] ** 2
        out = np.zeros_like(X)
        out[:, 0] = -X[:, 1] / q
        out[:, 1] = X[:, 0] / q
        return out

    def jacobian(X):
        x, y = X[:, 0], X[:, 1]
        q2 = (x * x + y * y) ** 2
        J = np.zeros((X.shape[0], n, n))
        J[:, 0, 0] = 2 * x * y / q2
        J[:, 0, 1] = (y * y - x * x) / q2
        J[:, 1, 0] = (y * y - x * x) / q2
        J[:, 1, 1] = -2 * x * y / q2
        return J

    def check(domain):
        if domain.n != n:
            raise InvalidParams("dimension mismatch")
        if not _axis_clearance(domain) > 0:
            raise AxisTooClose("domain closure meets the rotation axis")

    return VectorField(
        "torus_gamma", n, value, jacobian,
        singular_set="z axis" if n == 3 else "origin",
        singular_mask=_axis_mask, check_domain=check,
    )


def bump_profile(X, center, radius):
    """phi = (1 - |x-c|^2/radius^2)^3 on the support ball, its gradient and Hessian."""
    D = X - center
    q = np.einsum("pi,pi->p", D, D) / radius**2
    inside = q < 1.0
    s = np.where(inside, 1.0 - q, 0.0)
    phi = s**3
    grad = (-6.0 * s**2 / radius**2)[:, None] * D
    n = X.shape[1]
    hess = (24.0 * s / radius**4)[:, None, None] * D[:, :, None] * D[:, None, :]
    hess -= (6.0 * s**2 / radius**2)[:, None, None] * np.eye(n)
    return phi, grad, hess


def _support_check(center, radius):
    def check(domain):
        from .domains import signed_distance

        if not signed_distance(domain, center) < -radius:
            raise SupportTouchesBoundary("bump support must lie strictly inside the domain")

    return check


def bump_supported_field(domain, center, radius, direction_profile=None, name="bump") -> VectorField:
    """phi(x) d(x) with the cubic polynomial bump phi supported in B_radius(center).

    direction_profile is a constant vector (default e_1) or a VectorField.
    """
    n = domain.n
    center = np.asarray(center, dtype=float)
    if center.shape != (n,) or not radius > 0:
        raise InvalidParams("bad bump centre or radius")
    check = _support_check(center, radius)
    check(domain)
    if direction_profile is None:
        direction_profile = np.eye(n)[0]
    if isinstance(direction_profile, VectorField):
        prof = direction_profile
    else:
        d = np.asarray(direction_profile, dtype=float)
        prof = VectorField(
            "const", n, lambda X, d=d: np.broadcast_to(d, X.shape).copy(),
            lambda X: np.zeros((X.shape[0], n, n)),
        )

    def value(X):
        phi, _, _ = bump_profile(X, center, radius)
        return phi[:, None] * prof.value(X)

    def jacobian(X):
        phi, g, _ = bump_profile(X, center, radius)
        return prof.value(X)[:, :, None] * g[:, None, :] + phi[:, None, None] * prof.jacobian(X)

    poly = bool(prof.meta.get("polynomial", not isinstance(direction_profile, VectorField)))
    return VectorField(name, n, value, jacobian, check_domain=check,
                       support=(center, float(radius)), meta={"piecewise_polynomial": poly})


def curl_bump_field(domain, center, radius, axis=(0.0, 0.0, 1.0), name="curl_bump") -> VectorField:
    """B = curl(phi a) = grad(phi) x a for a constant vector a (n = 3):
    compactly supported and divergence-free."""
    if domain.n != 3:
        raise InvalidParams("curl of a vector potential needs n = 3")
    center = np.asarray(center, dtype=float)
    a = np.asarray(axis, dtype=float)
    check = _support_check(center, radius)
    check(domain)

    def value(X):
        _, g, _ = bump_profile(X, center, radius)
        return np.cross(g, a)

    def jacobian(X):
        _, _, H = bump_profile(X, center, radius)
        # B_i = eps_ijk g_j a_k  =>  d_m B_i = eps_ijk H_jm a_k
        return np.cross(np.transpose(H, (0, 2, 1)), a).transpose(0, 2, 1)

    return VectorField(name, 3, value, jacobian, check_domain=check,
                       support=(center, float(radius)), meta={"piecewise_polynomial": True})


def perp_rotate(field_2d: VectorField) -> VectorField:
    """B -> B^perp = (-B^2, B^1) in the plane."""
    if field_2d.n != 2:
        raise InvalidParams("perp_rotate needs a planar field")

    def value(X):
        v = field_2d.value(X)
        return np.stack([-v[:, 1], v[:, 0]], axis=1)

    def jacobian(X):
        J = field_2d.jacobian(X)
        return np.stack([-J[:, 1, :], J[:, 0, :]], axis=1)

    return VectorField(
        f"perp_of:{field_2d.name}", 2, value, jacobian,
        singular_set=field_2d.singular_set, singular_mask=field_2d.singular_mask,
        check_domain=field_2d.check_domain, support=field_2d.support, meta=dict(field_2d.meta),
    )


def scalar_field(f: ScalarPoly, name: str | None = None) -> VectorField:
    """Embed a scalar polynomial f as the vector field (f, 0, ..., 0)."""
    n = f.n
    comps = [f] + [ScalarPoly(n) for _ in range(n - 1)]
    return poly_field(name or "scalar", comps)


def scalar_bump(domain, center, radius, name="radial_bump") -> VectorField:
    """(phi, 0, ..., 0) with the radial cubic bump phi."""
    return bump_supported_field(domain, center, radius, np.eye(domain.n)[0], name=name)


# ---------------------------------------------------------------------------
# "poly:<spec>" parsing


def parse_poly_spec(spec: str, n: int, scale: float = 1.0) -> list[ScalarPoly]:
    """Parse ';'-separated component expressions into exact polynomials.

    Variables: x, y, z (n <= 3) or x1..xn.  '^' is accepted for powers.
    A single component when n > 1 is read as a scalar (f, 0, ..., 0).
    """
    import sympy

    names = [f"x{i + 1}" for i in range(n)]
    syms = sympy.symbols(names)
    local = {nm: s for nm, s in zip(names, syms)}
    if n <= 3:
        local.update({c: s for c, s in zip("xyz", syms)})
    parts = [p.strip() for p in spec.split(";")]
    if len(parts) == 1 and n > 1:
        parts = parts + ["0"] * (n - 1)
    if len(parts) != n:
        raise InvalidParams(f"poly spec needs {n} components, got {len(parts)}")
    out = []
    for p in parts:
        try:
            expr = sympy.sympify(p.replace("^", "**"), locals=local)
            P = sympy.Poly(sympy.expand(expr), *syms)
        except (sympy.SympifyError, sympy.PolynomialError, TypeError) as exc:
            raise InvalidParams(f"not a polynomial: {p!r} ({exc})") from None
        out.append(ScalarPoly(n, {k: float(c) for k, c in P.terms()}))
    return out


# ---------------------------------------------------------------------------
# registry


def default_bump(domain, name="bump") -> VectorField:
    from .domains import Family

    n = domain.n
    c = np.zeros(n)
    fam = domain.family
    if fam is Family.BALL:
        rad = 0.5 * domain["r"]
    elif fam is Family.ANNULUS:
        c[0] = 0.5 * (domain["r0"] + domain["r1"])
        rad = 0.25 * (domain["r1"] - domain["r0"])
    elif fam is Family.ELLIPSE:
        rad = 0.5 * domain["b"]
    else:
        c[0] = domain["R"]
        rad = 0.5 * domain["r"]
    return bump_supported_field(domain, c, rad, name=name)


def elliptic_rotation(domain) -> VectorField:
    """(-(a/b) y, (b/a) x): tangent to the ellipse (the rotation on a disk)."""
    from .domains import Family

    if domain.n != 2 or domain.family not in (Family.ELLIPSE, Family.BALL):
        raise InvalidParams("elliptic_rotation needs a disk or an ellipse")
    a, b = (domain["a"], domain["b"]) if domain.family is Family.ELLIPSE else (1.0, 1.0)
    return poly_field("elliptic_rotation", [-ScalarPoly.var(2, 1, scale=b / a), ScalarPoly.var(2, 0, scale=a / b)])


def level_gradient(domain) -> VectorField:
    """Half the gradient of x^2/a^2 + y^2/b^2 (|x|^2/r^2 on a ball): normal on the boundary."""
    from .domains import Family

    n = domain.n
    if domain.family is Family.ELLIPSE:
        scales = (domain["a"] ** 2, domain["b"] ** 2)
    elif domain.family is Family.BALL:
        scales = (domain["r"] ** 2,) * n
    else:
        raise InvalidParams("level_gradient needs a ball or an ellipse")
    return poly_field("level_gradient", [ScalarPoly.var(n, i, scale=scales[i]) for i in range(n)])


REGISTERED_NAMES = ("rotation_xy", "position", "torus_gamma", "bump", "elliptic_rotation",
                    "level_gradient", "perp_of:<name>", "poly:<spec>")


def resolve_field(name: str, domain) -> VectorField:
    """Look up a field by registry name for the given domain."""
    name = name.strip()
    n = domain.n
    if name.startswith("perp_of:"):
        return perp_rotate(resolve_field(name[len("perp_of:"):], domain))
    if name.startswith("poly:"):
        return poly_field(name, parse_poly_spec(name[len("poly:"):], n))
    if name == "rotation_xy":
        return rotation_xy(n)
    if name == "position":
        return position(n)
    if name == "torus_gamma":
        f = torus_gamma(n)
        f.validate_on(domain)
        return f
    if name == "bump":
        return default_bump(domain)
    if name == "elliptic_rotation":
        return elliptic_rotation(domain)
    if name == "level_gradient":
        return level_gradient(domain)
    raise InvalidParams(f"unknown field {name!r}; registered: {', '.join(REGISTERED_NAMES)}")


def finite_difference_jacobian(f: VectorField, X: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central differences of f.value, used only as a cross-check."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    P, n = X.shape
    J = np.empty((P, n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        J[:, :, j] = (f.value(X + e) - f.value(X - e)) / (2 * h)
    return J
