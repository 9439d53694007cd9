"""Lower bounds for the optimal homogeneous constants by Rayleigh-quotient
maximization over boundary-condition-respecting trial spaces.

Trial fields are polynomials in the scaled coordinates x/L (L the domain's
length scale) so the Gram matrices of B_r and B_1 differ only by exact powers
of r.  Boundary conditions are built in, never penalized.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import linalg
from threadpoolctl import threadpool_limits

from .calculus import SQRT2, BoundaryCondition, bc_residual, satisfies_bc
from .domains import Domain, Family, make_domain, reach_analytic
from .errors import (
    BCViolated,
    EigenNoConvergence,
    GaffKornError,
    NotPositiveDefinite,
    QuadratureUnderResolved,
    RankDeficient,
    UnsupportedDomainForSearch,
)
from .fields import ScalarPoly, VectorField, gradient_field, monomials, poly_field, resolve_field
from .inequalities import fmt, homogeneous_quotients, theorem_constant
from .quadrature import QuadratureRule, ball_rule, make_rule

RANK_RTOL = 1e-10
RESIDUAL_TOL = 1e-8
MAX_DEGREE = 10


class Kind(str, Enum):
    GAFFNEY = "gaffney"
    KORN = "korn"

    @classmethod
    def parse(cls, value) -> "Kind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown inequality kind {value!r}") from None


class Construction(str, Enum):
    STREAM_FUNCTION = "StreamFunction"
    GRADIENT_POTENTIAL = "GradientPotential"
    INTERIOR_BUMP = "InteriorBump"
    KNOWN_SPECIAL = "KnownSpecial"


@dataclass(frozen=True)
class TrialSpace:
    domain: Domain
    bc: BoundaryCondition
    basis: tuple
    construction: tuple  # one Construction per basis element
    degree: int
    order: int  # quadrature order suited to the basis

    @property
    def size(self) -> int:
        return len(self.basis)

    @property
    def domain_id(self) -> str:
        return self.domain.id

    def bc_residuals(self, rule: QuadratureRule | None = None) -> np.ndarray:
        rule = rule if rule is not None else make_rule(self.domain, self.order)
        return np.array([bc_residual(f, self.domain, rule, self.bc) for f in self.basis])

    @classmethod
    def from_fields(cls, domain: Domain, bc, fields: Sequence[VectorField],
                    construction: Sequence[Construction] | None = None, order: int | None = None,
                    degree: int | None = None) -> "TrialSpace":
        """A trial space from explicit fields; every field must satisfy bc."""
        bc = BoundaryCondition.parse(bc)
        fields = tuple(fields)
        if not fields:
            raise RankDeficient("empty trial space")
        labels = tuple(construction or [Construction.KNOWN_SPECIAL] * len(fields))
        deg = degree if degree is not None else max(int(f.meta.get("degree", 0)) for f in fields)
        q = order if order is not None else _search_order(domain.n, deg, special=True)
        rule = make_rule(domain, q)
        for f in fields:
            f.validate_on(domain)
            if not satisfies_bc(f, domain, rule, bc):
                raise BCViolated(f"trial field {f.name} violates the {bc.value} condition")
        return cls(domain, bc, fields, labels, deg, q)


def _search_order(n: int, degree: int, special: bool = False) -> int:
    q = max(2 * degree + n, 12)
    return max(q, 24) if special else q


def _scaled_vars(n: int, L: float) -> list[ScalarPoly]:
    return [ScalarPoly.var(n, i, scale=L) for i in range(n)]


def _level_function(domain: Domain) -> tuple[ScalarPoly, int]:
    """A polynomial vanishing exactly on the boundary, in scaled coordinates."""
    n, L = domain.n, domain.length_scale
    x = _scaled_vars(n, L)
    rr = ScalarPoly(n)
    for xi in x:
        rr = rr + xi * xi
    fam = domain.family
    if fam is Family.BALL:
        return 1.0 - rr * (L / domain["r"]) ** 2, 2
    if fam is Family.ANNULUS:
        s0, s1 = (domain["r0"] / L) ** 2, (domain["r1"] / L) ** 2
        return (rr - s0) * (s1 - rr), 4
    if fam is Family.ELLIPSE:
        a, b = domain["a"] / L, domain["b"] / L
        return 1.0 - x[0] * x[0] * (1 / a**2) - x[1] * x[1] * (1 / b**2), 2
    raise UnsupportedDomainForSearch("trial spaces are built for balls, annuli and ellipses only")


def _scaled_monomials(n: int, max_degree: int, L: float) -> list[ScalarPoly]:
    if max_degree < 0:
        return []
    return [ScalarPoly.monomial(e, scale=L) for e in monomials(n, max_degree)]


def _annulus_specials(domain: Domain, bc: BoundaryCondition) -> list[VectorField]:
    if domain.n != 2:
        return []
    L = domain.length_scale

    def value(X):
        q = (X[:, 0] ** 2 + X[:, 1] ** 2) / L
        if bc is BoundaryCondition.TANGENT:
            return np.stack([-X[:, 1] / q, X[:, 0] / q], axis=1)
        return np.stack([X[:, 0] / q, X[:, 1] / q], axis=1)

    def jacobian(X):
        x, y = X[:, 0], X[:, 1]
        q2 = (x * x + y * y) ** 2 / L
        J = np.empty((X.shape[0], 2, 2))
        if bc is BoundaryCondition.TANGENT:
            J[:, 0, 0] = 2 * x * y / q2
            J[:, 0, 1] = (y * y - x * x) / q2
            J[:, 1, 0] = (y * y - x * x) / q2
            J[:, 1, 1] = -2 * x * y / q2
        else:
            J[:, 0, 0] = (y * y - x * x) / q2
            J[:, 0, 1] = -2 * x * y / q2
            J[:, 1, 0] = -2 * x * y / q2
            J[:, 1, 1] = (x * x - y * y) / q2
        return J

    name = "harmonic_rotation" if bc is BoundaryCondition.TANGENT else "harmonic_radial"
    mask = lambda X: np.hypot(X[:, 0], X[:, 1]) == 0.0  # noqa: E731
    return [VectorField(name, 2, value, jacobian, singular_set="origin", singular_mask=mask,
                        meta={"degree": 0, "polynomial": False})]


def build_trial_space(domain: Domain, bc, degree: int, include_special: bool = True) -> TrialSpace:
    """Polynomial trial fields of degree <= `degree` that satisfy bc exactly.

    Ball and annulus (boundaries are spheres about the origin):
      tangent: p (x_i e_j - x_j e_i) with deg p <= degree - 1, the p = 1 members
               being the Killing rotations; plus w P.
      normal:  grad(w q) on the ball, p x on the annulus; plus w P.
    Ellipse: rotated gradients (tangent) or gradients (normal) of w q, plus w P.
    Here w is the level function of the boundary and P runs over e_k times
    monomials of degree <= degree - deg(w).
    """
    bc = BoundaryCondition.parse(bc)
    degree = int(degree)
    if not 0 <= degree <= MAX_DEGREE:
        raise ValueError(f"degree must lie in [0, {MAX_DEGREE}]")
    fam = domain.family
    if fam is Family.TORUS:
        raise UnsupportedDomainForSearch("solid torus trial spaces are out of scope; sweep torus_gamma instead")
    n, L = domain.n, domain.length_scale
    w, wdeg = _level_function(domain)
    x = _scaled_vars(n, L)
    zero = ScalarPoly(n)
    basis: list[VectorField] = []
    labels: list[Construction] = []

    def add(f, label):
        basis.append(f)
        labels.append(label)

    if fam in (Family.BALL, Family.ANNULUS):
        if bc is BoundaryCondition.TANGENT:
            for k, p in enumerate(_scaled_monomials(n, degree - 1, L)):
                for i in range(n):
                    for j in range(i + 1, n):
                        c = [zero] * n
                        c[i], c[j] = -p * x[j], p * x[i]
                        label = Construction.KNOWN_SPECIAL if k == 0 else Construction.STREAM_FUNCTION
                        add(poly_field(f"rot{i}{j}_m{k}", c), label)
        elif fam is Family.BALL:
            for k, q in enumerate(_scaled_monomials(n, degree - 1, L)):
                add(gradient_field(f"gradpot_m{k}", w * q), Construction.GRADIENT_POTENTIAL)
        else:
            for k, p in enumerate(_scaled_monomials(n, degree - 1, L)):
                add(poly_field(f"radial_m{k}", [p * xi for xi in x]), Construction.GRADIENT_POTENTIAL)
    else:
        for k, q in enumerate(_scaled_monomials(n, degree - 1, L)):
            rot = bc is BoundaryCondition.TANGENT
            label = Construction.STREAM_FUNCTION if rot else Construction.GRADIENT_POTENTIAL
            add(gradient_field(f"{'stream' if rot else 'gradpot'}_m{k}", w * q, rotate=rot), label)

    for k, p in enumerate(_scaled_monomials(n, degree - wdeg, L)):
        for i in range(n):
            c = [zero] * n
            c[i] = w * p
            add(poly_field(f"wbump{i}_m{k}", c), Construction.INTERIOR_BUMP)

    special = include_special and fam is Family.ANNULUS and n == 2
    if special:
        for f in _annulus_specials(domain, bc):
            add(f, Construction.KNOWN_SPECIAL)
    if not basis:
        raise RankDeficient(f"no trial fields of degree {degree} for {domain.id} ({bc.value})")
    q = _search_order(n, degree, special)
    space = TrialSpace(domain, bc, tuple(basis), tuple(labels), degree, q)
    res = space.bc_residuals()
    if np.any(res > 1e-10 * max(1.0, L)):
        raise BCViolated(f"trial construction broke the {bc.value} condition ({res.max():.2e})")
    return space


# ---------------------------------------------------------------------------
# Gram matrices


@dataclass(frozen=True)
class GramPair:
    A: np.ndarray
    M: np.ndarray
    kind: Kind
    rho: float
    order: int

    @property
    def m(self) -> int:
        return self.A.shape[0]


def _evaluate(basis, pts):
    V = np.stack([f.value(pts) for f in basis])  # (m, P, n)
    J = np.stack([f.jacobian(pts) for f in basis])  # (m, P, n, n)
    return V, J


def _form_rows(V, J, w, rows, kind: Kind, rho: float):
    """Numerator and denominator bilinear forms between basis[rows] and all of basis."""
    m, P, n = V.shape
    sw = np.sqrt(w)
    Vw = (V * sw[None, :, None]).reshape(m, -1)
    Jw = J * sw[None, :, None, None]
    mass = Vw[rows] @ Vw.T
    Jf = Jw.reshape(m, -1)
    grad = Jf[rows] @ Jf.T
    A = mass / rho**2 + grad
    if kind is Kind.GAFFNEY:
        C = ((Jw - np.swapaxes(Jw, -1, -2)) / SQRT2).reshape(m, -1)
        d = np.trace(Jw, axis1=2, axis2=3)
        M = mass / rho**2 + C[rows] @ C.T + d[rows] @ d.T
    else:
        S = (0.5 * (Jw + np.swapaxes(Jw, -1, -2))).reshape(m, -1)
        M = mass / rho**2 + S[rows] @ S.T
    return A, M


def _assemble(trial: TrialSpace, rule: QuadratureRule, kind: Kind, rho: float):
    basis = trial.basis
    m = len(basis)
    A = np.zeros((m, m))
    M = np.zeros((m, m))
    glob = [k for k, f in enumerate(basis) if f.support is None]
    local = [k for k, f in enumerate(basis) if f.support is not None]
    if glob:
        V, J = _evaluate([basis[k] for k in glob], rule.points)
        a, mm = _form_rows(V, J, rule.weights, slice(None), kind, rho)
        A[np.ix_(glob, glob)] = a
        M[np.ix_(glob, glob)] = mm
    # a compactly supported element is paired with everything on its own
    # support ball; between two of them the smaller ball is used
    for k in local:
        c, rad = basis[k].support
        pts, w = ball_rule(c, rad, trial.domain.n, rule.order)
        V, J = _evaluate(basis, pts)
        a, mm = _form_rows(V, J, w, [k], kind, rho)
        for l in range(m):
            other = basis[l].support
            if other is not None and (other[1], l) < (rad, k):
                continue
            A[k, l] = A[l, k] = a[0, l]
            M[k, l] = M[l, k] = mm[0, l]
    return 0.5 * (A + A.T), 0.5 * (M + M.T)


def assemble_grams(trial: TrialSpace, rule: QuadratureRule | None = None, kind=Kind.GAFFNEY,
                   check_resolution: bool = False, rtol: float = 1e-9) -> GramPair:
    """Numerator/denominator Gram matrices of the homogeneous quotient."""
    kind = Kind.parse(kind)
    rule = rule if rule is not None else make_rule(trial.domain, trial.order)
    rho = reach_analytic(trial.domain).value
    with threadpool_limits(1):
        A, M = _assemble(trial, rule, kind, rho)
        if check_resolution:
            A2, M2 = _assemble(trial, rule.refined(2), kind, rho)
            for X, Y in ((A, A2), (M, M2)):
                scale = np.sqrt(np.outer(np.abs(np.diag(Y)), np.abs(np.diag(Y)))) + np.finfo(float).tiny
                if np.max(np.abs(X - Y) / scale) > rtol:
                    raise QuadratureUnderResolved(f"Gram entries move under order doubling ({rule.order})")
    if not np.all(np.diag(M) > 0):
        raise RankDeficient("a trial field has zero denominator norm")
    return GramPair(A, M, kind, rho, rule.order)


# ---------------------------------------------------------------------------
# generalized eigenproblem


@dataclass(frozen=True)
class RayleighResult:
    value: float
    coefficients: np.ndarray
    retained: int
    residual: float

    def __iter__(self):
        # unpacks as (lambda_max, coefficients)
        return iter((self.value, self.coefficients))


def max_generalized_rayleigh(grams: GramPair | tuple, rank_rtol: float = RANK_RTOL) -> RayleighResult:
    """Largest lambda with A v = lambda M v on the numerically nonsingular part of M.

    M is diagonally equilibrated and directions with eigenvalue below
    rank_rtol times the largest are dropped; on the rest M = L L^T and the
    standard problem for L^-1 A L^-T is solved.
    """
    A, M = (grams.A, grams.M) if isinstance(grams, GramPair) else map(np.asarray, grams)
    A = np.asarray(A, dtype=float)
    M = np.asarray(M, dtype=float)
    if A.shape != M.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A and M must be square matrices of equal size")
    for X, nm in ((A, "A"), (M, "M")):
        if not np.allclose(X, X.T, rtol=0, atol=1e-12 * max(1.0, np.max(np.abs(X)))):
            raise ValueError(f"{nm} is not symmetric")
    d = np.diag(M)
    if not np.all(d > 0):
        raise NotPositiveDefinite("denominator Gram matrix has a nonpositive diagonal entry")
    D = 1.0 / np.sqrt(d)
    Ms = M * D[:, None] * D[None, :]
    As = A * D[:, None] * D[None, :]
    with threadpool_limits(1):
        mu, U = linalg.eigh(Ms)
        top = mu[-1]
        if not top > 0 or mu[0] < -1e-8 * top:
            raise NotPositiveDefinite(f"denominator Gram matrix is indefinite (min eig {mu[0]:.3e})")
        keep = mu > rank_rtol * top
        if np.all(keep):
            Q = np.eye(len(d))
        else:
            Q = U[:, keep]
        Mp = Q.T @ Ms @ Q
        Ap = Q.T @ As @ Q
        Mp = 0.5 * (Mp + Mp.T)
        Ap = 0.5 * (Ap + Ap.T)
        try:
            Lc = linalg.cholesky(Mp, lower=True)
        except linalg.LinAlgError as exc:
            raise NotPositiveDefinite(str(exc)) from None
        T = linalg.solve_triangular(Lc, Ap, lower=True)
        C = linalg.solve_triangular(Lc, T.T, lower=True)
        C = 0.5 * (C + C.T)
        try:
            lam, Y = linalg.eigh(C)
        except linalg.LinAlgError as exc:
            raise EigenNoConvergence(str(exc)) from None
        lam_max = float(lam[-1])
        y = Y[:, -1]
        vp = linalg.solve_triangular(Lc, y, lower=True, trans="T")
        Mv = Mp @ vp
        r = np.linalg.norm(Ap @ vp - lam_max * Mv)
        res = float(r / max(np.linalg.norm(Mv) * max(1.0, abs(lam_max)), np.finfo(float).tiny))
        if not res <= RESIDUAL_TOL:
            raise EigenNoConvergence(f"generalized eigen residual {res:.2e} exceeds {RESIDUAL_TOL:g}")
        v = D * (Q @ vp)
    # fixed sign so results are reproducible
    k = int(np.argmax(np.abs(v)))
    if v[k] < 0:
        v = -v
    return RayleighResult(lam_max, v, int(keep.sum()), res)


# ---------------------------------------------------------------------------
# estimates


@dataclass(frozen=True)
class LadderStep:
    degree: int
    basis_size: int
    retained: int
    value: float
    residual: float
    order: int


@dataclass(frozen=True)
class EstimateReport:
    domain: Domain
    bc: BoundaryCondition
    kind: Kind
    rho: float
    theorem_bound: float
    steps: tuple

    @property
    def values(self) -> list[float]:
        return [s.value for s in self.steps]

    @property
    def gap(self) -> float:
        return self.theorem_bound - self.steps[-1].value

    @property
    def monotone(self) -> bool:
        v = self.values
        return all(b >= a - 1e-10 for a, b in zip(v, v[1:]))

    @property
    def capped(self) -> bool:
        return all(v <= self.theorem_bound + 1e-6 for v in self.values)

    CSV_COLUMNS = ("domain", "bc", "kind", "degree", "basis_size", "retained", "lambda_max",
                   "theorem_bound", "gap", "residual", "order")

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(self.CSV_COLUMNS)
        for s in self.steps:
            wr.writerow([self.domain.id, self.bc.value, self.kind.value, s.degree, s.basis_size,
                         s.retained, fmt(s.value), fmt(self.theorem_bound),
                         fmt(self.theorem_bound - s.value), fmt(s.residual), s.order])
        return buf.getvalue()

    def as_dict(self) -> dict:
        return {
            "domain": {"family": self.domain.family.value, "n": self.domain.n,
                       "params": {k: float(fmt(v)) for k, v in self.domain.params}},
            "bc": self.bc.value,
            "kind": self.kind.value,
            "rho": float(fmt(self.rho)),
            "theorem_bound": float(fmt(self.theorem_bound)),
            "monotone": self.monotone,
            "capped": self.capped,
            "steps": [{"degree": s.degree, "basis_size": s.basis_size, "retained": s.retained,
                       "lambda_max": float(fmt(s.value)), "residual": float(fmt(s.residual)),
                       "quadrature_order": s.order} for s in self.steps],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)


def estimate_constant(domain: Domain, bc, kind, degree_ladder: Sequence[int] = (1, 2, 3, 4),
                      order: int | None = None) -> EstimateReport:
    """Certified lower bounds lambda(d) for each degree d of the ladder."""
    bc = BoundaryCondition.parse(bc)
    kind = Kind.parse(kind)
    steps = []
    for d in degree_ladder:
        trial = build_trial_space(domain, bc, d)
        rule = make_rule(domain, order if order is not None else trial.order)
        grams = assemble_grams(trial, rule, kind)
        res = max_generalized_rayleigh(grams)
        steps.append(LadderStep(int(d), trial.size, res.retained, res.value, res.residual, rule.order))
    return EstimateReport(domain, bc, kind, reach_analytic(domain).value,
                          theorem_constant(bc, domain.n), tuple(steps))


# ---------------------------------------------------------------------------
# sweeps


def family_grid(family, values: Sequence[float], n: int | None = None) -> list[dict]:
    """One-parameter grids: torus aspect R/r (r = 1), annulus ratio r1/r0 (r0 = 1),
    ellipse ratio a/b (b = 1), ball radius r."""
    from .domains import parse_family

    fam = parse_family(family)
    key = {Family.TORUS: ("R", {"r": 1.0}), Family.ANNULUS: ("r1", {"r0": 1.0}),
           Family.ELLIPSE: ("a", {"b": 1.0}), Family.BALL: ("r", {})}[fam]
    out = []
    for v in values:
        p = dict(key[1])
        p[key[0]] = float(v)
        if n is not None and fam in (Family.BALL, Family.ANNULUS):
            p["n"] = n
        out.append(p)
    return out


SWEEP_COLUMNS = ("index", "family", "params", "status", "error", "rho", "value",
                 "q_gaffney", "q_korn", "theorem_bound", "B_L2", "grad_B_L2", "curl_B_L2",
                 "div_B_L2", "sym_grad_B_L2", "B_L2_boundary")


@dataclass(frozen=True)
class SweepRow:
    index: int
    family: str
    params: str
    status: str
    error: str = ""
    rho: float = math.nan
    value: float = math.nan
    q_gaffney: float = math.nan
    q_korn: float = math.nan
    theorem_bound: float = math.nan
    norms: tuple = (math.nan,) * 6

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def csv_row(self) -> list[str]:
        return [str(self.index), self.family, self.params, self.status, self.error,
                fmt(self.rho), fmt(self.value), fmt(self.q_gaffney), fmt(self.q_korn),
                fmt(self.theorem_bound), *[fmt(v) for v in self.norms]]


def _param_text(family, params: Mapping) -> str:
    return " ".join(f"{k}={fmt(float(v)) if k != 'n' else int(v)}" for k, v in params.items())


def _sweep_one(index, family, params, field_or_search, kind, bc, degree, order):
    from .calculus import astuple
    from .domains import parse_family

    fam = parse_family(family)
    text = _param_text(family, params)
    try:
        dom = make_domain(fam, params)
        bound = theorem_constant(bc, dom.n)
        if field_or_search == "search":
            rep = estimate_constant(dom, bc, kind, (degree,), order)
            v = rep.values[-1]
            return SweepRow(index, fam.value, text, "ok", rho=rep.rho, value=v, theorem_bound=bound,
                            q_gaffney=v if kind is Kind.GAFFNEY else math.nan,
                            q_korn=v if kind is Kind.KORN else math.nan)
        f = resolve_field(field_or_search, dom)
        q = homogeneous_quotients(f, dom, make_rule(dom, order), bc)
        v = q.quotient_gaffney if kind is Kind.GAFFNEY else q.quotient_korn
        return SweepRow(index, fam.value, text, "ok", rho=q.rho, value=v, q_gaffney=q.quotient_gaffney,
                        q_korn=q.quotient_korn, theorem_bound=bound, norms=astuple(q.norms))
    except GaffKornError as exc:
        return SweepRow(index, fam.value, text, "failed", error=f"{type(exc).__name__}: {exc}")


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    kind: Kind
    bc: BoundaryCondition
    source: str

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(SWEEP_COLUMNS)
        for r in self.rows:
            wr.writerow(r.csv_row())
        return buf.getvalue()

    def best(self) -> SweepRow:
        ok = [r for r in self.rows if r.ok]
        if not ok:
            raise ValueError("no successful rows")
        return max(ok, key=lambda r: (r.value, -r.index))

    def as_dict(self) -> dict:
        ok = [r for r in self.rows if r.ok]
        out = {"source": self.source, "kind": self.kind.value, "bc": self.bc.value,
               "rows": len(self.rows), "failed": len(self.rows) - len(ok)}
        if ok:
            b = self.best()
            out["best"] = {"index": b.index, "params": b.params, "value": float(fmt(b.value))}
        return out


def sweep(family, param_grid: Sequence[Mapping], field_or_search: str = "torus_gamma", kind=Kind.GAFFNEY,
          bc=BoundaryCondition.TANGENT, degree: int = 2, order: int | None = None,
          workers: int = 1) -> SweepResult:
    """One row per grid entry; failing entries are recorded, not raised.

    field_or_search is a registered field name, or "search" to run the
    trial-space maximization at the given degree.  Rows keep grid order
    whatever the number of workers.
    """
    kind = Kind.parse(kind)
    bc = BoundaryCondition.parse(bc)
    grid = [dict(p) for p in param_grid]
    job: Callable = lambda ip: _sweep_one(ip[0], family, ip[1], field_or_search, kind, bc, degree, order)  # noqa: E731
    with threadpool_limits(1):
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                rows = list(ex.map(job, enumerate(grid)))
        else:
            rows = [job(ip) for ip in enumerate(grid)]
    return SweepResult(tuple(rows), kind, bc, field_or_search)
