"""Command-line front end: ``gaffkorn <command> [flags]``.

Exit codes: 0 when every asserted check passes, 1 on the first failing check
(named on stderr), 2 on configuration errors.
"""
from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import inequalities as ineq
from . import oracles, search
from .calculus import BoundaryCondition, satisfies_bc
from .domains import Domain, domain_config_text, parse_domain_config, reach_analytic, reach_numeric
from .errors import (
    ConfigError,
    DomainNotConvex,
    GaffKornError,
    InvalidParams,
    UnsupportedDomainForSearch,
)
from .fields import resolve_field
from .quadrature import make_rule

COMMANDS = ("constants", "reach", "verify", "oracle", "estimate", "sweep")

# every check the CLI can assert, with the result it exercises
MANIFEST = {
    "constants.c1_expansion": "expanded form C1(n) = n + 3 + 2 sqrt(1+n)",
    "constants.epsilon_identity": "optimal trace-inequality epsilon: (c/(1-c eps))(n+1/eps) = C - 1",
    "reach.agreement": "uniform-ball bisection reach vs closed-form reach",
    "reach.curvature_bound": "principal curvatures bounded by the inverse reach",
    "verify.bc": "field satisfies the claimed boundary condition at every boundary node",
    "verify.gaffney_identity": "integral identity |grad B|^2 = |curl B|^2 + |div B|^2 + boundary curvature term",
    "verify.korn_identity": "integral identity |grad B|^2 = 2|Sym grad B|^2 - |div B|^2 - boundary curvature term",
    "verify.gaffney_bound": "homogeneous Gaffney inequality with constant C1 (tangent) or C2 (normal)",
    "verify.korn_bound": "homogeneous Korn inequality with constant C1 (tangent) or C2 (normal)",
    "verify.trace": "quantitative Ehrling trace inequality over the epsilon grid",
    "verify.convex_case": "convex (tangent) or mean-convex (normal) case: |grad B|^2 <= |curl B|^2 + |div B|^2",
    "oracle.closed_form": "closed-form example value reproduced by quadrature",
    "estimate.monotone": "trial-space lower bounds nondecreasing in degree",
    "estimate.cap": "trial-space lower bounds capped by the theorem constant",
    "sweep.cap": "swept quotients capped by the theorem constant",
}

_LIST_KEYS = {"field", "bc", "degree"}


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    domain: str = ""
    field: tuple = ()
    bc: tuple = ()
    kind: str = ""
    order: int | None = None
    epsilon_grid: str = "1e-3:1e3:25"
    degree: tuple = ()
    grid: str = ""
    family: str = ""
    n: int | None = None
    case: str = ""
    tol: float = 1e-3
    workers: int = 1
    out: str = ""

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")

    def emit(self) -> str:
        """key = value lines; parse(emit(c)) == c."""
        lines = []
        defaults = ExperimentConfig(self.command)
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name != "command" and v == getattr(defaults, f.name):
                continue
            if isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    def provenance(self) -> str:
        """Config recorded in artifacts; execution-only settings are dropped so
        outputs do not depend on the worker count or output directory."""
        return replace(self, workers=1, out="").emit()

    @classmethod
    def parse(cls, text: str) -> "ExperimentConfig":
        known = {f.name: f for f in fields(cls)}
        raw: dict[str, str] = {}
        for ln, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {ln}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            if k not in known:
                raise ConfigError(f"line {ln}: unknown key {k!r}")
            if k in raw:
                raise ConfigError(f"line {ln}: duplicate key {k!r}")
            raw[k] = v
        if "command" not in raw:
            raise ConfigError("config needs a command")
        return cls.from_mapping(raw)

    @classmethod
    def from_mapping(cls, raw) -> "ExperimentConfig":
        vals = {}
        try:
            for k, v in raw.items():
                if v is None:
                    continue
                if k in _LIST_KEYS:
                    items = v if isinstance(v, (list, tuple)) else [s for s in str(v).split(",") if s.strip()]
                    items = tuple(s.strip() if isinstance(s, str) else s for s in items)
                    vals[k] = tuple(int(s) for s in items) if k == "degree" else items
                elif k in ("order", "n", "workers"):
                    vals[k] = int(v)
                elif k == "tol":
                    vals[k] = float(v)
                else:
                    vals[k] = str(v)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return cls(**vals)


# ---------------------------------------------------------------------------
# checks


@dataclass
class Checks:
    items: list = field(default_factory=list)

    def add(self, name: str, passed: bool, detail: str = "") -> bool:
        self.items.append((name, bool(passed), detail))
        return passed

    @property
    def first_failure(self):
        return next((c for c in self.items if not c[1]), None)


def _slug(s: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.=-]+", "_", s).strip("_")


def _write(out: str, name: str, text: str) -> None:
    if not out:
        return
    p = Path(out)
    p.mkdir(parents=True, exist_ok=True)
    (p / name).write_text(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _domain(cfg: ExperimentConfig, default: str = "ball") -> Domain:
    try:
        return parse_domain_config(cfg.domain or default, n=cfg.n)
    except InvalidParams as exc:
        raise ConfigError(str(exc)) from None


def _parse_grid(text: str) -> list[float]:
    """'lo:hi:step' (inclusive) or comma-separated values."""
    try:
        if ":" in text:
            lo, hi, step = (float(s) for s in text.split(":"))
            if not step > 0 or hi < lo:
                raise ValueError("bad grid range")
            k = int(math.floor((hi - lo) / step + 1e-9))
            return [round(lo + i * step, 12) for i in range(k + 1)]
        vals = [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}: {exc}") from None
    if not vals:
        raise ConfigError("empty grid")
    return vals


def _eps_grid(text: str) -> np.ndarray:
    try:
        lo, hi, k = text.split(":")
        lo, hi, k = float(lo), float(hi), int(k)
    except ValueError:
        raise ConfigError(f"epsilon grid must be lo:hi:count, got {text!r}") from None
    if not (0 < lo < hi and k >= 2):
        raise ConfigError("epsilon grid needs 0 < lo < hi and count >= 2")
    return np.geomspace(lo, hi, k)


# ---------------------------------------------------------------------------
# commands


def cmd_constants(cfg: ExperimentConfig, chk: Checks) -> None:
    n = cfg.n if cfg.n is not None else 3
    try:
        c1, c2 = ineq.constant_c1(n), ineq.constant_c2(n)
    except GaffKornError as exc:
        raise ConfigError(str(exc)) from None
    chk.add("constants.c1_expansion", abs(c1 - (n + 3 + 2 * math.sqrt(1 + n))) <= 1e-12 * c1)
    out = {"n": n, "C1": c1, "C2": c2, "epsilon": {}}
    print(f"n = {n}")
    print(f"C1 = {c1:.12g}")
    print(f"C2 = {c2:.12g}")
    for bc in BoundaryCondition:
        e = ineq.optimal_epsilon(bc, n)
        res = e.identity_residual(n)
        chk.add(f"constants.epsilon_identity[{bc.value}]", res <= 1e-12, f"residual {res:.2e}")
        print(f"{bc.value}: c_n = {e.c_n:g}, epsilon = {e.epsilon:.12g}, amplification = {e.amplification:.12g}")
        out["epsilon"][bc.value] = {"c_n": e.c_n, "epsilon": float(ineq.fmt(e.epsilon)),
                                    "amplification": float(ineq.fmt(e.amplification))}
    out["C1"], out["C2"] = float(ineq.fmt(c1)), float(ineq.fmt(c2))
    _write(cfg.out, "constants.json", _dumps(out))


def cmd_reach(cfg: ExperimentConfig, chk: Checks) -> None:
    dom = _domain(cfg)
    exact = reach_analytic(dom).value
    num = reach_numeric(dom, cfg.tol)
    err = abs(num.value - exact)
    print(f"{dom.id}: analytic {exact:.12g}, numeric {num.value:.12g} (tol {cfg.tol:g}), |diff| {err:.3e}")
    chk.add("reach.agreement", err <= 2 * cfg.tol, f"|diff| {err:.3e}")
    K = make_rule(dom).boundary.curvatures
    kmax = float(np.max(np.abs(K)))
    chk.add("reach.curvature_bound", kmax <= 1 / exact + 1e-9, f"max |kappa| {kmax:.12g}")
    _write(cfg.out, "reach.json", _dumps({"domain": domain_config_text(dom),
                                          "analytic": float(ineq.fmt(exact)),
                                          "numeric": float(ineq.fmt(num.value)), "tol": cfg.tol,
                                          "max_abs_curvature": float(ineq.fmt(kmax))}))


def cmd_verify(cfg: ExperimentConfig, chk: Checks) -> None:
    dom = _domain(cfg)
    rule = make_rule(dom, cfg.order)
    eps = _eps_grid(cfg.epsilon_grid)
    bcs = [BoundaryCondition.parse(b) for b in cfg.bc] if cfg.bc else None
    names = cfg.field or ineq.CONCRETE_FIELDS
    reports = []
    for name in names:
        try:
            f = resolve_field(name, dom)
            f.validate_on(dom)
        except GaffKornError as exc:
            if cfg.field:
                chk.add(f"verify.field[{name}]", False, str(exc))
            continue
        wanted = bcs or [b for b in BoundaryCondition if satisfies_bc(f, dom, rule, b)]
        for bc in wanted:
            tag = f"[{dom.id} {f.name} {bc.value}]"
            if not chk.add(f"verify.bc{tag}", satisfies_bc(f, dom, rule, bc)):
                continue
            rep = ineq.homogeneous_quotients(f, dom, rule, bc)
            reports.append(rep)
            tol = ineq.SLACK_RTOL * rep.constant_bound
            chk.add(f"verify.gaffney_identity{tag}", rep.identity_residuals[0] <= 1e-7)
            chk.add(f"verify.korn_identity{tag}", rep.identity_residuals[1] <= 1e-7)
            chk.add(f"verify.gaffney_bound{tag}", rep.slack_gaffney >= -tol, f"slack {rep.slack_gaffney:.6g}")
            chk.add(f"verify.korn_bound{tag}", rep.slack_korn >= -tol, f"slack {rep.slack_korn:.6g}")
            worst = min((ineq.trace_slack(rep.norms, dom, rule, e, rep.rho)
                         / max(ineq.trace_inequality(rep.norms, dom, rule, e, rep.rho)[1], 1e-300))
                        for e in eps)
            chk.add(f"verify.trace{tag}", worst >= -1e-8, f"min slack/RHS {worst:.3e}")
            extra = {"trace_min_relative_slack": float(ineq.fmt(worst))}
            try:
                cs = ineq.convexity_special_case(f, dom, rule, bc)
                scale = max(rep.norms.grad_B_L2, rep.norms.curl_B_L2 + rep.norms.div_B_L2, 1e-300)
                chk.add(f"verify.convex_case{tag}", cs >= -1e-8 * scale, f"slack {cs:.6g}")
                extra["convex_case_slack"] = float(ineq.fmt(cs))
            except DomainNotConvex:
                pass
            print(f"{'PASS' if rep.passed else 'FAIL'} {dom.id} {f.name} {bc.value}: "
                  f"q_gaffney={rep.quotient_gaffney:.10g} q_korn={rep.quotient_korn:.10g} "
                  f"C={rep.constant_bound:.10g} trace_min_rel_slack={worst:.3e}")
            _write(cfg.out, _slug(f"{dom.id}__{f.name}__{bc.value}") + ".json",
                   _dumps({**rep.as_dict(), **extra}))
    if not reports and not chk.items:
        raise ConfigError(f"no registered field satisfies a boundary condition on {dom.id}")
    csv_text = ineq.summary_csv(reports)
    _write(cfg.out, "summary.csv", csv_text)
    if not cfg.out:
        print(csv_text, end="")


def cmd_oracle(cfg: ExperimentConfig, chk: Checks) -> None:
    if not cfg.case or cfg.case == "list":
        print("\n".join(oracles.case_names()))
        return
    try:
        case = oracles.get_case(cfg.case)
    except InvalidParams as exc:
        raise ConfigError(str(exc)) from None
    checks = oracles.run_case(case)
    for c in checks:
        print(c.line())
        chk.add(f"oracle.closed_form[{case.name}.{c.name}]", c.passed, f"rel_err {c.error:.3e}")
    _write(cfg.out, f"oracle_{case.name}.json", _dumps({
        "case": case.name, "domain": domain_config_text(case.domain), "field": case.field_name,
        "bc": case.bc.value,
        "checks": [{"name": c.name, "closed_form": float(ineq.fmt(c.expected)),
                    "computed": float(ineq.fmt(c.computed)), "tol": c.tol, "passed": c.passed,
                    "provenance": c.provenance} for c in checks],
    }))


def _kinds(cfg) -> list:
    if not cfg.kind or cfg.kind == "both":
        return list(search.Kind)
    try:
        return [search.Kind.parse(cfg.kind)]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_estimate(cfg: ExperimentConfig, chk: Checks) -> None:
    dom = _domain(cfg)
    ladder = cfg.degree or ((1, 2, 3, 4, 5, 6) if dom.n == 2 else (1, 2, 3, 4))
    bcs = [BoundaryCondition.parse(b) for b in cfg.bc] if cfg.bc else list(BoundaryCondition)
    csv_parts, js = [], []
    for bc in bcs:
        for kind in _kinds(cfg):
            rep = search.estimate_constant(dom, bc, kind, ladder, cfg.order)
            tag = f"[{dom.id} {bc.value} {kind.value}]"
            chk.add(f"estimate.monotone{tag}", rep.monotone)
            chk.add(f"estimate.cap{tag}", rep.capped)
            vals = ", ".join(f"{v:.10g}" for v in rep.values)
            print(f"{dom.id} {bc.value} {kind.value}: lower bounds [{vals}] <= {rep.theorem_bound:.10g}")
            text = rep.to_csv()
            csv_parts.append(text if not csv_parts else text.split("\n", 1)[1])
            js.append(rep.as_dict())
    _write(cfg.out, "estimate.csv", "".join(csv_parts))
    _write(cfg.out, "estimate.json", _dumps({"config": cfg.provenance(), "estimates": js}))


def cmd_sweep(cfg: ExperimentConfig, chk: Checks) -> None:
    family = cfg.family or "torus"
    values = _parse_grid(cfg.grid or "1.1:3.0:0.01")
    try:
        grid = search.family_grid(family, values, cfg.n)
    except InvalidParams as exc:
        raise ConfigError(str(exc)) from None
    source = cfg.field[0] if cfg.field else "torus_gamma"
    kinds = _kinds(cfg)
    if len(kinds) != 1:
        kinds = [search.Kind.GAFFNEY]
    bc = BoundaryCondition.parse(cfg.bc[0]) if cfg.bc else BoundaryCondition.TANGENT
    degree = cfg.degree[0] if cfg.degree else 2
    res = search.sweep(family, grid, source, kinds[0], bc, degree, cfg.order, max(1, cfg.workers))
    ok = [r for r in res.rows if r.ok]
    for r in res.rows:
        if not r.ok:
            print(f"row {r.index} ({r.params}) failed: {r.error}")
    chk.add("sweep.cap", all(r.value <= r.theorem_bound + 1e-6 for r in ok))
    summary = res.as_dict()
    if ok:
        b = res.best()
        print(f"{len(ok)}/{len(res.rows)} rows ok; max {kinds[0].value} value {b.value:.10g} at {b.params}")
    _write(cfg.out, "sweep.csv", res.to_csv())
    _write(cfg.out, "sweep.json", _dumps({"config": cfg.provenance(), **summary}))
    if not cfg.out:
        print(res.to_csv(), end="")


HANDLERS = {
    "constants": cmd_constants,
    "reach": cmd_reach,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
    "estimate": cmd_estimate,
    "sweep": cmd_sweep,
}


def run(cfg: ExperimentConfig) -> int:
    chk = Checks()
    try:
        HANDLERS[cfg.command](cfg, chk)
    except (ConfigError, InvalidParams, UnsupportedDomainForSearch) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except GaffKornError as exc:
        print(f"FAILED {cfg.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    bad = chk.first_failure
    if bad is not None:
        name, _, detail = bad
        print(f"FAILED check {name}" + (f": {detail}" if detail else ""), file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gaffkorn", description=__doc__.splitlines()[0])
    p.add_argument("--manifest", action="store_true", help="print the check manifest and exit")
    sub = p.add_subparsers(dest="command")

    def common(sp):
        sp.add_argument("--config", help="key = value experiment file; flags override it")
        sp.add_argument("--n", type=int)
        sp.add_argument("--domain", help='domain block, e.g. "torus r=1 R=2"')
        sp.add_argument("--field", help="comma-separated registered field names")
        sp.add_argument("--bc", choices=["tangent", "normal"])
        sp.add_argument("--kind", choices=["gaffney", "korn", "both"])
        sp.add_argument("--order", type=int, help="quadrature order")
        sp.add_argument("--degree", help="degree ladder, e.g. 1,2,3")
        sp.add_argument("--grid", help="lo:hi:step or comma-separated values")
        sp.add_argument("--family")
        sp.add_argument("--tol", type=float)
        sp.add_argument("--epsilon-grid", dest="epsilon_grid", help="lo:hi:count (log spaced)")
        sp.add_argument("--workers", type=int)
        sp.add_argument("--out", help="directory for JSON/CSV artifacts")
        sp.add_argument("--manifest", action="store_true", help="print the check manifest and exit")

    for name in COMMANDS:
        sp = sub.add_parser(name)
        if name == "oracle":
            sp.add_argument("action", choices=["run", "list"])
            sp.add_argument("--case")
        common(sp)
    return p


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    base = {}
    if getattr(ns, "config", None):
        try:
            text = Path(ns.config).read_text()
        except OSError as exc:
            raise ConfigError(str(exc)) from None
        cfg = ExperimentConfig.parse(text)
        if cfg.command != ns.command:
            raise ConfigError(f"config is for {cfg.command!r}, not {ns.command!r}")
        base = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    over = {k: getattr(ns, k, None) for k in
            ("domain", "field", "bc", "kind", "order", "degree", "grid", "family", "n", "tol",
             "epsilon_grid", "workers", "out", "case")}
    if getattr(ns, "action", None) == "list":
        over["case"] = "list"
    merged = {**base, **{k: v for k, v in over.items() if v is not None}, "command": ns.command}
    return ExperimentConfig.from_mapping(merged)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.manifest:
        print(json.dumps(MANIFEST, indent=2))
        return 0
    if ns.command is None:
        parser.print_help()
        return 2
    try:
        cfg = config_from_args(ns)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
