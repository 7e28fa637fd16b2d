"""Scenario configs: parsing, validation and the verification pipelines."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import abpverify, calculus, contact, entropy, transport
from .expr import ExprError, field_from_expr, mask_from_expr
from .mmspace import Region, SpaceError, build_model_space, load_space, space_from_dict, validate_metric

CHECKS = ("validate", "w2", "contact", "abp-verify", "laplacian-comparison", "cd-check", "fabp-check", "steiner")

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_HYPOTHESIS, EXIT_UNWRITABLE = 0, 1, 2, 3, 4


class ConfigError(ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


def bundled_dir():
    return resources.files("abplab") / "scenarios"


def bundled_scenarios():
    return sorted(p.name for p in bundled_dir().iterdir() if p.name.endswith(".json"))


def resolve_path(name):
    p = Path(name)
    if p.exists():
        return p
    for cand in (bundled_dir() / p.name, bundled_dir() / f"{p.name}.json"):
        if cand.is_file():
            return Path(str(cand))
    raise ConfigError("scenario", f"no such scenario file {name!r}")


def load_config(path):
    p = resolve_path(path)
    try:
        with open(p) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("scenario", f"invalid JSON in {p.name}: {exc.msg} (line {exc.lineno})") from None
    if not isinstance(cfg, dict):
        raise ConfigError("scenario", "top level must be an object")
    cfg.setdefault("name", p.stem)
    cfg["_base"] = str(p.parent)
    return cfg


# ---------------------------------------------------------------------------
# building blocks
# ---------------------------------------------------------------------------

def _num(cfg, key, default=None, lo=None, strict_lo=False, hi=None):
    if key not in cfg or cfg[key] is None:
        if default is None:
            raise ConfigError(key, "required parameter is missing")
        return default
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(key, f"must be a finite number, got {v!r}")
    if lo is not None and (v <= lo if strict_lo else v < lo):
        raise ConfigError(key, f"must be {'>' if strict_lo else '>='} {lo}, got {v}")
    if hi is not None and v > hi:
        raise ConfigError(key, f"must be <= {hi}, got {v}")
    return float(v)


def build_space(cfg):
    spec = cfg.get("space")
    if spec is None:
        raise ConfigError("space", "required entry is missing")
    try:
        if isinstance(spec, str):
            return load_space(Path(cfg.get("_base", ".")) / spec)
        if "file" in spec:
            return load_space(Path(cfg.get("_base", ".")) / spec["file"],
                              complete_from_edges=bool(spec.get("complete_from_edges", False)))
        if "model" in spec:
            return build_model_space(spec)
        return space_from_dict(spec, complete_from_edges=bool(spec.get("complete_from_edges", False)))
    except SpaceError as exc:
        raise ConfigError(f"space.{exc.field}" if exc.field else "space", str(exc)) from None
    except FileNotFoundError as exc:
        raise ConfigError("space", f"file not found: {exc.filename}") from None


def _nearest(space, point):
    p = np.asarray(point, dtype=float).reshape(1, -1)
    if space.coords is None or p.shape[1] != space.coords.shape[1]:
        raise ValueError("point does not match the coordinate dimension")
    d = ((space.coords - p) ** 2).sum(axis=1)
    return int(np.flatnonzero(d <= d.min() + 1e-15)[0])


def build_region(space, spec, key, kind="set"):
    if spec is None:
        raise ConfigError(key, "required entry is missing")
    try:
        if isinstance(spec, str):
            return Region(np.flatnonzero(mask_from_expr(space, spec)), kind)
        if "expr" in spec:
            return Region(np.flatnonzero(mask_from_expr(space, spec["expr"])), kind)
        if "indices" in spec:
            idx = np.asarray(spec["indices"], dtype=np.int64)
            if idx.size and (idx.min() < 0 or idx.max() >= space.n):
                raise ConfigError(key, "index out of range")
            return Region(idx, kind)
        if spec.get("interior"):
            return Region(np.flatnonzero(space.interior), kind)
        if spec.get("all"):
            return Region(np.arange(space.n), kind)
        if "point" in spec:
            return Region([_nearest(space, spec["point"])], kind)
    except (ExprError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(key, str(exc)) from None
    raise ConfigError(key, "region needs one of expr, indices, interior, all, point")


def build_field(space, cfg, key="u"):
    spec = cfg.get(key)
    if spec is None:
        raise ConfigError(key, "required entry is missing")
    try:
        if isinstance(spec, (int, float)) and not isinstance(spec, bool):
            return np.full(space.n, float(spec))
        if isinstance(spec, str):
            return field_from_expr(space, spec)
        if "expr" in spec:
            return field_from_expr(space, spec["expr"])
        if "values" in spec:
            v = np.asarray(spec["values"], dtype=float)
        elif "file" in spec:
            with open(Path(cfg.get("_base", ".")) / spec["file"]) as fh:
                v = np.asarray(json.load(fh), dtype=float)
        else:
            raise ConfigError(key, "field needs expr, values or file")
    except ExprError as exc:
        raise ConfigError(key, str(exc)) from None
    if v.shape != (space.n,):
        raise ConfigError(key, f"expected {space.n} values, got {v.shape}")
    return v


def build_measure(space, cfg, key):
    spec = cfg.get(key)
    if spec is None:
        raise ConfigError(key, "required entry is missing")
    try:
        if "uniform" in spec:
            reg = build_region(space, spec["uniform"], key)
            if len(reg) == 0:
                raise ConfigError(key, "uniform region is empty")
            return transport.ProbMeasure.uniform_on(space, reg)
        if "dirac" in spec:
            d = spec["dirac"]
            i = int(d) if isinstance(d, int) else _nearest(space, d)
            return transport.ProbMeasure.dirac(space, i)
        if "weights" in spec:
            w = np.asarray(spec["weights"], dtype=float)
            return transport.ProbMeasure(space, w / w.sum())
        if "density" in spec:
            rho = field_from_expr(space, spec["density"])
            return transport.ProbMeasure.from_density(space, np.maximum(rho, 0.0))
    except (transport.TransportError, ExprError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(key, str(exc)) from None
    raise ConfigError(key, "measure needs one of uniform, dirac, weights, density")


def _kind(cfg):
    try:
        return contact.normalize_kind(cfg.get("kind", "r2"))
    except contact.ContactError as exc:
        raise ConfigError("kind", str(exc)) from None


def _opt(cfg, key):
    v = cfg.get(key)
    return None if v is None else _num(cfg, key)


def _eps_list(cfg):
    e = cfg.get("eps")
    if e is None:
        raise ConfigError("eps", "required entry is missing")
    if isinstance(e, dict):
        h = e.get("h_multiples")
        if h is not None:
            return None, [float(k) for k in h]
        missing = [k for k in ("start", "stop", "num") if k not in e]
        if missing:
            raise ConfigError("eps", f"range form needs start, stop and num (missing {', '.join(missing)})")
        return [float(x) for x in np.linspace(e["start"], e["stop"], int(e["num"]))], None
    if not isinstance(e, list) or len(e) < 3:
        raise ConfigError("eps", "needs a list of at least three positive values")
    return [float(x) for x in e], None


# ---------------------------------------------------------------------------
# pipelines
# ---------------------------------------------------------------------------

@dataclass
class CheckResult:
    check: str
    status: str  # PASS, FAIL or HYPOTHESIS
    report: dict
    slack: float | None = None
    hypothesis: str | None = None
    message: str = ""

    def summary(self):
        extra = f" hypothesis={self.hypothesis}" if self.hypothesis else ""
        s = "" if self.slack is None else f" slack={self.slack:.6g}"
        return f"{self.status} {self.check}{s}{extra}{(' ' + self.message) if self.message else ''}"


@dataclass
class ScenarioResult:
    name: str
    checks: list = field(default_factory=list)

    @property
    def status(self):
        if any(c.status == "HYPOTHESIS" for c in self.checks):
            return "HYPOTHESIS"
        return "PASS" if all(c.status == "PASS" for c in self.checks) else "FAIL"

    @property
    def exit_code(self):
        return {"PASS": EXIT_PASS, "FAIL": EXIT_FAIL, "HYPOTHESIS": EXIT_HYPOTHESIS}[self.status]

    def to_dict(self):
        return {
            "scenario": self.name,
            "status": self.status,
            "checks": {c.check: dict(c.report, status=c.status) for c in self.checks},
        }


def _status(ok):
    return "PASS" if ok else "FAIL"


def run_validate(cfg, space):
    rep = validate_metric(space)
    return CheckResult("validate", _status(rep.ok), rep.to_dict())


def run_w2(cfg, space):
    mu0 = build_measure(space, cfg, "mu0")
    mu1 = build_measure(space, cfg, "mu1")
    sol = transport.solve_w2(mu0, mu1)
    cert = transport.certify(sol)
    rep = sol.to_dict()
    rep["certificate"] = cert.to_dict()
    return CheckResult("w2", _status(cert.ok), rep, slack=-cert.max_defect if cert.max_defect else 0.0)


def _contact_inputs(cfg, space, need_t=True):
    omega = build_region(space, cfg.get("omega"), "omega", "open")
    D = build_region(space, cfg.get("D"), "D", "vertex")
    if len(D) == 0:
        raise ConfigError("D", "vertex set is empty")
    u = build_field(space, cfg)
    kind = _kind(cfg)
    t = _num(cfg, "t", lo=0, strict_lo=True) if (need_t or kind != "r1star") else _opt(cfg, "t")
    return omega, D, u, kind, t


def run_contact(cfg, space):
    omega, D, u, kind, t = _contact_inputs(cfg, space, need_t=False)
    res = contact.compute_contact_set(space, D, omega, u, t, kind, _opt(cfg, "tol_eq"), _opt(cfg, "tol_dist"))
    rep = res.to_dict()
    ok = len(res.members) > 0
    if kind != "r1star" and ok:
        try:
            r = contact.c_concave_representative(space, D, omega, u, t, kind, contact=res)
            rep["representative"] = r.to_dict()
        except contact.RepresentativeError as exc:
            rep["representative"] = {"error": str(exc), "worst": exc.worst}
            ok = False
    return CheckResult("contact", _status(ok), rep)


def run_abp(cfg, space):
    omega, D, u, kind, t = _contact_inputs(cfg, space)
    K = _num(cfg, "K")
    N = _num(cfg, "N", lo=1, strict_lo=True)
    try:
        rep = abpverify.verify_abp(space, D, omega, u, t, K, N, kind, _opt(cfg, "tol_eq"), _opt(cfg, "tol_dist"),
                                   _opt(cfg, "tol"))
    except abpverify.HypothesisError as exc:
        return CheckResult("abp-verify", "HYPOTHESIS", {"hypothesis": exc.hypothesis, "error": str(exc)},
                           hypothesis=exc.hypothesis)
    return CheckResult("abp-verify", _status(rep.ok), rep.to_dict(), slack=rep.slack)


def run_comparison(cfg, space):
    omega, D, u, kind, t = _contact_inputs(cfg, space)
    rep = calculus.laplacian_comparison_check(space, D, omega, u, t, kind, _opt(cfg, "comparison_tol"),
                                              tol_eq=_opt(cfg, "tol_eq"), tol_dist=_opt(cfg, "tol_dist"))
    return CheckResult("laplacian-comparison", _status(rep.ok), rep.to_dict(), slack=rep.min_scaled)


def _samples(cfg):
    s = cfg.get("samples", list(entropy.DEFAULT_SAMPLES))
    if not isinstance(s, list) or not s or any(not (0 <= float(x) <= 1) for x in s):
        raise ConfigError("samples", "must be a nonempty list of fractions in [0, 1]")
    return [float(x) for x in s]


def run_cd(cfg, space):
    mu0 = build_measure(space, cfg, "mu0")
    mu1 = build_measure(space, cfg, "mu1")
    K = _num(cfg, "K")
    N = _num(cfg, "N", lo=1, strict_lo=True)
    Np = _num(cfg, "N_prime", default=N, lo=1, strict_lo=True)
    if Np < N:
        raise ConfigError("N_prime", "must be at least N")
    samples = _samples(cfg)
    tol = _opt(cfg, "tol_disc")
    kn = entropy.check_kn_convexity(mu0, mu1, K, N, samples, tol)
    cd = entropy.check_cd_inequality(mu0, mu1, K, Np, samples, tol)
    rep = {"kn_convexity": kn.to_dict(), "cd": cd.to_dict()}
    return CheckResult("cd-check", _status(kn.ok and cd.ok), rep, slack=min(kn.min_slack, cd.min_slack))


def run_fabp(cfg, space):
    omega = build_region(space, cfg.get("omega"), "omega", "open")
    mu0 = build_measure(space, cfg, "mu0")
    mu1 = build_measure(space, cfg, "mu1")
    K = _num(cfg, "K")
    N = _num(cfg, "N", lo=1, strict_lo=True)
    try:
        rep = entropy.check_functional_abp(mu0, mu1, K, N, omega, _opt(cfg, "tol_disc"))
    except entropy.EntropyError as exc:
        return CheckResult("fabp-check", "HYPOTHESIS", {"hypothesis": "mu0_in_omega", "error": str(exc)},
                           hypothesis="mu0_in_omega")
    return CheckResult("fabp-check", _status(rep.ok), rep.to_dict(), slack=rep.min_slack)


def run_steiner(cfg, space):
    omega = build_region(space, cfg.get("omega"), "omega", "open")
    H = _num(cfg, "H")
    N = _num(cfg, "N", lo=1, strict_lo=True)
    eps, mult = _eps_list(cfg)
    if mult is not None:
        eps = [m * space.h for m in mult]
    if min(eps) <= space.h:
        raise ConfigError("eps", f"all values must exceed the mesh size {space.h}")
    rep = abpverify.steiner_experiment(space, omega, H, eps, N, _opt(cfg, "sigma_band"), _opt(cfg, "r_exterior"),
                                       tol=_opt(cfg, "steiner_tol"))
    tol = rep.tolerance
    ann = min(rep.annulus_slack)
    ok = rep.annulus_ok and rep.monotone
    if rep.expansion_slack is not None:
        ok = ok and min(rep.expansion_slack) >= -tol
    return CheckResult("steiner", _status(ok), rep.to_dict(), slack=ann)


PIPELINES = {
    "validate": run_validate,
    "w2": run_w2,
    "contact": run_contact,
    "abp-verify": run_abp,
    "laplacian-comparison": run_comparison,
    "cd-check": run_cd,
    "fabp-check": run_fabp,
    "steiner": run_steiner,
}


def apply_overrides(cfg, overrides):
    cfg = dict(cfg)
    for k, v in (overrides or {}).items():
        if v is not None:
            cfg[k] = v
    return cfg


def run_config(cfg, checks=None) -> ScenarioResult:
    """Run the requested checks (default: the config's ``checks`` list)."""
    checks = checks or cfg.get("checks")
    if not checks:
        raise ConfigError("checks", "no checks requested")
    if isinstance(checks, str):
        checks = [checks]
    for c in checks:
        if c not in PIPELINES:
            raise ConfigError("checks", f"unknown check {c!r}; expected one of {CHECKS}")
    space = build_space(cfg)
    res = ScenarioResult(str(cfg.get("name", "scenario")))
    for c in checks:
        res.checks.append(PIPELINES[c](cfg, space))
    return res
