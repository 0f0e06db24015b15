"""Robust nonnegative basis-pursuit experiments, Pareto sweeps and verification runs.

A run is described by an :class:`ExperimentConfig`, which round-trips
through an INI file (section ``[vfsolve]``).  All randomness comes from
Philox streams keyed by ``(seed, stream)`` so every artifact is
reproducible from the config file alone.

Artifacts
---------
``<output_dir>/seed-<NNNN>/<misfit-slug>/signals.csv``
    columns ``index, x_true, x_hat, residual_true, residual_hat``; the
    residual columns are blank past row m, the signal columns past row n.
``<output_dir>/seed-<NNNN>/<misfit-slug>/trace.csv``
    columns ``k, tau, v, dv, tol, inner_iters`` (one row per Newton step).
``<output_dir>/seed-<NNNN>/summary.json``
    one seed, validated by :data:`SEED_SUMMARY_SCHEMA`.
``<output_dir>/summary.json``
    all seeds plus per-misfit medians, validated by :data:`SUMMARY_SCHEMA`.
``curve.csv``
    columns ``tau, v, dv_dtau, gap, iters``; blank cells mark values that
    are not available (no dual certificate or nonconvex misfit).
"""
import configparser
import csv
import json
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .errors import ConfigError, VfsolveError
from .operators import (
    STREAM_NOISE,
    STREAM_OUTLIERS,
    STREAM_SIGNAL,
    LinearOperator,
    apply,
    gaussian_ensemble,
    load_csv,
    make_rng,
)
from .pareto import ParetoOptions, solve_constrained, verify_inverse
from .penalties import Misfit, misfit_value, parse_misfit
from .problem import ProblemSpec, figure1_problem, figure1_value
from .regularizers import Regularizer, parse_regularizer, reg_value
from .spg import SpgOptions
from .value_fn import evaluate, sweep

SECTION = "vfsolve"
INSTANCES = ("bpdn", "figure1", "csv")
STREAM_VERIFY = 10

DEFAULT_MISFITS = ("least-squares", "huber:kappa=0.01", "student-t:nu=0.01")


def _parse_float_list(text: str) -> Tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    m = re.fullmatch(r"\s*([^:]+):([^:]+):(\d+)\s*", text)
    if m:
        a, b, k = float(m.group(1)), float(m.group(2)), int(m.group(3))
        return tuple(float(t) for t in np.linspace(a, b, k))
    return tuple(float(t) for t in text.split(","))


@dataclass
class ExperimentConfig:
    """Every knob of a run.  ``misfits`` holds descriptor strings."""

    instance: str = "bpdn"
    m: int = 120
    n: int = 512
    k: int = 20
    matrix_variance: float = 0.1
    noise_std: float = 0.005
    outliers: int = 5
    outlier_std: float = 2.0
    misfits: Tuple[str, ...] = DEFAULT_MISFITS
    regularizer: str = "nonneg-one-norm"
    seed: int = 1
    replicates: int = 1
    sigma: Optional[float] = None
    tau: Optional[float] = None
    taus: Tuple[float, ...] = ()
    matrix_file: str = ""
    rhs_file: str = ""
    spg_tol: float = 1e-10
    spg_max_iter: int = 20000
    newton_rtol: float = 1e-8
    newton_max_iter: int = 60
    output_dir: str = "vfsolve-out"
    workers: int = 1

    def __post_init__(self):
        self.misfits = tuple(str(s).strip() for s in self.misfits if str(s).strip())
        self.taus = tuple(float(t) for t in self.taus)
        self.validate()

    def validate(self):
        if self.instance not in INSTANCES:
            raise ConfigError(f"instance must be one of {INSTANCES}, got {self.instance!r}")
        if self.m < 1 or self.n < 1:
            raise ConfigError("m and n must be positive")
        if not 0 <= self.k <= self.n:
            raise ConfigError(f"need 0 <= k <= n, got k={self.k}, n={self.n}")
        if not 0 <= self.outliers <= self.m:
            raise ConfigError(f"need 0 <= outliers <= m, got {self.outliers}")
        if not self.matrix_variance > 0:
            raise ConfigError("matrix_variance must be positive")
        if self.noise_std < 0 or self.outlier_std < 0:
            raise ConfigError("standard deviations must be nonnegative")
        if self.replicates < 1 or self.workers < 1:
            raise ConfigError("replicates and workers must be at least 1")
        if self.sigma is not None and self.sigma < 0:
            raise ConfigError("sigma must be nonnegative")
        if self.tau is not None and self.tau < 0:
            raise ConfigError("tau must be nonnegative")
        if any(t < 0 for t in self.taus):
            raise ConfigError("taus must be nonnegative")
        if not self.misfits:
            raise ConfigError("at least one misfit is required")
        if self.instance == "csv" and not (self.matrix_file and self.rhs_file):
            raise ConfigError("instance=csv needs matrix_file and rhs_file")
        if not self.spg_tol > 0 or not self.newton_rtol > 0:
            raise ConfigError("tolerances must be positive")
        for text in self.misfits:
            parse_misfit(text)
        parse_regularizer(self.regularizer)

    def misfit_objects(self) -> List[Misfit]:
        return [parse_misfit(t) for t in self.misfits]

    def regularizer_object(self) -> Regularizer:
        return parse_regularizer(self.regularizer)

    def seeds(self) -> List[int]:
        return [self.seed + i for i in range(self.replicates)]

    def spg_options(self) -> SpgOptions:
        return SpgOptions(tol=self.spg_tol, max_iter=self.spg_max_iter)

    def pareto_options(self) -> ParetoOptions:
        return ParetoOptions(rtol=self.newton_rtol, max_iter=self.newton_max_iter,
                             spg_max_iter=self.spg_max_iter)

    # --- INI round trip

    def to_dict(self) -> Dict[str, str]:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                out[f.name] = ""
            elif f.name == "misfits":
                out[f.name] = "; ".join(v)
            elif f.name == "taus":
                out[f.name] = ", ".join(repr(t) for t in v)
            else:
                out[f.name] = repr(v) if isinstance(v, float) else str(v)
        return out

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp[SECTION] = self.to_dict()
        lines = []
        for key, value in cp[SECTION].items():
            lines.append(f"{key} = {value}")
        return f"[{SECTION}]\n" + "\n".join(lines) + "\n"

    def save(self, path):
        Path(path).write_text(self.to_ini())

    @classmethod
    def from_mapping(cls, values: Dict[str, str], base: Optional["ExperimentConfig"] = None):
        """Build from string values; keys absent from ``values`` come from ``base``."""
        kinds = {f.name: f for f in fields(cls)}
        kw = {} if base is None else {f: getattr(base, f) for f in kinds}
        for key, raw in values.items():
            key = key.strip().lower().replace("-", "_")
            if key not in kinds:
                raise ConfigError(f"unknown config key {key!r}")
            raw = raw.strip()
            try:
                if key == "misfits":
                    kw[key] = tuple(s for s in (p.strip() for p in raw.split(";")) if s)
                elif key == "taus":
                    kw[key] = _parse_float_list(raw)
                elif key in ("sigma", "tau"):
                    kw[key] = float(raw) if raw else None
                else:
                    default = kinds[key].default
                    if isinstance(default, bool):
                        kw[key] = raw.lower() in ("1", "true", "yes", "on")
                    elif isinstance(default, int):
                        kw[key] = int(raw)
                    elif isinstance(default, float):
                        kw[key] = float(raw)
                    else:
                        kw[key] = raw
            except ValueError:
                raise ConfigError(f"bad value for {key}: {raw!r}") from None
        return cls(**kw)

    @classmethod
    def from_ini(cls, text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser(interpolation=None)
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"unreadable config: {exc}") from None
        if not cp.has_section(SECTION):
            raise ConfigError(f"config needs a [{SECTION}] section")
        return cls.from_mapping(dict(cp[SECTION]))

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_ini(text)


# ---------------------------------------------------------------- instances

@dataclass(eq=False)
class InstanceBundle:
    A: LinearOperator
    x0: np.ndarray
    w: np.ndarray
    zeta: np.ndarray
    b: np.ndarray
    sigmas: Dict[str, float] = field(default_factory=dict)
    seed: int = 0


def generate_bpdn_instance(cfg: ExperimentConfig, seed: Optional[int] = None) -> InstanceBundle:
    """b = A x0 + w + zeta with a nonnegative k-sparse x0 and sparse outliers zeta.

    sigma for each misfit is rho(w + zeta), the misfit of the true error.
    """
    seed = cfg.seed if seed is None else int(seed)
    m, n = cfg.m, cfg.n
    A = gaussian_ensemble(m, n, cfg.matrix_variance, seed)
    rng = make_rng(seed, STREAM_SIGNAL)
    x0 = np.zeros(n)
    support = rng.choice(n, size=cfg.k, replace=False)
    x0[support] = np.abs(rng.standard_normal(cfg.k))
    w = cfg.noise_std * make_rng(seed, STREAM_NOISE).standard_normal(m)
    rng = make_rng(seed, STREAM_OUTLIERS)
    zeta = np.zeros(m)
    where = rng.choice(m, size=cfg.outliers, replace=False)
    vals = cfg.outlier_std * rng.standard_normal(cfg.outliers)
    # a zero draw would leave fewer nonzeros than configured
    vals[vals == 0.0] = cfg.outlier_std if cfg.outlier_std > 0 else 0.0
    zeta[where] = vals
    b = apply(A, x0) + w + zeta
    sigmas = {text: misfit_value(parse_misfit(text), w + zeta) for text in cfg.misfits}
    return InstanceBundle(A, x0, w, zeta, b, sigmas, seed)


def build_problem(cfg: ExperimentConfig, misfit: Optional[Misfit] = None,
                  seed: Optional[int] = None) -> Tuple[ProblemSpec, Optional[InstanceBundle]]:
    """The configured instance as a :class:`ProblemSpec` (plus the bundle for bpdn)."""
    misfit = misfit or cfg.misfit_objects()[0]
    if cfg.instance == "figure1":
        return figure1_problem().with_misfit(misfit), None
    phi = cfg.regularizer_object()
    if cfg.instance == "csv":
        try:
            A = load_csv(cfg.matrix_file)
            b = np.atleast_1d(np.loadtxt(cfg.rhs_file, delimiter=",", ndmin=1))
        except OSError as exc:
            raise ConfigError(f"cannot read instance files: {exc}") from None
        return ProblemSpec(A, b, misfit, phi), None
    bundle = generate_bpdn_instance(cfg, seed)
    return ProblemSpec(bundle.A, bundle.b, misfit, phi), bundle


# ---------------------------------------------------------------- metrics and files

def slug(text: str) -> str:
    return re.sub(r"[^a-z0-9.]+", "-", text.lower()).strip("-")


def support_scores(x_true, x_hat, rel_threshold: float = 1e-3):
    """Precision and recall of the estimated support |x_hat| > rel_threshold*||x_hat||_inf.

    Either score is ``None`` when its denominator is empty.
    """
    x_true, x_hat = np.asarray(x_true), np.asarray(x_hat)
    thresh = rel_threshold * float(np.max(np.abs(x_hat), initial=0.0))
    est = np.abs(x_hat) > thresh
    true = x_true != 0
    hits = int(np.sum(est & true))
    precision = hits / int(est.sum()) if est.any() else None
    recall = hits / int(true.sum()) if true.any() else None
    return precision, recall


def _fmt(v):
    if v is None:
        return ""
    v = float(v)
    return "" if math.isnan(v) else repr(v)


def write_trace_csv(path, trace):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["k", "tau", "v", "dv", "tol", "inner_iters"])
        for r in trace.rows:
            wr.writerow([r.k, _fmt(r.tau), _fmt(r.v), _fmt(r.dv), _fmt(r.tol), r.inner_iters])


def write_signals_csv(path, x_true, x_hat, res_true, res_hat):
    cols = [np.asarray(c) for c in (x_true, x_hat, res_true, res_hat)]
    rows = max(len(c) for c in cols)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["index", "x_true", "x_hat", "residual_true", "residual_hat"])
        for i in range(rows):
            wr.writerow([i] + [_fmt(c[i]) if i < len(c) else "" for c in cols])


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def write_json(path, payload):
    Path(path).write_text(json.dumps(payload, indent=2, allow_nan=False, default=_json_default) + "\n")


_NUM_OR_NULL = {"type": ["number", "null"]}

RUN_SCHEMA = {
    "type": "object",
    "required": ["misfit", "status", "sigma", "tau", "relative_error", "precision", "recall",
                 "newton_iterations", "inner_iterations", "error"],
    "properties": {
        "misfit": {"type": "string"},
        "status": {"type": "string"},
        "sigma": {"type": "number"},
        "tau": _NUM_OR_NULL,
        "relative_error": _NUM_OR_NULL,
        "precision": _NUM_OR_NULL,
        "recall": _NUM_OR_NULL,
        "newton_iterations": {"type": "integer", "minimum": 0},
        "inner_iterations": {"type": "integer", "minimum": 0},
        "error": {"type": ["string", "null"]},
    },
}

SEED_SUMMARY_SCHEMA = {
    "type": "object",
    "required": ["seed", "runs"],
    "properties": {
        "seed": {"type": "integer"},
        "runs": {"type": "array", "items": RUN_SCHEMA},
    },
}

SUMMARY_SCHEMA = {
    "type": "object",
    "required": ["config", "seeds", "aggregate"],
    "properties": {
        "config": {"type": "object", "additionalProperties": {"type": "string"}},
        "seeds": {"type": "array", "items": SEED_SUMMARY_SCHEMA},
        "aggregate": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["median_error", "mean_error", "completed", "failed"],
                "properties": {
                    "median_error": _NUM_OR_NULL,
                    "mean_error": _NUM_OR_NULL,
                    "completed": {"type": "integer"},
                    "failed": {"type": "integer"},
                },
            },
        },
    },
}


# ---------------------------------------------------------------- experiment runner

def _run_one(cfg: ExperimentConfig, seed: int, misfit_text: str, out_dir: Optional[str]) -> dict:
    rho = parse_misfit(misfit_text)
    problem, bundle = build_problem(cfg, rho, seed)
    if bundle is None:
        raise ConfigError("the experiment verb needs instance=bpdn")
    sigma = cfg.sigma if cfg.sigma is not None else bundle.sigmas[misfit_text]
    record = {"misfit": misfit_text, "status": "failed", "sigma": float(sigma), "tau": None,
              "relative_error": None, "precision": None, "recall": None,
              "newton_iterations": 0, "inner_iterations": 0, "error": None}
    try:
        x, trace = solve_constrained(problem, sigma, cfg.pareto_options())
    except (VfsolveError, ArithmeticError, ValueError) as exc:
        record["error"] = f"{type(exc).__name__}: {exc}"
        return record
    norm0 = float(np.linalg.norm(bundle.x0))
    err = float(np.linalg.norm(x - bundle.x0)) / norm0 if norm0 > 0 else float(np.linalg.norm(x))
    precision, recall = support_scores(bundle.x0, x)
    record.update(status=trace.status, tau=float(trace.tau), relative_error=err,
                  precision=precision, recall=recall, newton_iterations=trace.iterations,
                  inner_iterations=trace.inner_iterations)
    if out_dir is not None:
        d = Path(out_dir) / f"seed-{seed:04d}" / slug(misfit_text)
        d.mkdir(parents=True, exist_ok=True)
        write_trace_csv(d / "trace.csv", trace)
        write_signals_csv(d / "signals.csv", bundle.x0, x, bundle.w + bundle.zeta, problem.residual(x))
    return record


def _run_job(args):
    return _run_one(*args)


def aggregate_runs(seed_summaries: List[dict], misfits) -> dict:
    agg = {}
    for text in misfits:
        errs = [r["relative_error"] for s in seed_summaries for r in s["runs"]
                if r["misfit"] == text and r["relative_error"] is not None]
        failed = sum(1 for s in seed_summaries for r in s["runs"]
                     if r["misfit"] == text and r["relative_error"] is None)
        agg[text] = {"median_error": float(np.median(errs)) if errs else None,
                     "mean_error": float(np.mean(errs)) if errs else None,
                     "completed": len(errs), "failed": failed}
    return agg


def ordering_check(summary: dict, margin: float = 0.02) -> dict:
    """Median-error ordering: huber below least-squares, student-t at most huber + margin."""
    by_kind = {}
    for text, stats in summary["aggregate"].items():
        by_kind.setdefault(parse_misfit(text).kind, stats["median_error"])
    ls, hub, st = (by_kind.get(k) for k in ("least-squares", "huber", "student-t"))
    out = {"least-squares": ls, "huber": hub, "student-t": st}
    out["huber_below_least_squares"] = None if ls is None or hub is None else bool(hub < ls)
    out["student_t_within_margin"] = None if hub is None or st is None else bool(st <= hub + margin)
    return out


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> dict:
    """Solve the residual-constrained problem for every (seed, misfit) pair.

    Returns the aggregate summary; with ``write=True`` it and the per-run
    artifacts are written below ``cfg.output_dir``.  A failing misfit is
    recorded with ``status="failed"`` and the run continues.
    """
    if cfg.instance != "bpdn":
        raise ConfigError("the experiment verb needs instance=bpdn")
    out_dir = cfg.output_dir if write else None
    jobs = [(cfg, seed, text, out_dir) for seed in cfg.seeds() for text in cfg.misfits]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(_run_job, jobs))
    else:
        records = [_run_job(j) for j in jobs]
    seeds = []
    it = iter(records)
    for seed in cfg.seeds():
        runs = [next(it) for _ in cfg.misfits]
        seeds.append({"seed": seed, "runs": runs})
    summary = {"config": cfg.to_dict(), "seeds": seeds, "aggregate": aggregate_runs(seeds, cfg.misfits)}
    if write:
        root = Path(cfg.output_dir)
        for s in seeds:
            d = root / f"seed-{s['seed']:04d}"
            d.mkdir(parents=True, exist_ok=True)
            write_json(d / "summary.json", s)
        write_json(root / "summary.json", summary)
    return summary


# ---------------------------------------------------------------- Pareto curve

@dataclass
class CurveRow:
    tau: float
    v: float
    dv_dtau: Optional[float]
    gap: Optional[float]
    iters: int


def pareto_curve(problem: ProblemSpec, taus, tol: float = 1e-10,
                 opts: Optional[SpgOptions] = None) -> List[CurveRow]:
    """Sample v and dv/dtau along ``taus`` with warm starts.

    At tau = 0 the reported slope is the right derivative (the gauge
    multiplier); it is blank where no multiplier is available.
    """
    rows = []
    for s in sweep(problem, taus, tol, opts):
        slope = 0.0 - s.mu if s.u is not None and np.isfinite(s.mu) else None
        rows.append(CurveRow(s.tau, s.v, slope, s.gap, s.iterations))
    return rows


def write_curve_csv(path, rows: List[CurveRow]):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["tau", "v", "dv_dtau", "gap", "iters"])
        for r in rows:
            wr.writerow([_fmt(r.tau), _fmt(r.v), _fmt(r.dv_dtau), _fmt(r.gap), r.iters])


def read_curve_csv(path) -> List[dict]:
    with open(path, newline="") as fh:
        return [{k: (float(v) if v != "" else None) for k, v in row.items()}
                for row in csv.DictReader(fh)]


def default_taus(problem: ProblemSpec, points: int = 7) -> Tuple[float, ...]:
    """A grid from 0 to a budget that reaches the flat part of the curve (or 4 for the figure1 instance)."""
    if problem.n == 2 and problem.m == 2 and np.array_equal(problem.b, [2.0, 1.0]):
        return tuple(float(t) for t in np.linspace(0.0, 3.0, points))
    x_ls, *_ = np.linalg.lstsq(problem.A.to_dense(), problem.b, rcond=None)
    top = reg_value(problem.regularizer, np.maximum(x_ls, 0) if problem.regularizer.kind == "nonneg-one-norm"
                    else x_ls)
    return tuple(float(t) for t in np.linspace(0.0, max(top, 1.0), points))


# ---------------------------------------------------------------- verification

def _default_hooks():
    from . import calculus, oracle, penalties, regularizers
    return {
        "recover_mu": calculus.recover_mu,
        "project_level_set": regularizers.project_level_set,
        "support_level_set": regularizers.support_level_set,
        "misfit_conjugate": penalties.misfit_conjugate,
        "evaluate": evaluate,
        "verify_inverse": verify_inverse,
        "oracle": oracle,
    }


def _random_tiny_cases(rng, count):
    """(phi, s, tau) triples over the catalog, with a share of cone-branch points."""
    from .regularizers import (
        huber_qs,
        nonneg_one_norm,
        one_norm,
        two_norm,
        vapnik_affine_qs,
    )
    out = []
    for i in range(count):
        n = int(rng.integers(1, 5))
        tau = float(np.exp(rng.uniform(np.log(0.05), np.log(5.0))))
        s = rng.standard_normal(n) * float(np.exp(rng.uniform(-2, 2)))
        kind = i % 5
        if kind == 0:
            phi = one_norm()
        elif kind == 1:
            phi = nonneg_one_norm()
            if i % 3 == 0:
                s = -np.abs(s)  # normal cone of the orthant: multiplier 0
        elif kind == 2:
            phi = two_norm(tuple(range(n)) if i % 2 else ())
            if i % 4 == 2:
                s = -np.abs(s)
        elif kind == 3:
            phi = huber_qs(float(np.exp(rng.uniform(-1, 1))))
        else:
            phi = vapnik_affine_qs(n, float(rng.uniform(0.0, 1.0)))
        out.append((phi, s, tau))
    return out


def verify_all(cfg: ExperimentConfig, hooks: Optional[Dict[str, Callable]] = None,
               cases: int = 40) -> dict:
    """Oracle comparison suite plus inverse-function checks.

    ``hooks`` replaces library routines by name (``recover_mu``,
    ``project_level_set``, ``support_level_set``, ``misfit_conjugate``,
    ``evaluate``, ``verify_inverse``) so that a deliberately broken build
    can be fed through the same suite.  Returns ``{"checks": [...],
    "passed": bool}``; failures are entries, never exceptions.
    """
    h = _default_hooks()
    h.update(hooks or {})
    orc = h["oracle"]
    rng = make_rng(cfg.seed, STREAM_VERIFY)
    checks = []

    def add(report):
        checks.append(report.to_dict() if hasattr(report, "to_dict") else report)

    def guarded(name, fn):
        try:
            fn()
        except Exception as exc:  # a crash is a failed check, not an abort
            checks.append({"name": name, "oracle": "nan", "library": "nan", "abs_err": "inf",
                           "rel_err": "inf", "tol": 0.0, "passed": False,
                           "error": f"{type(exc).__name__}: {exc}"})

    # figure1 values against the brute-force grid and the closed form
    fig = figure1_problem()

    def fig_values():
        for tau in (0.0, 0.5, 1.0, 2.0, 3.5):
            lib = h["evaluate"](fig, tau, 1e-12).v
            add(orc.compare(f"figure1.value[tau={tau}].closed_form", figure1_value(tau), lib, 1e-6))
        for tau in (0.5, 2.0):
            add(orc.compare(f"figure1.value[tau={tau}].grid",
                            orc.brute_force_value(fig, tau, orc.GridSpec(step=1e-2)),
                            h["evaluate"](fig, tau, 1e-12).v, 1e-6))
    guarded("figure1.value", fig_values)

    # multipliers
    def mus():
        for i, (phi, s, tau) in enumerate(_random_tiny_cases(rng, cases)):
            lib, _ = h["recover_mu"](phi, s, tau)
            add(orc.compare(f"mu_grid[{i}:{phi.kind}]", orc.mu_grid_oracle(phi, s, tau), lib, 1e-4))
    guarded("mu_grid", mus)

    # projections and support functions on polyhedral level sets
    def projections():
        from .regularizers import nonneg_one_norm, one_norm
        for i in range(cases):
            phi = one_norm() if i % 2 else nonneg_one_norm()
            n = int(rng.integers(1, 7))
            x = 2.0 * rng.standard_normal(n)
            tau = float(rng.uniform(0.0, 3.0))
            add(orc.compare(f"projection[{i}:{phi.kind}]", orc.projection_qp_oracle(phi, x, tau),
                            h["project_level_set"](phi, x, tau), 1e-8, relative=False))
            z = rng.standard_normal(n)
            if tau > 0:
                add(orc.compare(f"support[{i}:{phi.kind}]", orc.support_vertex_oracle(phi, z, tau),
                                h["support_level_set"](phi, z, tau), 1e-8))
    guarded("projection", projections)

    # misfit conjugates against a numerical supremum
    def conjugates():
        for i, rho in enumerate(cfg.misfit_objects() + [Misfit("vapnik", epsilon=0.5)]):
            if not rho.convex:
                continue
            bound = rho.kappa if rho.kind == "huber" else 1.0
            u = rng.uniform(-0.9, 0.9, size=3) * (bound if rho.kind in ("huber", "vapnik") else 2.0)
            add(orc.compare(f"conjugate[{i}:{rho.kind}]", orc.conjugate_sup_oracle(rho, u),
                            h["misfit_conjugate"](rho, u), 1e-6))
    guarded("conjugate", conjugates)

    # derivative, duality gap and inverse function on the configured instance
    def instance_checks():
        for rho in cfg.misfit_objects():
            problem, bundle = build_problem(cfg, rho)
            if bundle is not None:
                tau = 0.5 * reg_value(problem.regularizer, bundle.x0)
            elif cfg.instance == "figure1":
                tau = 2.0
            else:
                tau = 0.5 * reg_value(problem.regularizer,
                                      np.linalg.lstsq(problem.A.to_dense(), problem.b, rcond=None)[0])
            tag = f"{cfg.instance}:{rho}"
            s = h["evaluate"](problem, tau, 1e-10)
            if rho.convex and s.gap is not None:
                checks.append({"name": f"gap[{tag}]", "oracle": 0.0, "library": float(s.gap),
                               "abs_err": abs(float(s.gap)), "rel_err": abs(float(s.gap)),
                               "tol": 1e-6 * (1 + s.v), "passed": bool(abs(s.gap) <= 1e-6 * (1 + s.v))})
            if rho.convex and s.differentiable and rho.smooth:
                fd = orc.fd_derivative(problem, tau, h=1e-4 * max(1.0, tau), tol=1e-11)
                add(orc.compare(f"fd_derivative[{tag}]", fd, -s.mu, 1e-3))
            inv = h["verify_inverse"](problem, tau, 1e-10, method="root")
            if inv.applicable:
                rep = orc.compare(f"inverse[{tag}]", tau, inv.tau_back, 1e-5).to_dict()
                if not rho.convex:
                    # both sides come from local solves, which need not be global
                    rep["advisory"] = True
                checks.append(rep)
        inv = h["verify_inverse"](fig, 2.0, 1e-12)
        add(orc.compare("inverse[figure1]", 2.0, inv.tau_back, 1e-6, relative=False))
        for i in range(3):
            problem = small_student_t_problem(cfg.seed * 1000 + i)
            tau = 0.5 * reg_value(problem.regularizer, np.linalg.pinv(problem.A.to_dense()) @ problem.b)
            inv = h["verify_inverse"](problem, tau, 1e-12)
            add(orc.compare(f"inverse[small-student-t:{i}]", tau,
                            inv.tau_back if inv.applicable else np.nan, 1e-5))
    guarded("instance", instance_checks)

    counted = [c for c in checks if not c.get("advisory")]
    return {"checks": checks, "passed": bool(counted) and all(c["passed"] for c in counted)}


def small_student_t_problem(seed: int, m: int = 12, n: int = 8, nu: float = 4.0) -> ProblemSpec:
    """A small one-norm problem whose residuals stay where log(1 + r^2/nu) is convex.

    ||b||_inf is scaled to sqrt(nu)/2, so every residual met on the way
    from x = 0 is small and local solves behave like global ones.
    """
    from .penalties import student_t
    from .regularizers import one_norm
    rng = make_rng(seed, STREAM_VERIFY + 1)
    A = rng.standard_normal((m, n)) / np.sqrt(m)
    b = rng.standard_normal(m)
    b *= 0.5 * np.sqrt(nu) / np.max(np.abs(b))
    return ProblemSpec(LinearOperator.from_matrix(A), b, student_t(nu), one_norm())
