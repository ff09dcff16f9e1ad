"""Monte Carlo harness: error samplers, simulation designs and metric tables.

Every replicate draws from its own counter-based (Philox) substream keyed by
``(seed, replicate index)``, so results do not depend on how replicates are
scheduled across worker processes.  Aggregation always runs in replicate
order.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .data import Dataset
from .errors import ArgumentError, DistregError, HarnessError
from .regress import DrConfig, fit
from .sparse import PenaltyConfig, select_lambda

log = logging.getLogger(__name__)

ERROR_KINDS = ("mixed_normal", "std_normal", "t3", "laplace", "gamma22", "cauchy", "exp1", "zero")
CASES = ("case1", "case2", "case3", "example2")
METHODS = ("DR", "MR", "QR")
MAX_FAILURE_RATE = 0.05

_Q_STREAM, _REP_STREAM = 0, 1


@dataclass(frozen=True)
class ErrorDist:
    """Named error law.

    ``gamma22`` is shape 2 with scale 2 (mean 4) by default;
    ``gamma_param="rate"`` switches to rate 2 (mean 1).  ``zero`` is a
    degenerate law for noiseless debugging runs.
    """

    kind: str
    gamma_param: str = "scale"

    def __post_init__(self):
        if self.kind not in ERROR_KINDS:
            raise ArgumentError(f"unknown error distribution {self.kind!r}; choose from {ERROR_KINDS}")
        if self.gamma_param not in ("scale", "rate"):
            raise ArgumentError("gamma_param must be 'scale' or 'rate'")

    @property
    def gamma_scale(self) -> float:
        return 2.0 if self.gamma_param == "scale" else 0.5


def sample_error(dist: ErrorDist, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` i.i.d. errors from ``dist`` using ``rng``."""
    if n < 1:
        raise ArgumentError("n must be positive")
    k = dist.kind
    if k == "mixed_normal":
        # 0.5 N(-2, 5^2) + 0.5 N(2, 0.5^2)
        first = rng.random(n) < 0.5
        z = rng.standard_normal(n)
        return np.where(first, -2.0 + 5.0 * z, 2.0 + 0.5 * z)
    if k == "std_normal":
        return rng.standard_normal(n)
    if k == "t3":
        return rng.standard_t(3, n)
    if k == "laplace":
        return rng.laplace(0.0, 1.0, n)
    if k == "gamma22":
        return rng.gamma(2.0, dist.gamma_scale, n)
    if k == "cauchy":
        return rng.standard_cauchy(n)
    if k == "exp1":
        return rng.exponential(1.0, n)
    return np.zeros(n)


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent Philox generator for ``(seed, *key)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class ScenarioSpec:
    """One simulation design.

    ``p`` defaults to 3 for case1/case2, 6 for case3 and 10 for example2.
    In case2/case3 the slope perturbations ``Q_j ~ U[0, 1]`` are redrawn
    every replicate unless ``fixed_q`` is set.
    """

    case: str
    dist: ErrorDist
    n: int = 100
    p: int | None = None
    reps: int = 200
    seed: int = 0
    fixed_q: bool = False

    def __post_init__(self):
        if self.case not in CASES:
            raise ArgumentError(f"unknown case {self.case!r}; choose from {CASES}")
        if isinstance(self.dist, str):
            object.__setattr__(self, "dist", ErrorDist(self.dist))
        default_p = {"case1": 3, "case2": 3, "case3": 6, "example2": 10}[self.case]
        p = default_p if self.p is None else int(self.p)
        if self.case != "example2" and p != default_p:
            raise ArgumentError(f"{self.case} has p={default_p}, got {p}")
        if self.case == "example2" and p < 4:
            raise ArgumentError("example2 needs p >= 4")
        object.__setattr__(self, "p", p)
        if self.n < 2 or self.reps < 1:
            raise ArgumentError("n must be >= 2 and reps >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ArgumentError("seed must be a 64-bit unsigned integer")

    def describe(self) -> dict:
        out = asdict(self)
        out["dist"] = self.dist.kind
        out["gamma_param"] = self.dist.gamma_param
        return out


def true_beta(spec: ScenarioSpec, rng: np.random.Generator | None = None) -> np.ndarray:
    if spec.case == "case1":
        return np.full(3, 3.0)
    if spec.case == "example2":
        return np.concatenate([[3.0, 1.5, 2.0], np.zeros(spec.p - 3)])
    q_rng = stream(spec.seed, _Q_STREAM) if spec.fixed_q or rng is None else rng
    return 3.0 - q_rng.random(spec.p)


def gen_scenario(spec: ScenarioSpec, rep_index: int) -> tuple[Dataset, np.ndarray]:
    """Dataset and true slopes of replicate ``rep_index``."""
    if not 0 <= rep_index:
        raise ArgumentError("rep_index must be non-negative")
    rng = stream(spec.seed, _REP_STREAM, rep_index)
    beta = true_beta(spec, rng)
    X = rng.standard_normal((spec.n, spec.p))
    Y = X @ beta + sample_error(spec.dist, spec.n, rng)
    return Dataset(X, Y), beta


@dataclass(frozen=True)
class SimConfig:
    dr: DrConfig = DrConfig()
    penalty: PenaltyConfig = PenaltyConfig()
    tau: float = 0.5


def selection_metrics(fits, beta_true) -> dict:
    """Support-recovery summary of sparse fits against ``beta_true``.

    Each fit is Correct (support exactly recovered), Over (support plus
    extras) or Under (a true variable missing).
    """
    fits = list(fits)
    if not fits:
        raise ArgumentError("no fits to summarize")
    beta_true = np.asarray(beta_true, dtype=float)
    support = set(np.flatnonzero(beta_true).tolist())
    correct = over = under = 0
    c_sum = ic_sum = 0
    me = []
    for f in fits:
        active = set(int(j) for j in f.active_set)
        if not support <= active:
            under += 1
        elif active == support:
            correct += 1
        else:
            over += 1
        c_sum += len(support & active)
        ic_sum += len(active - support)
        diff = np.asarray(f.beta, dtype=float) - beta_true
        me.append(float(diff @ diff))
    m = len(fits)
    return {"Correct": correct / m, "Over": over / m, "Under": under / m,
            "ME": float(np.mean(me)), "C": c_sum / m, "IC": ic_sum / m}


@dataclass
class _Rep:
    index: int
    beta_true: np.ndarray
    betas: dict
    sparse: dict
    errors: dict


def _run_one(args) -> _Rep:
    spec, methods, cfg, rep = args
    d, beta = gen_scenario(spec, rep)
    betas, sparse, errs = {}, {}, {}
    for m in methods:
        try:
            if spec.case == "example2":
                path = select_lambda(d, cfg.penalty, cfg.dr, method=m)
                sparse[m] = path.best
                b = path.best.beta
            else:
                b = fit(d, m, cfg.dr, cfg.tau).beta
            if not np.all(np.isfinite(b)):
                raise HarnessError("non-finite estimate")
            betas[m] = np.asarray(b, dtype=float)
        except (DistregError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            errs[m] = f"{type(exc).__name__}: {exc}"
    return _Rep(rep, beta, betas, sparse, errs)


@dataclass
class MetricsReport:
    spec: ScenarioSpec
    methods: tuple
    bias: dict
    mse: dict
    selection: dict = field(default_factory=dict)
    reps_completed: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def rows(self) -> list[dict]:
        scen = self.spec.describe()
        keys = {"case": scen["case"], "dist": scen["dist"], "n": scen["n"], "p": scen["p"],
                "reps": scen["reps"], "seed": scen["seed"]}
        out = []
        for m in self.methods:
            metrics = [(f"bias_{j + 1}", v) for j, v in enumerate(self.bias[m])]
            metrics.append(("MSE", self.mse[m]))
            metrics.extend(self.selection.get(m, {}).items())
            metrics.append(("reps_completed", self.reps_completed[m]))
            metrics.append(("failures", self.failures[m]))
            for name, value in metrics:
                out.append({"method": m, "metric": name, "value": value, **keys})
        return out

    def header(self) -> dict:
        return {"scenario": self.spec.describe(), "config": self.config}

    def to_csv(self) -> str:
        buf = io.StringIO()
        for line in json.dumps(self.header(), sort_keys=True, indent=1).splitlines():
            buf.write(f"# {line}\n")
        rows = self.rows()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({**r, "value": _fmt(r["value"])})
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [{**r, "value": _jsonable(r["value"])} for r in self.rows()]
        return json.dumps({**self.header(), "rows": rows}, sort_keys=True, indent=1) + "\n"

    def value(self, method: str, metric: str):
        for r in self.rows():
            if r["method"] == method and r["metric"] == metric:
                return r["value"]
        raise KeyError((method, metric))


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


def _jsonable(v):
    if isinstance(v, float) and not np.isfinite(v):
        return repr(v)
    return v


def run_replications(spec: ScenarioSpec, methods=METHODS, configs: SimConfig = SimConfig(),
                     workers: int = 1) -> MetricsReport:
    """Fit every method on every replicate and aggregate bias, MSE and selection metrics.

    Fits that raise are excluded and counted; more than 5% failures for any
    method raises :class:`HarnessError`.  Wild but finite estimates (e.g.
    least squares under Cauchy errors) are kept.
    """
    methods = tuple(dict.fromkeys(m.upper() for m in methods))
    if not methods:
        raise ArgumentError("methods must be non-empty")
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise ArgumentError(f"unknown method(s) {bad}")
    if workers < 1:
        raise ArgumentError("workers must be positive")
    jobs = [(spec, methods, configs, r) for r in range(spec.reps)]
    if workers == 1:
        reps = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reps = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))

    bias, mse, selection, done, failures = {}, {}, {}, {}, {}
    for m in methods:
        ok = [r for r in reps if m in r.betas]
        failures[m] = spec.reps - len(ok)
        for r in reps:
            if m in r.errors:
                log.warning("replicate %d, %s failed: %s", r.index, m, r.errors[m])
        if failures[m] > MAX_FAILURE_RATE * spec.reps:
            raise HarnessError(f"{m}: {failures[m]} of {spec.reps} fits failed")
        if not ok:
            raise HarnessError(f"{m}: no successful fits")
        abs_err = np.zeros(spec.p)
        sq_err = 0.0
        for r in ok:
            diff = r.betas[m] - r.beta_true
            abs_err += np.abs(diff)
            sq_err += float(diff @ diff)
        bias[m] = abs_err / len(ok)
        mse[m] = sq_err / (len(ok) * spec.p)
        done[m] = len(ok)
        if spec.case == "example2":
            sel = selection_metrics([r.sparse[m] for r in ok], ok[0].beta_true)
            selection[m] = sel
    config = {"dr": configs.dr.describe(), "penalty": asdict(configs.penalty), "tau": configs.tau,
              "methods": list(methods), "rng": "Philox, SeedSequence(seed, spawn_key=(1, rep))"}
    return MetricsReport(spec, methods, bias, mse, selection, done, failures, config)
