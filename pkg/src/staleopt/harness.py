"""Experiment runner: configs in, deterministic records and CSV/JSON out.

A TOML config declares the problem, feasible set, algorithm, delay source,
and run length; ``run`` executes one combination, ``sweep`` executes the
Cartesian product of the declared axes (learning rates and/or constant
delays), and ``compare`` reports paired final metrics of two records.

Outputs per run: one CSV with columns t, excess_loss, accuracy, eta, tau
(byte-identical across repeated runs of the same config and seed) and one
JSON summary (which also carries wall time, so it is not byte-stable).
Excess loss is measured against a deterministic projected-gradient
reference optimum, computed once per (problem, domain) and cached under
the config sub-hash.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import rng as rngmod
from .anytime import anytime_run, optimistic_anytime_run
from .baselines import ogd_delayed_run
from .datasets import Dataset, load_csv, load_idx, synth_classification
from .delays import DelaySchedule, ServiceSpec
from .domains import make_domain
from .errors import ConfigurationError, InvalidComparison
from .learners import OgdLearner, OptimisticOgd, StepRule, WeightSchedule
from .problems import Logistic, NoiseModel, Problem, Quadratic, constrained_optimum
from .records import RunRecord
from .strongly_convex import sc_delayed_run, sc_run

ALGORITHMS = (
    "sgd-constant",        # constant-rate projected SGD at the iterates
    "ogd-appendix-c",      # tuned 1/sqrt(t) schedule; needs 2G^2+2sigma^2
    "anytime-sgd",         # averaged queries + decaying-rate OGD
    "optimistic-anytime",  # averaged queries + optimistic OGD (only needs D)
    "sc-optimistic",       # strongly convex, undelayed
    "sc-optimistic-delayed",
)

_DEFAULT_WEIGHTS = {
    "sgd-constant": "uniform",
    "ogd-appendix-c": "uniform",
    "anytime-sgd": "linear",
    "optimistic-anytime": "linear",
    "sc-optimistic": "quadratic",
    "sc-optimistic-delayed": "quadratic",
}

# dotted key -> (type, required). Lists are type-checked elementwise on use.
CONFIG_SCHEMA = {
    "problem.kind": (str, True),
    "problem.dimension": (int, False),
    "problem.smoothness": (float, False),
    "problem.strong_convexity": (float, False),
    "problem.b_scale": (float, False),
    "problem.structure_seed": (int, False),
    "problem.classes": (int, False),
    "problem.regularization": (float, False),
    "problem.reference_value": (float, False),
    "problem.reference_tolerance": (float, False),
    "problem.noise.kind": (str, False),
    "problem.noise.sigma": (float, False),
    "problem.noise.batch_size": (int, False),
    "problem.dataset.source": (str, False),
    "problem.dataset.dimension": (int, False),
    "problem.dataset.train_size": (int, False),
    "problem.dataset.test_size": (int, False),
    "problem.dataset.separation": (float, False),
    "problem.dataset.seed": (int, False),
    "problem.dataset.path": (str, False),
    "problem.dataset.test_path": (str, False),
    "problem.dataset.label_column": (int, False),
    "problem.dataset.header": (bool, False),
    "problem.dataset.images": (str, False),
    "problem.dataset.labels": (str, False),
    "problem.dataset.test_images": (str, False),
    "problem.dataset.test_labels": (str, False),
    "domain.kind": (str, True),
    "domain.radius": (float, False),
    "domain.center": (list, False),
    "domain.lower": (list, False),
    "domain.upper": (list, False),
    "domain.scale": (float, False),
    "domain.normals": (list, False),
    "domain.offsets": (list, False),
    "algorithm.name": (str, True),
    "algorithm.weights": (str, False),
    "algorithm.learning_rate": (float, False),
    "algorithm.gbound_sq": (float, False),
    "algorithm.strong_convexity": (float, False),
    "delays.kind": (str, True),
    "delays.value": (int, False),
    "delays.sequence": (list, False),
    "delays.mu_log": (float, False),
    "delays.sigma_log": (float, False),
    "delays.lo": (int, False),
    "delays.hi": (int, False),
    "delays.workers": (int, False),
    "delays.service.kind": (str, False),
    "delays.service.value": (int, False),
    "delays.service.mu_log": (float, False),
    "delays.service.sigma_log": (float, False),
    "run.T": (int, True),
    "run.seed": (int, True),
    "run.record_every": (int, False),
    "run.history_bound": (int, False),
    "sweep.learning_rates": (list, False),
    "sweep.delays": (list, False),
}


def load_config(path) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _flatten(cfg: dict, prefix="") -> dict:
    out = {}
    for key, val in cfg.items():
        dotted = f"{prefix}{key}"
        if isinstance(val, dict):
            out.update(_flatten(val, dotted + "."))
        else:
            out[dotted] = val
    return out


def _set_dotted(cfg: dict, dotted: str, value):
    parts = dotted.split(".")
    node = cfg
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigurationError(f"config key {dotted!r} conflicts with a scalar")
    node[parts[-1]] = value


def _coerce(dotted: str, raw: str):
    expected, _ = CONFIG_SCHEMA[dotted]
    if expected is bool:
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ConfigurationError(f"cannot parse boolean for {dotted!r}: {raw!r}")
    if expected is int:
        try:
            return int(raw)
        except ValueError:
            raise ConfigurationError(f"cannot parse integer for {dotted!r}: {raw!r}") from None
    if expected is float:
        try:
            return float(raw)
        except ValueError:
            raise ConfigurationError(f"cannot parse number for {dotted!r}: {raw!r}") from None
    if expected is list:
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            raise ConfigurationError(f"cannot parse list for {dotted!r}: {raw!r}") from None
        if not isinstance(value, list):
            raise ConfigurationError(f"{dotted!r} expects a list, got {value!r}")
        return value
    return raw


def apply_overrides(cfg: dict, overrides) -> dict:
    """Apply ``key.path=value`` overrides, type-checked against the schema."""
    out = json.loads(json.dumps(cfg))  # deep copy of plain data
    for item in overrides or ():
        if "=" not in item:
            raise ConfigurationError(f"override must look like key=value, got {item!r}")
        dotted, raw = item.split("=", 1)
        dotted = dotted.strip()
        if dotted not in CONFIG_SCHEMA:
            raise ConfigurationError(f"unknown config key {dotted!r}")
        _set_dotted(out, dotted, _coerce(dotted, raw.strip()))
    return out


def validate_config(cfg: dict) -> dict:
    """Check key names, types, and per-algorithm required parameters."""
    flat = _flatten(cfg)
    for dotted, value in flat.items():
        if dotted not in CONFIG_SCHEMA:
            raise ConfigurationError(f"unknown config key {dotted!r}")
        expected, _ = CONFIG_SCHEMA[dotted]
        if expected is float and isinstance(value, (int, float)) and not isinstance(value, bool):
            continue
        if not isinstance(value, expected) or isinstance(value, bool) != (expected is bool):
            raise ConfigurationError(
                f"config key {dotted!r} expects {expected.__name__}, got {value!r}"
            )
    for dotted, (_, required) in CONFIG_SCHEMA.items():
        if required and dotted not in flat:
            raise ConfigurationError(f"missing required config key {dotted!r}")

    algo = cfg["algorithm"]["name"]
    if algo not in ALGORITHMS:
        raise ConfigurationError(
            f"algorithm.name must be one of {ALGORITHMS}, got {algo!r}"
        )
    if algo in ("sgd-constant", "anytime-sgd") and "learning_rate" not in cfg["algorithm"]:
        raise ConfigurationError(f"{algo} requires algorithm.learning_rate")
    if algo.startswith("sc-"):
        has_h = "strong_convexity" in cfg["algorithm"] or \
            "strong_convexity" in cfg.get("problem", {}) or \
            float(cfg.get("problem", {}).get("regularization", 0.0)) > 0
        if not has_h:
            raise ConfigurationError(f"{algo} requires algorithm.strong_convexity")
    if cfg["run"]["T"] < 1:
        raise ConfigurationError("run.T must be >= 1")
    if cfg["run"].get("record_every", 10) < 1:
        raise ConfigurationError("run.record_every must be >= 1")
    return cfg


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=repr)
    return hashlib.sha256(canon.encode()).hexdigest()


def _problem_hash(cfg: dict) -> str:
    sub = {"problem": cfg.get("problem", {}), "domain": cfg.get("domain", {})}
    return config_hash(sub)


# --- builders -----------------------------------------------------------------


def build_noise(cfg: dict) -> NoiseModel:
    noise = cfg.get("problem", {}).get("noise", {})
    return NoiseModel(
        kind=noise.get("kind", "none"),
        sigma=float(noise.get("sigma", 0.0)),
        batch_size=int(noise.get("batch_size", 0)),
    )


def _build_domain(cfg: dict, dim: int):
    dom = dict(cfg["domain"])
    dom.setdefault("dimension", dim)
    kind = dom.pop("kind")
    return make_domain(kind, **dom)


def _dataset_from_config(ds_cfg: dict) -> tuple[Dataset, Dataset | None]:
    source = ds_cfg.get("source", "synthetic")
    if source == "synthetic":
        d = int(ds_cfg.get("dimension", 20))
        train = int(ds_cfg.get("train_size", 1000))
        test = int(ds_cfg.get("test_size", 0))
        classes = int(ds_cfg.get("classes", 0)) or None
        sep = float(ds_cfg.get("separation", 3.0))
        seed = int(ds_cfg.get("seed", 0))
        full = synth_classification(d, train + test, classes or 2, sep, seed)
        if test:
            return full.subset(slice(0, train)), full.subset(slice(train, train + test))
        return full, None
    if source == "csv":
        train = load_csv(ds_cfg["path"], label_column=int(ds_cfg.get("label_column", 0)),
                         header=bool(ds_cfg.get("header", False)))
        holdout = None
        if "test_path" in ds_cfg:
            holdout = load_csv(ds_cfg["test_path"],
                               label_column=int(ds_cfg.get("label_column", 0)),
                               header=bool(ds_cfg.get("header", False)))
        return train, holdout
    if source == "idx":
        train = load_idx(ds_cfg["images"], ds_cfg["labels"])
        holdout = None
        if "test_images" in ds_cfg:
            holdout = load_idx(ds_cfg["test_images"], ds_cfg["test_labels"])
        return train, holdout
    raise ConfigurationError(f"unknown dataset source {source!r}")


def build_problem(cfg: dict) -> Problem:
    pcfg = cfg["problem"]
    noise = build_noise(cfg)
    if pcfg["kind"] == "quadratic":
        d = int(pcfg.get("dimension", 10))
        lmax = float(pcfg.get("smoothness", 1.0))
        lmin = float(pcfg.get("strong_convexity", lmax))
        if not 0 <= lmin <= lmax:
            raise ConfigurationError(
                "problem needs 0 <= strong_convexity <= smoothness")
        gen = rngmod.generator(int(pcfg.get("structure_seed", 0)), "quadratic-structure", d)
        basis, upper = np.linalg.qr(gen.normal(size=(d, d)))
        basis = basis * np.sign(np.diag(upper))
        eigs = np.linspace(lmin, lmax, d)
        matrix = (basis * eigs) @ basis.T
        matrix = 0.5 * (matrix + matrix.T)
        b_scale = float(pcfg.get("b_scale", 0.0))
        if b_scale:
            direction = gen.normal(size=d)
            linear = b_scale * direction / np.linalg.norm(direction)
        else:
            linear = np.zeros(d)
        domain = _build_domain(cfg, d)
        return Quadratic(matrix=matrix, linear=linear, domain=domain, noise=noise)
    if pcfg["kind"] == "logistic":
        ds_cfg = dict(pcfg.get("dataset", {}))
        ds_cfg.setdefault("classes", pcfg.get("classes", 2))
        train, holdout = _dataset_from_config(ds_cfg)
        classes = int(pcfg.get("classes", train.class_count))
        domain = _build_domain(cfg, classes * train.feature_count)
        return Logistic(
            dataset=train, classes=classes,
            regularization=float(pcfg.get("regularization", 0.0)),
            domain=domain, noise=noise, holdout=holdout,
        )
    raise ConfigurationError(f"unknown problem kind {pcfg['kind']!r}")


def build_schedule(cfg: dict) -> DelaySchedule:
    dcfg = cfg["delays"]
    service_cfg = dcfg.get("service", {})
    service = ServiceSpec(
        kind=service_cfg.get("kind", "constant"),
        value=int(service_cfg.get("value", 1)),
        mu_log=float(service_cfg.get("mu_log", 0.0)),
        sigma_log=float(service_cfg.get("sigma_log", 0.0)),
    )
    return DelaySchedule(
        kind=dcfg["kind"],
        value=int(dcfg.get("value", 0)),
        sequence=tuple(dcfg.get("sequence", ())),
        mu_log=float(dcfg.get("mu_log", 0.0)),
        sigma_log=float(dcfg.get("sigma_log", 0.0)),
        lo=int(dcfg.get("lo", 0)),
        hi=int(dcfg.get("hi", 0)),
        workers=int(dcfg.get("workers", 1)),
        service=service,
    )


_REFERENCE_CACHE: dict[str, float] = {}


def reference_value(cfg: dict, problem: Problem) -> float:
    if "reference_value" in cfg["problem"]:
        return float(cfg["problem"]["reference_value"])
    key = _problem_hash(cfg)
    if key not in _REFERENCE_CACHE:
        tol = float(cfg["problem"].get("reference_tolerance", 1e-9))
        _, fstar = constrained_optimum(problem, tolerance=tol)
        _REFERENCE_CACHE[key] = fstar
    return _REFERENCE_CACHE[key]


# --- run / sweep / compare ----------------------------------------------------


def _strong_convexity_for(cfg: dict, problem: Problem) -> float:
    acfg = cfg["algorithm"]
    if "strong_convexity" in acfg:
        return float(acfg["strong_convexity"])
    if problem.strong_convexity:
        return float(problem.strong_convexity)
    raise ConfigurationError("algorithm.strong_convexity is required")


def _gbound_sq_for(cfg: dict, problem: Problem) -> float:
    acfg = cfg["algorithm"]
    if "gbound_sq" in acfg:
        return float(acfg["gbound_sq"])
    if problem.grad_bound is not None and problem.noise_variance is not None:
        return 2.0 * problem.grad_bound**2 + 2.0 * problem.noise_variance
    raise ConfigurationError(
        "ogd-appendix-c needs algorithm.gbound_sq (= 2G^2 + 2 sigma^2) or "
        "problem metadata to derive it"
    )


def run_config(cfg: dict, *, audit: bool = False, precomputed_reference=None
               ) -> RunRecord:
    """Execute one resolved config; deterministic given (config, seed)."""
    validate_config(cfg)
    problem = build_problem(cfg)
    schedule = build_schedule(cfg)
    algo = cfg["algorithm"]["name"]
    weights = WeightSchedule(cfg["algorithm"].get("weights", _DEFAULT_WEIGHTS[algo]))
    T = int(cfg["run"]["T"])
    seed = int(cfg["run"]["seed"])
    record_every = int(cfg["run"].get("record_every", 10))
    history_bound = cfg["run"].get("history_bound")
    reference = (precomputed_reference if precomputed_reference is not None
                 else reference_value(cfg, problem))
    accuracy_fn = None
    if isinstance(problem, Logistic) and problem.holdout is not None:
        accuracy_fn = problem.accuracy

    common = dict(record_every=record_every, reference_value=reference,
                  accuracy_fn=accuracy_fn, history_bound=history_bound)
    start = time.perf_counter()
    if algo == "sgd-constant":
        rule = StepRule("constant", rate=float(cfg["algorithm"]["learning_rate"]))
        _, record = ogd_delayed_run(rule, weights, problem, schedule, T, seed,
                                    algorithm_name=algo, **common)
    elif algo == "ogd-appendix-c":
        rule = StepRule("tuned", gbound_sq=_gbound_sq_for(cfg, problem),
                        diameter=problem.domain.diameter())
        _, record = ogd_delayed_run(rule, weights, problem, schedule, T, seed,
                                    algorithm_name=algo, **common)
    elif algo == "anytime-sgd":
        rule = StepRule("decaying", rate=float(cfg["algorithm"]["learning_rate"]))
        learner = OgdLearner(problem.domain, rule, weights)
        _, record = anytime_run(learner, weights, problem, schedule, T, seed,
                                audit=audit, **common)
    elif algo == "optimistic-anytime":
        learner = OptimisticOgd(problem.domain)
        _, record = optimistic_anytime_run(learner, weights, problem, schedule,
                                           T, seed, audit=audit, **common)
    elif algo == "sc-optimistic":
        if not (schedule.kind == "constant" and schedule.value == 0):
            raise ConfigurationError(
                "sc-optimistic is the undelayed variant; use sc-optimistic-delayed "
                "with delays.kind != constant(0)"
            )
        _, record = sc_run(problem, weights, _strong_convexity_for(cfg, problem),
                           T, seed, audit=audit, **common)
    else:  # sc-optimistic-delayed
        _, record = sc_delayed_run(problem, schedule, weights,
                                   _strong_convexity_for(cfg, problem), T, seed,
                                   audit=audit, **common)
    record.wall_time = time.perf_counter() - start
    record.algorithm = algo
    record.config_hash = config_hash(cfg)
    record.extra["problem_hash"] = _problem_hash(cfg)
    record.extra["config"] = cfg
    return record


def run(config, *, overrides=None, audit: bool = False) -> RunRecord:
    cfg = load_config(config) if isinstance(config, (str, Path)) else config
    cfg = apply_overrides(cfg, overrides)
    return run_config(cfg, audit=audit)


@dataclass
class SweepPoint:
    axes: dict
    record: RunRecord


@dataclass
class SweepResult:
    points: list[SweepPoint]

    def table(self) -> list[dict]:
        rows = []
        for p in self.points:
            rows.append({
                **p.axes,
                "final_excess_loss": p.record.final_excess,
                "final_accuracy": p.record.final_accuracy,
                "final_loss": p.record.final_loss,
                "config_hash": p.record.config_hash,
            })
        return rows


def _sweep_points(cfg: dict) -> list[tuple[dict, dict]]:
    sweep_cfg = cfg.get("sweep", {})
    rates = sweep_cfg.get("learning_rates", [])
    delays = sweep_cfg.get("delays", [])
    if not rates and not delays:
        raise ConfigurationError("sweep needs sweep.learning_rates and/or sweep.delays")
    rate_axis = [None] if not rates else list(rates)
    delay_axis = [None] if not delays else list(delays)
    points = []
    for lr in rate_axis:
        for tau in delay_axis:
            point = json.loads(json.dumps(cfg))
            point.pop("sweep", None)
            axes = {}
            if lr is not None:
                point["algorithm"]["learning_rate"] = float(lr)
                axes["learning_rate"] = float(lr)
            if tau is not None:
                point["delays"] = {"kind": "constant", "value": int(tau)}
                axes["delay"] = int(tau)
            points.append((axes, point))
    return points


def _run_point(args):
    axes, point_cfg, reference = args
    record = run_config(point_cfg, precomputed_reference=reference)
    return axes, record


def sweep(config, *, overrides=None, jobs: int = 1) -> SweepResult:
    cfg = load_config(config) if isinstance(config, (str, Path)) else config
    cfg = apply_overrides(cfg, overrides)
    validate_config(cfg)
    points = _sweep_points(cfg)
    problem = build_problem(cfg)
    reference = reference_value(cfg, problem)
    tasks = [(axes, point, reference) for axes, point in points]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_point, tasks))
    else:
        results = [_run_point(task) for task in tasks]
    results.sort(key=lambda pair: tuple(sorted(pair[0].items())))
    return SweepResult([SweepPoint(axes, rec) for axes, rec in results])


def compare(record_a: RunRecord, record_b: RunRecord, metric: str = "excess_loss"
            ) -> dict:
    """Paired report of two runs on the same problem and horizon."""
    if metric not in ("excess_loss", "loss", "accuracy", "regret"):
        raise InvalidComparison(f"unknown metric {metric!r}")
    ha = record_a.extra.get("problem_hash")
    hb = record_b.extra.get("problem_hash")
    if ha is None or hb is None or ha != hb:
        raise InvalidComparison("records come from different problems")
    if record_a.T != record_b.T:
        raise InvalidComparison(
            f"records have different horizons: {record_a.T} vs {record_b.T}"
        )
    def final(rec):
        if metric == "excess_loss":
            return rec.final_excess
        if metric == "loss":
            return rec.final_loss
        if metric == "accuracy":
            return rec.final_accuracy
        return rec.regret if rec.regret is not None else float("nan")
    va, vb = final(record_a), final(record_b)
    ratio = va / vb if vb not in (0, 0.0) and np.isfinite(vb) else float("inf")
    common = np.intersect1d(record_a.steps, record_b.steps)
    ia = np.searchsorted(record_a.steps, common)
    ib = np.searchsorted(record_b.steps, common)
    series_attr = {"excess_loss": "excess_loss", "loss": "loss",
                   "accuracy": "accuracy", "regret": "loss"}[metric]
    series = [
        {"t": int(t),
         "a": float(getattr(record_a, series_attr)[i]),
         "b": float(getattr(record_b, series_attr)[j])}
        for t, i, j in zip(common, ia, ib)
    ]
    return {
        "metric": metric,
        "a": {"algorithm": record_a.algorithm, "value": va,
              "config_hash": record_a.config_hash},
        "b": {"algorithm": record_b.algorithm, "value": vb,
              "config_hash": record_b.config_hash},
        "ratio": float(ratio),
        "difference": float(va - vb),
        "series": series,
    }


# --- output files ---------------------------------------------------------------


def read_run(summary_path) -> RunRecord:
    """Rebuild a RunRecord from a summary JSON and its sibling CSV."""
    from .delays import DelayStats

    summary_path = Path(summary_path)
    summary = json.loads(summary_path.read_text())
    csv_path = summary_path.with_suffix(".csv")
    if not csv_path.exists():
        raise InvalidComparison(f"missing series CSV next to {summary_path}")
    rows = csv_path.read_text().strip().splitlines()
    header = rows[0].split(",")
    if tuple(header) != ("t", "excess_loss", "accuracy", "eta", "tau"):
        raise InvalidComparison(f"unexpected CSV columns {header} in {csv_path}")
    data = np.array([[float(cell) for cell in row.split(",")] for row in rows[1:]])
    if data.size == 0:
        data = np.zeros((0, 5))
    ref = summary.get("reference_value")
    excess = data[:, 1]
    stats = summary.get("delay_stats", {})
    return RunRecord(
        algorithm=summary.get("algorithm", "?"),
        T=int(summary["T"]),
        seed=int(summary.get("seed", 0)),
        steps=data[:, 0].astype(np.int64),
        loss=excess + ref if ref is not None else np.full_like(excess, np.nan),
        excess_loss=excess,
        accuracy=data[:, 2],
        eta=data[:, 3],
        tau=data[:, 4].astype(np.int64),
        final_point=np.zeros(0),
        final_loss=float(summary["final"]["loss"]),
        final_excess=float(summary["final"]["excess_loss"]),
        final_accuracy=float(summary["final"]["accuracy"]),
        delay_stats=DelayStats(
            mean=float(stats.get("mean", 0.0)),
            variance=float(stats.get("variance", 0.0)),
            max_delay=int(stats.get("max", 0)),
            histogram={int(k): v for k, v in stats.get("histogram", {}).items()},
        ),
        reference_value=ref,
        regret=summary.get("regret"),
        aborted=bool(summary.get("aborted", False)),
        abort_reason=summary.get("abort_reason"),
        wall_time=float(summary.get("wall_time_s", 0.0)),
        config_hash=summary.get("config_hash", ""),
        rng_name=summary.get("rng", ""),
        extra={"problem_hash": summary.get("problem_hash")},
    )


def write_run(record: RunRecord, out_dir, basename: str | None = None
              ) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base = basename or f"run-{record.config_hash[:12]}"
    csv_path = out / f"{base}.csv"
    json_path = out / f"{base}.json"
    csv_path.write_text("\n".join(record.csv_lines()) + "\n")
    json_path.write_text(json.dumps(record.summary(), sort_keys=True, indent=2,
                                    default=repr) + "\n")
    return csv_path, json_path


def write_sweep(result: SweepResult, out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for point in result.points:
        tags = "-".join(f"{k}{v}" for k, v in sorted(point.axes.items()))
        write_run(point.record, out, basename=f"run-{tags}-{point.record.config_hash[:8]}")
    table = result.table()
    columns = sorted({key for row in table for key in row})
    lines = [",".join(columns)]
    for row in table:
        lines.append(",".join(_csv_cell(row.get(col)) for col in columns))
    sweep_csv = out / "sweep.csv"
    sweep_csv.write_text("\n".join(lines) + "\n")
    sweep_json = out / "sweep.json"
    sweep_json.write_text(json.dumps(table, sort_keys=True, indent=2, default=repr) + "\n")
    return sweep_csv, sweep_json


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)
