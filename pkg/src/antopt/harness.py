"""Monte-Carlo experiment runner: configuration, seeding, records, output.

Every trial derives its own RNG stream from (master seed, trial index), so
trials are reproducible in isolation and schemes sharing a master seed see
identical channel realizations.  Records serialize to a fixed-column CSV
(or JSON lines mirroring the same field names) with LF line endings.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import baselines, capacity, mec, rzf
from .geometry import Panel, count_feasible_components, feasible_raster, \
    min_pairwise_distance
from .penalty import PenaltyResult, PenaltySchedule, StopRule

CASES = ("capacity", "mec", "rzf")
SCHEMES = ("proposed", "fpa", "as", "pso")

CSV_COLUMNS = ("trial", "seed", "case", "scheme", "A_lambda", "N", "M",
               "metric", "iters", "rho_final", "resid", "min_dist", "t_ms")

# Columns holding wall-clock measurements, excluded from determinism checks.
TIME_COLUMNS = ("t_ms",)


class ConfigError(ValueError):
    """Configuration validation failure with a field-level message."""


@dataclass
class RunConfig:
    case: str = "capacity"
    scheme: str = "proposed"
    trials: int = 500
    panel_a: float = 5.0
    n_tx: int = 6
    n_rx: int = 6
    num_paths: int = 10
    kappa: float = 1.0
    snr_db: float = 15.0
    d_min: float = 0.5
    sigma2: float = 1.0
    rho_init: float = 5.0
    rho_growth: float = 1.2
    rel_change_tol: float = 1e-3
    residual_tol: float = 1e-9
    max_outer_iters: int = 100
    seed: int = 0
    out: str = None
    trace: bool = False
    jobs: int = 1
    user_spacing: float = 1.7
    rzf_alpha: float = None
    as_mode: str = "alternating"
    pso_swarm: int = 50
    pso_iters: int = 200

    def validate(self):
        if self.case not in CASES:
            raise ConfigError(f"case: must be one of {CASES}, got {self.case!r}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme: must be one of {SCHEMES}, got {self.scheme!r}")
        if self.trials < 1:
            raise ConfigError(f"trials: must be >= 1, got {self.trials}")
        if not self.panel_a > 0:
            raise ConfigError(f"panel: must be positive, got {self.panel_a}")
        if self.n_tx < 1 or self.n_rx < 1:
            raise ConfigError("n_tx/n_rx: must be >= 1")
        if self.num_paths < 1:
            raise ConfigError("num_paths: must be >= 1")
        if not self.d_min > 0:
            raise ConfigError(f"d_min: must be positive, got {self.d_min}")
        if self.seed < 0:
            raise ConfigError("seed: must be non-negative")
        if self.jobs < 1:
            raise ConfigError("jobs: must be >= 1")
        if self.as_mode not in ("alternating", "joint"):
            raise ConfigError(f"as_mode: unknown mode {self.as_mode!r}")
        return self

    def schedule(self) -> PenaltySchedule:
        return PenaltySchedule(rho_init=self.rho_init, growth=self.rho_growth)

    def stop_rule(self) -> StopRule:
        return StopRule(rel_change_tol=self.rel_change_tol,
                        max_outer_iters=self.max_outer_iters,
                        residual_tol=self.residual_tol)


def config_hash(config: RunConfig) -> str:
    items = {k: v for k, v in asdict(config).items()
             if k not in ("out", "jobs", "trace")}
    blob = json.dumps(items, sort_keys=True, default=str)
    return hashlib.sha1(blob.encode()).hexdigest()[:12]


def child_seed(master_seed: int, trial: int) -> int:
    """Deterministic per-trial seed: SeedSequence([master, trial])."""
    ss = np.random.SeedSequence([int(master_seed), int(trial)])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class TrialRecord:
    trial: int
    seed: int
    case: str
    scheme: str
    a_lambda: float
    n_tx: int
    n_rx: int
    metric: float
    iters: int
    rho_final: float
    resid: float
    min_dist: float
    t_ms: float = 0.0
    config_hash: str = ""
    converged: bool = True
    trace: list = field(default=None, repr=False)
    trace_ref: str = ""

    def csv_row(self) -> list:
        return [str(self.trial), str(self.seed), self.case, self.scheme,
                repr(float(self.a_lambda)), str(self.n_tx), str(self.n_rx),
                repr(float(self.metric)), str(self.iters),
                repr(float(self.rho_final)), repr(float(self.resid)),
                repr(float(self.min_dist)), repr(float(self.t_ms))]


def _groups_min_dist(groups) -> float:
    worst = np.inf
    for g in groups:
        if len(g) >= 2:
            worst = min(worst, min_pairwise_distance(g))
    return float(worst)


def record_from_result(config: RunConfig, trial: int, seed: int,
                       metric: float, result: PenaltyResult) -> TrialRecord:
    """Package a penalty-run outcome as one trial record."""
    return TrialRecord(
        trial=trial, seed=seed, case=config.case, scheme=config.scheme,
        a_lambda=config.panel_a, n_tx=config.n_tx, n_rx=config.n_rx,
        metric=float(metric), iters=result.n_outer,
        rho_final=result.rho_final, resid=result.residual,
        min_dist=_groups_min_dist(result.positions.values()),
        config_hash=config_hash(config), converged=result.converged,
        trace=result.trace)


def _capacity_baseline(config: RunConfig, rng) -> tuple:
    problem = capacity.sample_capacity_problem(config, rng)

    def metric_at(tx, rx):
        return capacity.capacity_metric(problem.realization, tx, rx,
                                        problem.p_max, problem.sigma2)

    if config.scheme == "fpa":
        tx = baselines.fpa_layout(config.n_tx)
        rx = baselines.fpa_layout(config.n_rx)
        iters = 0
    elif config.scheme == "as":
        sel = baselines.antenna_selection(
            metric_at,
            baselines.candidate_grid(2 * config.n_tx), config.n_tx,
            baselines.candidate_grid(2 * config.n_rx), config.n_rx,
            mode=config.as_mode)
        tx = baselines.candidate_grid(2 * config.n_tx)[list(sel.indices_a)]
        rx = baselines.candidate_grid(2 * config.n_rx)[list(sel.indices_b)]
        iters = sel.evaluations
    else:  # pso
        res = baselines.pso_optimize(
            lambda groups: -metric_at(groups[0], groups[1]),
            [problem.panel_tx, problem.panel_rx],
            [config.n_tx, config.n_rx], config.d_min,
            baselines.PsoConfig(swarm_size=config.pso_swarm,
                                max_iters=config.pso_iters), rng)
        tx, rx = res.positions
        iters = config.pso_iters
    return metric_at(tx, rx), [tx, rx], iters


def _mec_baseline(config: RunConfig, rng) -> tuple:
    problem = mec.sample_mec_problem(config, rng)

    def metric_at(rx):
        return mec.latency_metric(problem, rx)

    if config.scheme == "fpa":
        rx = baselines.fpa_layout(config.n_rx)
        iters = 0
    elif config.scheme == "as":
        sel = baselines.antenna_selection(
            lambda p: -metric_at(p),
            baselines.candidate_grid(2 * config.n_rx), config.n_rx)
        rx = baselines.candidate_grid(2 * config.n_rx)[list(sel.indices_a)]
        iters = sel.evaluations
    else:  # pso
        res = baselines.pso_optimize(
            metric_at, problem.panel, config.n_rx, config.d_min,
            baselines.PsoConfig(swarm_size=config.pso_swarm,
                                max_iters=config.pso_iters), rng)
        rx = res.positions[0]
        iters = config.pso_iters
    return metric_at(rx), [rx], iters


def _rzf_baseline(config: RunConfig, rng) -> tuple:
    problem = rzf.sample_rzf_problem(config, rng)

    def metric_at(tx):
        return rzf.sum_rate_metric(problem, tx)

    if config.scheme == "fpa":
        tx = baselines.fpa_layout(config.n_tx)
        iters = 0
    elif config.scheme == "as":
        sel = baselines.antenna_selection(
            metric_at, baselines.candidate_grid(2 * config.n_tx), config.n_tx)
        tx = baselines.candidate_grid(2 * config.n_tx)[list(sel.indices_a)]
        iters = sel.evaluations
    else:  # pso
        res = baselines.pso_optimize(
            lambda p: -metric_at(p), problem.panel, config.n_tx, config.d_min,
            baselines.PsoConfig(swarm_size=config.pso_swarm,
                                max_iters=config.pso_iters), rng)
        tx = res.positions[0]
        iters = config.pso_iters
    return metric_at(tx), [tx], iters


_PROPOSED = {"capacity": capacity.run_capacity_case,
             "mec": mec.run_mec_case,
             "rzf": rzf.run_rzf_case}

_BASELINE = {"capacity": _capacity_baseline,
             "mec": _mec_baseline,
             "rzf": _rzf_baseline}


def run_trial(config: RunConfig, trial: int) -> TrialRecord:
    """Execute one trial of the configured case/scheme."""
    seed = child_seed(config.seed, trial)
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    if config.scheme == "proposed":
        record = _PROPOSED[config.case](config, rng, trial=trial, seed=seed)
    else:
        metric, groups, iters = _BASELINE[config.case](config, rng)
        record = TrialRecord(
            trial=trial, seed=seed, case=config.case, scheme=config.scheme,
            a_lambda=config.panel_a, n_tx=config.n_tx, n_rx=config.n_rx,
            metric=float(metric), iters=iters, rho_final=0.0, resid=0.0,
            min_dist=_groups_min_dist(groups), config_hash=config_hash(config))
    record.t_ms = (time.perf_counter() - t0) * 1e3
    return record


def _trial_worker(payload):
    config, trial = payload
    return run_trial(config, trial)


def summarize(records, d_min: float = 0.5) -> dict:
    """Mean, standard error, and feasibility rate over trial records."""
    metrics = np.array([r.metric for r in records], dtype=float)
    n = len(metrics)
    stderr = float(np.std(metrics, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    feasible = np.array([r.min_dist >= d_min - 1e-6 for r in records])
    return {"n": n, "metric_mean": float(metrics.mean()) if n else float("nan"),
            "metric_stderr": stderr,
            "feasible_rate": float(feasible.mean()) if n else 0.0}


def run_monte_carlo(config: RunConfig):
    """Run all trials, write outputs if requested, return (records, summary)."""
    config.validate()
    payloads = [(config, t) for t in range(config.trials)]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            records = list(pool.map(_trial_worker, payloads))
    else:
        records = [run_trial(config, t) for t in range(config.trials)]
    records.sort(key=lambda r: r.trial)

    if config.trace and config.out:
        trace_dir = os.path.splitext(config.out)[0] + "_traces"
        os.makedirs(trace_dir, exist_ok=True)
        for r in records:
            if r.trace is None:
                continue
            path = os.path.join(trace_dir, f"trial_{r.trial:05d}.jsonl")
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                for entry in r.trace:
                    fh.write(entry.to_json() + "\n")
            r.trace_ref = path
    if config.out:
        fmt = "jsonl" if config.out.endswith(".jsonl") else "csv"
        emit_results(records, fmt, config.out)
    return records, summarize(records, config.d_min)


def emit_results(records, fmt: str, path: str):
    """Write records as CSV or JSON lines with the fixed column set."""
    if not records:
        raise ValueError("no records to emit")
    if fmt not in ("csv", "jsonl"):
        raise ValueError(f"unknown format {fmt!r}")
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            if fmt == "csv":
                fh.write(",".join(CSV_COLUMNS) + "\n")
                for r in records:
                    fh.write(",".join(r.csv_row()) + "\n")
            else:
                for r in records:
                    row = dict(zip(CSV_COLUMNS, [
                        r.trial, r.seed, r.case, r.scheme, r.a_lambda,
                        r.n_tx, r.n_rx, r.metric, r.iters, r.rho_final,
                        r.resid, r.min_dist, r.t_ms]))
                    fh.write(json.dumps(row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def read_records(path: str) -> list:
    """Parse a results CSV back into TrialRecord objects."""
    records = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header in {path}: {header}")
        for line in fh:
            v = line.strip().split(",")
            records.append(TrialRecord(
                trial=int(v[0]), seed=int(v[1]), case=v[2], scheme=v[3],
                a_lambda=float(v[4]), n_tx=int(v[5]), n_rx=int(v[6]),
                metric=float(v[7]), iters=int(v[8]), rho_final=float(v[9]),
                resid=float(v[10]), min_dist=float(v[11]), t_ms=float(v[12])))
    return records


SWEEP_COLUMNS = ("case", "scheme", "param", "value", "trials",
                 "metric_mean", "metric_stderr", "feasible_rate")


def _apply_sweep_value(config: RunConfig, param: str, value: float) -> RunConfig:
    if param == "panel":
        return replace(config, panel_a=float(value))
    if param == "antennas":
        k = int(value)
        if config.case == "capacity":
            return replace(config, n_tx=k, n_rx=k)
        if config.case == "mec":
            return replace(config, n_rx=k)
        return replace(config, n_tx=k)
    raise ConfigError(f"param: must be 'panel' or 'antennas', got {param!r}")


def run_sweep(config: RunConfig, param: str, values, schemes=None):
    """One summary row per (scheme, value); all cells share the master seed."""
    schemes = list(schemes) if schemes else [config.scheme]
    rows = []
    for scheme in schemes:
        for value in values:
            cfg = _apply_sweep_value(replace(config, scheme=scheme, out=None,
                                             trace=False), param, value)
            records, summary = run_monte_carlo(cfg)
            rows.append({"case": cfg.case, "scheme": scheme, "param": param,
                         "value": float(value), "trials": cfg.trials,
                         "metric_mean": summary["metric_mean"],
                         "metric_stderr": summary["metric_stderr"],
                         "feasible_rate": summary["feasible_rate"]})
    if config.out:
        with open(config.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(SWEEP_COLUMNS) + "\n")
            for row in rows:
                fh.write(",".join([
                    row["case"], row["scheme"], row["param"],
                    repr(row["value"]), str(row["trials"]),
                    repr(row["metric_mean"]), repr(row["metric_stderr"]),
                    repr(row["feasible_rate"])]) + "\n")
    return rows


CONNECTIVITY_COLUMNS = ("trial", "seed", "A_lambda", "M", "resolution",
                        "sweeps", "components", "split")


def _feasible_start(panel: Panel, m: int, d_min: float,
                    rng: np.random.Generator) -> np.ndarray:
    """Sequential dart-throwing until m pairwise-feasible points exist."""
    for _restart in range(200):
        pts = []
        ok = True
        for _ in range(m):
            for _attempt in range(2000):
                p = panel.sample_uniform(rng, 1)[0]
                if all(np.hypot(*(p - q)) >= d_min for q in pts):
                    pts.append(p)
                    break
            else:
                ok = False
                break
        if ok:
            return np.array(pts)
    raise RuntimeError("could not draw a feasible starting layout")


def diagnose_connectivity(trials: int, panel_a: float, m: int, d_min: float,
                          resolution: float, sweeps: int = 3, seed: int = 0,
                          out: str = None):
    """Estimate how often sequential updating faces a split feasible set.

    Each trial starts from a random pairwise-feasible layout, performs
    ``sweeps`` rounds of sequential single-antenna updates (re-drawing each
    antenna uniformly over its rasterized feasible region), and then counts
    the connected components of the region the next update would face.  A
    trial exhibits the split phenomenon when that count is two or more.
    """
    panel = Panel.square(panel_a)
    rows = []
    for t in range(trials):
        tseed = child_seed(seed, t)
        rng = np.random.default_rng(tseed)
        positions = _feasible_start(panel, m, d_min, rng)
        for _sweep in range(sweeps):
            for mi in range(m):
                mask, xs, ys = feasible_raster(mi, positions, panel, d_min,
                                               resolution)
                flat = np.flatnonzero(mask)
                if len(flat):
                    pick = flat[rng.integers(len(flat))]
                    iy, ix = np.unravel_index(pick, mask.shape)
                    positions[mi] = (xs[ix], ys[iy])
        components = count_feasible_components(0, positions, panel, d_min,
                                               resolution)
        rows.append({"trial": t, "seed": tseed, "A_lambda": panel_a, "M": m,
                     "resolution": resolution, "sweeps": sweeps,
                     "components": components,
                     "split": int(components >= 2)})
    fraction = float(np.mean([r["split"] for r in rows])) if rows else 0.0
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(CONNECTIVITY_COLUMNS) + "\n")
            for r in rows:
                fh.write(",".join([
                    str(r["trial"]), str(r["seed"]), repr(float(r["A_lambda"])),
                    str(r["M"]), repr(float(r["resolution"])), str(r["sweeps"]),
                    str(r["components"]), str(r["split"])]) + "\n")
    return rows, fraction
