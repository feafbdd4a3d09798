"""Seeded Monte-Carlo sweeps, result files and runtime benchmarks."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import struct
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .estimators import METHODS, evd_estimate, pem_ao, pem_gd, scm
from .metrics import MrcEavesdropper, crlb_sum, nmse, nsp_max_wfrp, secrecy_rate
from .signal_model import ScenarioConfig, build_scenario, sample_observations

__all__ = [
    "SWEEPS",
    "DEFAULT_GRIDS",
    "CSV_COLUMNS",
    "ExperimentPlan",
    "TrialRecord",
    "TraceTable",
    "BenchmarkRow",
    "trial_seed",
    "run_trial",
    "run_plan",
    "emit_results",
    "read_results",
    "aggregate",
    "convergence_trace",
    "iterations_to_floor",
    "benchmark",
    "benchmark_ordered",
]

SWEEPS = ("jnr", "n_b", "snr", "convergence", "crlb")

DEFAULT_GRIDS = {
    "jnr": tuple(np.arange(-5.0, 15.01, 2.5)),
    "n_b": (4, 6, 8, 10, 12),
    "snr": tuple(np.arange(-5.0, 15.01, 2.5)),
    "convergence": (5.0,),
    "crlb": tuple(np.arange(-5.0, 15.01, 2.5)),
}

CSV_COLUMNS = ("sweep_name", "sweep_value", "trial", "method", "nmse", "sr_bits",
               "sigma_hat2", "iterations", "runtime_s", "converged")

# sweep name -> ScenarioConfig field it drives
_SWEEP_FIELD = {"jnr": "jnr_db", "snr": "snr_db", "n_b": "N_B", "convergence": "jnr_db",
                "crlb": "jnr_db"}

_SIG = 9  # significant digits kept in records and files


def _q(x: float) -> float:
    """Round to the emitted precision so files round-trip exactly."""
    x = float(x)
    return float(f"{x:.{_SIG}g}") if math.isfinite(x) else x


@dataclass(frozen=True)
class ExperimentPlan:
    """One sweep over a scenario axis with a fixed number of seeded trials.

    ``nb_power_mode`` only affects the ``n_b`` sweep: ``"reference"`` fixes
    the noise variance and Mallory power at the values calibrated for the
    base array size, ``"per_point"`` recalibrates at every ``N_B``.
    ``record_runtime=False`` writes zero runtimes so repeated runs give
    byte-identical files.
    """

    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    sweep: str = "jnr"
    sweep_values: tuple = DEFAULT_GRIDS["jnr"]
    trials: int = 100
    methods: tuple = METHODS
    output_path: str | None = None
    output_format: str = "csv"
    seed: int = 0
    eav_model: str | None = "mrc"
    rank_tol: float = 1e-6
    nb_power_mode: str = "reference"
    record_runtime: bool = True
    solver_opts: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.sweep not in SWEEPS:
            raise ValueError(f"unknown sweep {self.sweep!r}; choose from {SWEEPS}")
        values = tuple(float(v) for v in self.sweep_values)
        if not values:
            raise ValueError("sweep_values must be nonempty")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("sweep_values must be strictly increasing")
        if self.sweep == "n_b" and any(v != int(v) or v < 3 for v in values):
            raise ValueError("n_b sweep values must be integers >= 3")
        object.__setattr__(self, "sweep_values", values)
        if int(self.trials) < 1:
            raise ValueError("trials must be >= 1")
        methods = tuple(self.methods)
        bad = [m for m in methods if m not in METHODS]
        if bad or not methods:
            raise ValueError(f"methods must be a nonempty subset of {METHODS}, got {methods}")
        if self.sweep == "convergence" and not set(methods) <= {"PEM_GD", "PEM_AO"}:
            raise ValueError("convergence sweep takes only PEM_GD and PEM_AO")
        object.__setattr__(self, "methods", methods)
        if self.output_format not in ("csv", "json"):
            raise ValueError(f"output_format must be csv or json, got {self.output_format!r}")
        if self.eav_model not in ("mrc", None):
            raise ValueError(f"eav_model must be 'mrc' or None, got {self.eav_model!r}")
        if self.nb_power_mode not in ("reference", "per_point"):
            raise ValueError(f"nb_power_mode must be reference or per_point, got {self.nb_power_mode!r}")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")

    def config_for(self, value: float) -> ScenarioConfig:
        key = _SWEEP_FIELD[self.sweep]
        return self.scenario.with_(**{key: int(value) if key == "N_B" else float(value)})


@dataclass(frozen=True)
class TrialRecord:
    sweep_name: str
    sweep_value: float
    trial: int
    method: str
    nmse: float
    sr_bits: float
    sigma_hat2: float
    iterations: int
    runtime_s: float
    converged: bool

    def sort_key(self):
        order = METHODS + ("CRLB",)
        return (self.sweep_value, self.trial, order.index(self.method))


def trial_seed(base_seed: int, sweep_value: float, trial: int) -> int:
    """Stable 64-bit mix of the base seed, the sweep value's bits and the trial index."""
    raw = struct.pack("<Qdq", int(base_seed) & (2 ** 64 - 1), float(sweep_value), int(trial))
    return int.from_bytes(hashlib.blake2b(raw, digest_size=8).digest(), "little")


def _estimate(method, R_scm, S, ev, scenario, seed, opts):
    if method == "SCM":
        return S, 0, True
    if method == "EVD":
        return ev.R_hat, 0, True
    solver = pem_gd if method == "PEM_GD" else pem_ao
    est = solver(S, scenario.channels, seed=seed, **opts.get(method, {}))
    return est.R_hat, est.iterations, est.converged


def _prepare(plan: ExperimentPlan, value: float, trial: int):
    seed = trial_seed(plan.seed, value, trial)
    cfg = plan.config_for(value).with_(seed=seed)
    powers = None
    if plan.sweep == "n_b" and plan.nb_power_mode == "reference":
        ref = build_scenario(cfg.with_(N_B=plan.scenario.N_B))
        powers = (ref.truth.sigma_B2, ref.config.P_M)
    scenario = build_scenario(cfg, powers)
    batch = sample_observations(scenario.truth, cfg.K, [seed, 2])
    return seed, scenario, batch


def _noise_subtracted(batch, scenario):
    t0 = time.perf_counter()
    R_scm = scm(batch).R_hat
    t_scm = time.perf_counter() - t0
    t0 = time.perf_counter()
    ev = evd_estimate(R_scm)
    t_evd = time.perf_counter() - t0
    if scenario.config.noise_source == "evd":
        sigma2 = ev.sigma_hat2
    else:
        sigma2 = scenario.truth.sigma_B2
    S = R_scm - sigma2 * np.eye(R_scm.shape[0])
    return R_scm, S, ev, sigma2, t_scm, t_evd


def run_trial(plan: ExperimentPlan, value: float, trial: int) -> list[TrialRecord]:
    """All records of one (sweep value, trial) cell. Errors become failed records."""
    name = plan.sweep
    try:
        seed, scenario, batch = _prepare(plan, value, trial)
        R_scm, S, ev, sigma2, t_scm, t_evd = _noise_subtracted(batch, scenario)
    except Exception:
        return [TrialRecord(name, value, trial, m, math.nan, math.nan, math.nan, 0, 0.0, False)
                for m in plan.methods]

    truth, cfg = scenario.truth, scenario.config
    eav = MrcEavesdropper(cfg) if plan.eav_model == "mrc" else None
    records = []
    for method in plan.methods:
        t0 = time.perf_counter()
        try:
            R_hat, iters, ok = _estimate(method, R_scm, S, ev, scenario, seed, plan.solver_opts)
        except Exception:
            records.append(TrialRecord(name, value, trial, method, math.nan, math.nan, sigma2,
                                       0, 0.0, False))
            continue
        runtime = time.perf_counter() - t0
        runtime += {"SCM": t_scm, "EVD": t_scm + t_evd}.get(method, 0.0)
        try:
            rbf = nsp_max_wfrp(R_hat, scenario.channels.H_A1, scenario.tx.v, rank_tol=plan.rank_tol)
            sr = secrecy_rate(scenario.channels, scenario.tx, rbf.v_BR, truth, cfg, eav_model=eav)
        except ValueError:
            sr, ok = math.nan, False
        sigma_out = ev.sigma_hat2 if method == "EVD" else sigma2
        records.append(TrialRecord(name, value, trial, method, _q(nmse(R_hat, truth.R_i)), _q(sr),
                                   _q(sigma_out), int(iters),
                                   _q(runtime) if plan.record_runtime else 0.0, bool(ok)))
    if plan.sweep == "crlb":
        try:
            bound, singular = crlb_sum(truth, cfg.K, return_flag=True)
            records.append(TrialRecord(name, value, trial, "CRLB", _q(bound), math.nan,
                                       _q(truth.sigma_B2), 0, 0.0, not singular))
        except Exception:
            records.append(TrialRecord(name, value, trial, "CRLB", math.nan, math.nan, math.nan,
                                       0, 0.0, False))
    return records


def _run_cells(args):
    plan, cells = args
    out = []
    for value, trial in cells:
        out.extend(run_trial(plan, value, trial))
    return out


def run_plan(plan: ExperimentPlan, parallel: int = 1) -> list[TrialRecord]:
    """Every (sweep value, trial, method) record in canonical order.

    Trial seeds depend only on the plan seed, the sweep value and the trial
    index, so serial and parallel runs give identical records.
    """
    cells = [(v, t) for v in plan.sweep_values for t in range(int(plan.trials))]
    if parallel > 1 and len(cells) > 1:
        chunks = [cells[i::parallel * 4] for i in range(parallel * 4)]
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            parts = pool.map(_run_cells, [(plan, c) for c in chunks if c])
            records = [r for part in parts for r in part]
    else:
        records = _run_cells((plan, cells))
    return sorted(records, key=TrialRecord.sort_key)


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float):
        return f"{x:.{_SIG}g}"
    return str(x)


def _json_value(x):
    if isinstance(x, float):
        return float(f"{x:.{_SIG}g}") if math.isfinite(x) else None
    return x


def aggregate(records) -> list[dict]:
    """Per ``(sweep_value, method)`` means, standard errors and failure rate.

    Failed trials (non-finite NMSE or ``converged`` false) count towards the
    failure rate; means run over the finite values only.
    """
    groups: dict = {}
    for r in records:
        groups.setdefault((r.sweep_name, r.sweep_value, r.method), []).append(r)
    rows = []
    order = METHODS + ("CRLB",)
    for (name, value, method), rs in sorted(groups.items(), key=lambda kv: (kv[0][1], order.index(kv[0][2]))):
        row = {"sweep_name": name, "sweep_value": value, "method": method, "trials": len(rs)}
        failed = sum((not r.converged) or not math.isfinite(r.nmse) for r in rs)
        row["failure_rate"] = failed / len(rs)
        for key in ("nmse", "sr_bits", "iterations", "runtime_s"):
            vals = np.array([getattr(r, key) for r in rs], dtype=float)
            vals = vals[np.isfinite(vals)]
            row[f"{key}_mean"] = float(vals.mean()) if vals.size else math.nan
            row[f"{key}_se"] = float(vals.std(ddof=1) / np.sqrt(vals.size)) if vals.size > 1 else math.nan
        rows.append(row)
    return rows


def _companion(path: Path) -> Path:
    return path.with_name(f"{path.stem}_aggregate{path.suffix}")


def _write_table(path: Path, fmt: str, header, rows):
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(row[k]) for k in header])
    else:
        with open(path, "w") as fh:
            json.dump([{k: _json_value(row[k]) for k in header} for row in rows], fh, indent=1)
            fh.write("\n")


def emit_results(records, fmt: str, path) -> Path:
    """Write records to ``path`` plus an ``<stem>_aggregate`` companion file.

    CSV floats carry 9 significant digits; JSON holds the same fields per
    record with non-finite values as ``null``. Returns the main path.
    """
    records = list(records)
    if not records:
        raise ValueError("no records to emit")
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be csv or json, got {fmt!r}")
    path = Path(path)
    rows = [asdict(r) for r in records]
    agg = aggregate(records)
    try:
        _write_table(path, fmt, CSV_COLUMNS, rows)
        _write_table(_companion(path), fmt, list(agg[0]), agg)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc.strerror or exc}") from exc
    return path


def read_results(path) -> list[TrialRecord]:
    """Parse a file written by :func:`emit_results` back into records."""
    path = Path(path)
    if path.suffix == ".json":
        with open(path) as fh:
            raw = json.load(fh)
    else:
        with open(path, newline="") as fh:
            raw = list(csv.DictReader(fh))
    out = []
    for row in raw:
        kw = {}
        for f in fields(TrialRecord):
            v = row[f.name]
            if f.name in ("sweep_name", "method"):
                kw[f.name] = v
            elif f.name in ("trial", "iterations"):
                kw[f.name] = int(v)
            elif f.name == "converged":
                kw[f.name] = v if isinstance(v, bool) else v == "true"
            else:
                kw[f.name] = math.nan if v is None else float(v)
        out.append(TrialRecord(**kw))
    return out


@dataclass(frozen=True)
class TraceTable:
    """Objective per iteration, each column padded with its final value."""

    iteration: np.ndarray
    traces: dict
    raw: dict

    def rows(self):
        for i, it in enumerate(self.iteration):
            yield {"iteration": int(it), **{m: float(c[i]) for m, c in self.traces.items()}}

    def write_csv(self, path):
        header = ["iteration", *self.traces]
        _write_table(Path(path), "csv", header, list(self.rows()))


def convergence_trace(plan: ExperimentPlan, trial: int = 0) -> TraceTable:
    """PEM objective traces on one seeded instance (first sweep value)."""
    methods = [m for m in plan.methods if m in ("PEM_GD", "PEM_AO")]
    if not methods or len(methods) != len(plan.methods):
        raise ValueError("convergence traces take only PEM_GD and PEM_AO")
    value = plan.sweep_values[0] if plan.sweep == "convergence" else plan.scenario.jnr_db
    conv_plan = replace(plan, sweep="convergence", sweep_values=(value,))
    seed, scenario, batch = _prepare(conv_plan, value, trial)
    _, S, *_ = _noise_subtracted(batch, scenario)
    raw = {}
    for m in methods:
        solver = pem_gd if m == "PEM_GD" else pem_ao
        raw[m] = np.asarray(solver(S, scenario.channels, seed=seed,
                                   **plan.solver_opts.get(m, {})).objective_trace)
    n = max(len(t) for t in raw.values())
    padded = {m: np.concatenate([t, np.full(n - len(t), t[-1])]) for m, t in raw.items()}
    return TraceTable(np.arange(n), padded, raw)


def iterations_to_floor(trace, rel: float = 0.01) -> int:
    """First iteration whose objective is within ``rel`` of the final value."""
    trace = np.asarray(trace, dtype=float)
    floor = trace[-1]
    return int(np.argmax(trace <= floor + rel * abs(floor)))


@dataclass(frozen=True)
class BenchmarkRow:
    N_B: int
    method: str
    median_runtime_s: float
    trials: int


def benchmark(plan: ExperimentPlan, n_b_values=None) -> list[BenchmarkRow]:
    """Median wall-clock per estimator at every array size.

    Uses the plan's ``n_b`` values when it is an ``n_b`` sweep, else
    ``n_b_values`` or the base array size.
    """
    if n_b_values is None:
        n_b_values = plan.sweep_values if plan.sweep == "n_b" else (plan.scenario.N_B,)
    bench = replace(plan, sweep="n_b", sweep_values=tuple(n_b_values), record_runtime=True)
    rows = []
    records = run_plan(bench)
    for nb in bench.sweep_values:
        for m in plan.methods:
            times = [r.runtime_s for r in records
                     if r.sweep_value == nb and r.method == m and math.isfinite(r.nmse)]
            med = float(np.median(times)) if times else math.nan
            rows.append(BenchmarkRow(int(nb), m, med, len(times)))
    return rows


def benchmark_ordered(rows, N_B: int | None = None) -> bool:
    """``EVD <= PEM_AO <= PEM_GD`` in median runtime at ``N_B`` (all sizes if None)."""
    sizes = sorted({r.N_B for r in rows}) if N_B is None else [N_B]
    for nb in sizes:
        t = {r.method: r.median_runtime_s for r in rows if r.N_B == nb}
        chain = [t[m] for m in ("EVD", "PEM_AO", "PEM_GD") if m in t]
        if any(b < a for a, b in zip(chain, chain[1:])):
            return False
    return True
