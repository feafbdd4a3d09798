"""Command-line front end for the Monte-Carlo sweeps.

Usage::

    python -m irs_jcm --sweep jnr --values -5,0,5 --trials 50 --out jnr.csv

A ``--config`` file holds ``key = value`` lines named after the scenario
fields (``jnr_db``, ``K``, ``N_B``, ``bob_pos`` ...); flags override it.
"""

from __future__ import annotations

import argparse
import ast
import sys
from dataclasses import fields, replace
from pathlib import Path

from .estimators import METHODS
from .harness import DEFAULT_GRIDS, SWEEPS, ExperimentPlan, aggregate, convergence_trace, emit_results, run_plan
from .scenario import ArraySpec, NodeLayout
from .signal_model import ScenarioConfig

__all__ = ["ConfigError", "load_config", "build_parser", "main"]

_ARRAY_KEYS = {"N_A": "alice", "N_B": "bob", "N_M": "mallory", "M": "irs"}
_LAYOUT_KEYS = {f.name for f in fields(NodeLayout)}
_PLAN_KEYS = {"sweep", "values", "trials", "methods", "format", "out", "parallel"}


class ConfigError(ValueError):
    """Malformed configuration file or flag value."""


def _parse_value(text: str):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def parse_config_text(text: str, source: str = "<config>") -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        out[key] = _parse_value(value)
    return out


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    return parse_config_text(text, str(path))


def scenario_from_mapping(values: dict, base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Apply ``key = value`` settings to a :class:`ScenarioConfig`."""
    cfg = base or ScenarioConfig()
    names = {f.name for f in fields(ScenarioConfig)} - {"alice", "bob", "mallory", "irs", "layout"}
    plain, layout, arrays, wave = {}, {}, {}, {}
    for key, value in values.items():
        if key == "N_J":
            key = "n_jam"
        if key in names:
            plain[key] = tuple(value) if key == "irs_fixed_phases" and value is not None else value
        elif key in _ARRAY_KEYS:
            arrays[key] = value
        elif key in _LAYOUT_KEYS:
            layout[key] = tuple(float(v) for v in value)
        elif key in ("wavelength", "element_spacing"):
            wave[key] = float(value)
        else:
            raise ConfigError(f"unknown configuration key {key!r}")
    try:
        if layout:
            plain["layout"] = replace(cfg.layout, **layout)
        if wave:
            # a new wavelength without an explicit spacing keeps half-wavelength spacing
            wave.setdefault("element_spacing", None)
            for attr in _ARRAY_KEYS.values():
                plain[attr] = replace(getattr(cfg, attr), **wave)
        cfg = cfg.with_(**plain, **arrays)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc
    return cfg


def _split(text: str) -> list[str]:
    return [s.strip() for s in str(text).split(",") if s.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="irs-jcm", description="Seeded Monte-Carlo sweeps of the "
                                "jamming covariance estimators.")
    p.add_argument("--config", help="key = value file with scenario fields")
    p.add_argument("--sweep", choices=SWEEPS, help="sweep axis (default jnr)")
    p.add_argument("--values", help="comma-separated sweep values (default grid per sweep)")
    p.add_argument("--trials", type=int, help="Monte-Carlo trials per sweep value (default 100)")
    p.add_argument("--methods", help=f"comma-separated subset of {','.join(METHODS)}")
    p.add_argument("--seed", type=int, help="base seed (default 0)")
    p.add_argument("--out", help="output file (default results_<sweep>.<format>)")
    p.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    p.add_argument("--parallel", type=int, default=None, help="worker processes (default 1)")
    p.add_argument("--eav-model", choices=("mrc", "none"), default="mrc",
                   help="eavesdropper model for the secrecy rate; none reports Bob's rate")
    p.add_argument("--nb-power", choices=("reference", "per_point"), default="reference",
                   help="n_b sweep: keep powers calibrated at the base N_B or recalibrate")
    p.add_argument("--no-runtime", action="store_true",
                   help="write zero runtimes so repeated runs are byte-identical")
    p.add_argument("--quiet", action="store_true", help="skip the summary table")
    return p


def make_plan(args: argparse.Namespace) -> tuple[ExperimentPlan, int]:
    settings = load_config(args.config) if args.config else {}
    plan_keys = {k: settings.pop(k) for k in list(settings) if k in _PLAN_KEYS}
    seed = settings.pop("seed", 0)
    scenario = scenario_from_mapping(settings)

    def pick(flag, key, default):
        return flag if flag is not None else plan_keys.get(key, default)

    sweep = pick(args.sweep, "sweep", "jnr")
    if sweep not in SWEEPS:
        raise ConfigError(f"unknown sweep {sweep!r}")
    values = pick(args.values, "values", None)
    if values is None:
        values = DEFAULT_GRIDS[sweep]
    elif isinstance(values, str):
        try:
            values = [float(v) for v in _split(values)]
        except ValueError as exc:
            raise ConfigError(f"bad --values: {exc}") from exc
    elif isinstance(values, (int, float)):
        values = [values]
    methods = pick(args.methods, "methods", None)
    if methods is None:
        methods = ("PEM_GD", "PEM_AO") if sweep == "convergence" else METHODS
    elif isinstance(methods, str):
        methods = _split(methods)
    fmt = pick(args.format, "format", "csv")
    out = pick(args.out, "out", None) or f"results_{sweep}.{fmt}"
    parallel = int(pick(args.parallel, "parallel", 1))
    if parallel < 1:
        raise ConfigError("--parallel must be >= 1")
    try:
        plan = ExperimentPlan(scenario=scenario, sweep=sweep, sweep_values=tuple(values),
                              trials=int(pick(args.trials, "trials", 100)), methods=tuple(methods),
                              output_path=str(out), output_format=fmt,
                              seed=int(pick(args.seed, "seed", seed)),
                              eav_model=None if args.eav_model == "none" else "mrc",
                              nb_power_mode=args.nb_power, record_runtime=not args.no_runtime)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return plan, parallel


def _summary(records) -> str:
    lines = [f"{'value':>8} {'method':>7} {'nmse':>11} {'sr_bits':>9} {'fail':>5}"]
    for row in aggregate(records):
        lines.append(f"{row['sweep_value']:>8.4g} {row['method']:>7} {row['nmse_mean']:>11.4g} "
                     f"{row['sr_bits_mean']:>9.4g} {row['failure_rate']:>5.2f}")
    return "\n".join(lines)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        plan, parallel = make_plan(args)
    except ConfigError as exc:
        print(f"irs-jcm: configuration error: {exc}", file=sys.stderr)
        return 2
    records = run_plan(plan, parallel=parallel)
    try:
        path = emit_results(records, plan.output_format, plan.output_path)
        if plan.sweep == "convergence":
            trace_path = path.with_name(f"{path.stem}_trace.csv")
            convergence_trace(plan).write_csv(trace_path)
    except OSError as exc:
        print(f"irs-jcm: {exc}", file=sys.stderr)
        return 1
    if not args.quiet:
        print(_summary(records))
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
