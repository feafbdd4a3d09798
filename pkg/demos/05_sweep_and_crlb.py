"""A small seeded JNR sweep with the Cramer-Rao floor, written to CSV.

Every (JNR, trial) cell draws its own seed from the base seed, so the
files are reproducible and adding a method leaves the others untouched.
"""

import sys

from irs_jcm.harness import ExperimentPlan, aggregate, emit_results, run_plan

out = sys.argv[1] if len(sys.argv) > 1 else "demo_crlb.csv"
plan = ExperimentPlan(sweep="crlb", sweep_values=(-5.0, 0.0, 5.0, 10.0, 15.0), trials=20)
records = run_plan(plan)
path = emit_results(records, "csv", out)

rows = aggregate(records)
methods = ("SCM", "EVD", "PEM_GD", "PEM_AO", "CRLB")
print(f"{'JNR':>5} " + " ".join(f"{m:>8}" for m in methods))
for v in plan.sweep_values:
    m = {r["method"]: r["nmse_mean"] for r in rows if r["sweep_value"] == v}
    print(f"{v:5g} " + " ".join(f"{m[k]:8.4f}" for k in methods))
print(f"wrote {path} and its aggregate companion")
