"""Objective against iteration for the two parametric estimators.

PEM-AO solves the scalar block in closed form each outer step, so it
reaches its floor in a handful of iterations; blockwise gradient descent
takes tens.
"""

from irs_jcm.harness import ExperimentPlan, convergence_trace, iterations_to_floor

plan = ExperimentPlan(sweep="convergence", sweep_values=(5.0,), trials=1,
                      methods=("PEM_GD", "PEM_AO"))
table = convergence_trace(plan, trial=0)
for m, trace in table.raw.items():
    print(f"{m}: {len(trace) - 1} iterations, floor {trace[-1]:.4e}, "
          f"within 1% after {iterations_to_floor(trace)}")

print(f"\n{'iter':>5} {'PEM_GD':>12} {'PEM_AO':>12}")
for row in table.rows():
    if row["iteration"] in (0, 1, 2, 3, 5, 10, 20, 50, 100) or row["iteration"] == len(table.iteration) - 1:
        print(f"{row['iteration']:5d} {row['PEM_GD']:12.5e} {row['PEM_AO']:12.5e}")
