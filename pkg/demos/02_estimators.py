"""Estimate the jamming covariance from K = 5 silent-Alice snapshots.

The same noise-subtracted sample covariance feeds all four estimators: the
raw SCM, its rank-2 eigen-truncation (EVD), and the two parametric fits
that exploit the known IRS-to-Bob geometry (PEM-GD, PEM-AO).
"""

import time

import numpy as np

from irs_jcm import ScenarioConfig, build_scenario, sample_observations
from irs_jcm.estimators import evd_estimate, pem_ao, pem_gd, scm
from irs_jcm.metrics import nmse

sc = build_scenario(ScenarioConfig(jnr_db=5.0, K=5, seed=3))
batch = sample_observations(sc.truth, sc.config.K, seed=3)

R_scm = scm(batch).R_hat
ev = evd_estimate(R_scm)
S = R_scm - ev.sigma_hat2 * np.eye(sc.config.N_B)
print(f"noise variance: true {sc.truth.sigma_B2:.3e}, EVD estimate {ev.sigma_hat2:.3e}")

print(f"{'method':>7} {'nmse':>8} {'iters':>6} {'time':>8}")
print(f"{'SCM':>7} {nmse(S, sc.truth.R_i):8.4f} {0:6d} {'-':>8}")
print(f"{'EVD':>7} {nmse(ev.R_hat, sc.truth.R_i):8.4f} {0:6d} {'-':>8}")
for solver in (pem_gd, pem_ao):
    t0 = time.perf_counter()
    est = solver(S, sc.channels, seed=3)
    dt = time.perf_counter() - t0
    print(f"{est.method:>7} {nmse(est.R_hat, sc.truth.R_i):8.4f} {est.iterations:6d} {dt:7.3f}s")
