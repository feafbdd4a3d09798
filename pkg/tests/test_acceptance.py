"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (also collected into the
terminal summary) with the measured quantities and the wall-clock time, and
fails when either the property or the time budget is missed. Run alone with::

    pytest -m acceptance -s
"""

import subprocess
import sys
import time
from dataclasses import replace

import numpy as np
import pytest

from irs_jcm.estimators import (PemAoState, PemGdState, c_objective, c_subproblem_bruteforce,
                                evd_estimate, finite_difference_gradient, kkt_scalars, pem_ao,
                                pem_ao_c_subproblem, pem_ao_objective, pem_ao_omega_gradient,
                                pem_gd, pem_gd_gradients, pem_gd_model, pem_gd_objective)
from irs_jcm.estimators.pem_gd import BLOCKS
from irs_jcm.harness import (DEFAULT_GRIDS, ExperimentPlan, aggregate, convergence_trace,
                             iterations_to_floor, run_plan)
from irs_jcm.metrics import crlb_sum, nmse, nsp_max_wfrp
from irs_jcm.scenario import ArraySpec, steering_vector
from irs_jcm.signal_model import ScenarioConfig, build_scenario, sample_observations
from irs_jcm.estimators import scm

from conftest import ACCEPTANCE_LINES, random_hermitian

pytestmark = pytest.mark.acceptance


def cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def rel_err(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def verdict(number, ok, budget, timer, detail):
    within = timer.elapsed < budget
    status = "PASS" if ok and within else "FAIL"
    line = f"{status} criterion {number}: {detail} [{timer.elapsed:.1f} s / {budget:.0f} s]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line
    assert within, line


def means(records, value):
    return {row["method"]: row["nmse_mean"] for row in aggregate(records)
            if row["sweep_value"] == value}


def test_criterion_01_gradients():
    rng = np.random.default_rng(101)
    worst_gd = worst_ao = 0.0
    with Timer() as t:
        for _ in range(10):
            B = cn(rng, 4, 8)
            state = PemGdState.random(rng, 8, 4, 3)
            S = random_hermitian(rng, 4)
            for block, g in zip(BLOCKS, pem_gd_gradients(state, S, B)):
                def f(x, block=block):
                    return pem_gd_objective(replace(state, **{block: x}), S, B)
                fd = finite_difference_gradient(f, getattr(state, block), step=1e-6)
                worst_gd = max(worst_gd, rel_err(g, fd))
            h = cn(rng, 4)
            h /= np.linalg.norm(h)
            c2 = complex(*rng.standard_normal(2))
            ao = PemAoState(abs(c2) ** 2 + 0.5, c2, cn(rng, 4))

            def fw(w):
                return pem_ao_objective(replace(ao, omega=w), S, h)

            fd = finite_difference_gradient(fw, ao.omega, step=1e-6)
            worst_ao = max(worst_ao, rel_err(pem_ao_omega_gradient(ao, S, h), fd))
    verdict(1, max(worst_gd, worst_ao) < 1e-5, 10, t,
            f"worst relative error PEM-GD {worst_gd:.2e}, PEM-AO {worst_ao:.2e} (< 1e-5)")


def test_criterion_02_oracle_recovery():
    sc = build_scenario(ScenarioConfig())
    R = sc.truth.R_i
    target = 1e-8 * np.linalg.norm(R) ** 2
    with Timer() as t:
        # the reflected path carries ~1e-7 of the jamming power, so plain
        # descent needs far more than the default 2000 iterations to settle it
        gd = pem_gd(R, sc.channels, max_iters=50_000).objective_trace[-1]
        ao = pem_ao(R, sc.channels).objective_trace[-1]
        s2 = sc.truth.sigma_B2
        ev = evd_estimate(R + s2 * np.eye(R.shape[0]))
        err_R = rel_err(ev.R_hat, R)
        err_s = abs(ev.sigma_hat2 - s2) / s2
    ok = gd < target and ao < target and err_R < 1e-10 and err_s < 1e-10
    verdict(2, ok, 30, t,
            f"objective/||S||^2 PEM-GD {gd / target * 1e-8:.2e}, PEM-AO {ao / target * 1e-8:.2e} "
            f"(< 1e-8); EVD rel. error R {err_R:.1e}, sigma^2 {err_s:.1e} (< 1e-10)")


def test_criterion_03_kkt_subproblem():
    rng = np.random.default_rng(303)
    worst_gap, worst_feas = -np.inf, -np.inf
    with Timer() as t:
        for k in range(20):
            n = 6
            h = cn(rng, n)
            h /= np.linalg.norm(h)
            w = cn(rng, n) * rng.uniform(0.1, 3)
            S = random_hermitian(rng, n)
            if k % 2 == 0:
                S = S @ S.conj().T
            a, e, g, tau = kkt_scalars(w, h, S)
            step = pem_ao_c_subproblem(a, e, g, tau)
            c1b, c2b = c_subproblem_bruteforce(a, e, g, tau)
            scale = max(1.0, abs(tau) ** 2, e ** 2)
            gap = (c_objective(step.c1, step.c2, a, e, g, tau)
                   - c_objective(c1b, c2b, a, e, g, tau)) / scale
            worst_gap = max(worst_gap, gap)
            worst_feas = max(worst_feas, abs(step.c2) ** 2 - step.c1)
    verdict(3, worst_gap <= 1e-6 and worst_feas <= 1e-9, 60, t,
            f"worst closed-form minus brute-force objective {worst_gap:.1e} (<= 1e-6), "
            f"worst |c2|^2 - c1 {worst_feas:.1e} (<= 0)")


def test_criterion_04_nmse_ordering():
    plan = ExperimentPlan(sweep="jnr", sweep_values=(0.0, 5.0, 15.0), trials=500)
    with Timer() as t:
        records = run_plan(plan)
    ok, parts = True, []
    for v in (0.0, 5.0):
        m = means(records, v)
        close = abs(m["PEM_AO"] - m["PEM_GD"]) <= 0.1 * min(m["PEM_AO"], m["PEM_GD"])
        ordered = max(m["PEM_AO"], m["PEM_GD"]) < m["EVD"] < m["SCM"]
        ok &= close and ordered
        parts.append(f"{v:g} dB AO {m['PEM_AO']:.4f} GD {m['PEM_GD']:.4f} "
                     f"EVD {m['EVD']:.4f} SCM {m['SCM']:.4f}")
    m = means(records, 15.0)
    spread = max(m.values()) / min(m.values())
    ok &= spread <= 1.25
    parts.append(f"15 dB max/min {spread:.3f} (<= 1.25)")
    verdict(4, ok, 600, t, "; ".join(parts))


def test_criterion_05_convergence():
    plan = ExperimentPlan(sweep="convergence", sweep_values=(5.0,), trials=100,
                          methods=("PEM_GD", "PEM_AO"))
    monotone = True
    its = {"PEM_GD": [], "PEM_AO": []}
    with Timer() as t:
        for trial in range(100):
            table = convergence_trace(plan, trial)
            for m, trace in table.raw.items():
                monotone &= bool(np.all(np.diff(trace) <= 0))
                its[m].append(iterations_to_floor(trace))
    med = {m: float(np.median(v)) for m, v in its.items()}
    verdict(5, monotone and med["PEM_AO"] < med["PEM_GD"], 300, t,
            f"traces monotone: {monotone}; median iterations to 1% of floor "
            f"PEM-AO {med['PEM_AO']:g} < PEM-GD {med['PEM_GD']:g}")


def test_criterion_06_array_size_trend():
    plan = ExperimentPlan(sweep="n_b", sweep_values=(4, 8, 12), trials=500)
    with Timer() as t:
        records = run_plan(plan)
    m = {v: means(records, float(v)) for v in (4, 8, 12)}
    methods = ("SCM", "EVD", "PEM_GD", "PEM_AO")
    nondecreasing = all(m[4][k] <= m[8][k] <= m[12][k] for k in methods)

    def gap(v):
        return m[v]["SCM"] - min(m[v]["PEM_GD"], m[v]["PEM_AO"])

    ok = nondecreasing and gap(12) > gap(4)
    cells = ", ".join(f"N_B={v}: " + "/".join(f"{m[v][k]:.4f}" for k in methods)
                      for v in (4, 8, 12))
    verdict(6, ok, 600, t, f"SCM/EVD/GD/AO {cells}; PEM-vs-SCM gap {gap(4):.4f} -> {gap(12):.4f}")


def test_criterion_07_secrecy_ordering():
    plan = ExperimentPlan(sweep="snr", sweep_values=(0.0, 10.0), trials=500)
    with Timer() as t:
        records = run_plan(plan)
    ok, parts, all_zero = True, [], True
    for v in (0.0, 10.0):
        sr = {row["method"]: row["sr_bits_mean"] for row in aggregate(records)
              if row["sweep_value"] == v}
        ok &= min(sr["PEM_GD"], sr["PEM_AO"]) >= sr["EVD"] >= sr["SCM"]
        all_zero &= max(sr.values()) == 0.0
        parts.append(f"{v:g} dB AO {sr['PEM_AO']:.4f} GD {sr['PEM_GD']:.4f} "
                     f"EVD {sr['EVD']:.4f} SCM {sr['SCM']:.4f}")
    note = " (every secrecy rate is zero: the eavesdropper out-rates Bob)" if all_zero else ""
    verdict(7, ok, 600, t, "mean SR bits " + "; ".join(parts) + note)


@pytest.mark.xfail(strict=True, reason="Bob's view of the IRS lies within ~6 degrees of the "
                   "direct jamming path, so the better-fitted PEM estimates null the desired "
                   "signal harder than SCM does; Bob's rate then orders SCM above PEM")
def test_rate_only_ordering():
    plan = ExperimentPlan(sweep="snr", sweep_values=(0.0, 10.0), trials=100, eav_model=None)
    records = run_plan(plan)
    for v in (0.0, 10.0):
        sr = {row["method"]: row["sr_bits_mean"] for row in aggregate(records)
              if row["sweep_value"] == v}
        assert min(sr["PEM_GD"], sr["PEM_AO"]) >= sr["EVD"] >= sr["SCM"]


def test_criterion_08_crlb():
    grid = DEFAULT_GRIDS["crlb"]
    plan = ExperimentPlan(sweep="crlb", sweep_values=grid, trials=100)
    with Timer() as t:
        truth = build_scenario(ScenarioConfig()).truth
        halving = max(abs(crlb_sum(truth, 2 * K) / crlb_sum(truth, K) - 0.5) for K in (1, 5, 40))
        records = run_plan(plan)
    below, worst = True, np.inf
    for v in grid:
        m = means(records, float(v))
        bound = m.pop("CRLB")
        below &= all(bound < x for x in m.values())
        worst = min(worst, min(m.values()) / bound)
    verdict(8, halving < 1e-12 and below, 120, t,
            f"doubling K scales the bound by 0.5 to {halving:.1e}; smallest mean NMSE / CRLB "
            f"over the grid {worst:.3f} (> 1)")


def test_criterion_09_scm_consistency():
    with Timer() as t:
        sc = build_scenario(ScenarioConfig(jnr_db=5.0, K=100_000))
        batch = sample_observations(sc.truth, sc.config.K, seed=9)
        R = scm(batch).R_hat - sc.truth.sigma_B2 * np.eye(sc.config.N_B)
        err = nmse(R, sc.truth.R_i)
    verdict(9, err < 0.01, 60, t, f"NMSE of SCM minus noise at K=1e5 {err:.2e} (< 0.01)")


def test_criterion_10_structural_invariants():
    failures = []
    rng = np.random.default_rng(1010)
    with Timer() as t:
        for seed in range(200):
            sc = build_scenario(ScenarioConfig(seed=seed))
            R = sc.truth.R_i
            w = np.linalg.eigvalsh(R)[::-1]
            if w[2] > 1e-10 * w[0]:
                failures.append(f"rank {seed}")
            if np.abs(R - R.conj().T).max() > 1e-15 * np.abs(R).max() or w[-1] < -1e-10 * w[0]:
                failures.append(f"hermitian/psd {seed}")
            for n in (sc.config.N_B, sc.config.irs.num_antennas):
                h = steering_vector(rng.uniform(0, np.pi), ArraySpec(n))
                if abs(np.linalg.norm(h) - 1) > 1e-12:
                    failures.append(f"steering {seed}")
            sol = nsp_max_wfrp(R, sc.channels.H_A1, sc.tx.v, rank=2)
            if sol.residual_jam_power > 1e-10 * np.trace(R).real:
                failures.append(f"nulling {seed}")
            state = PemGdState.random(rng, sc.config.irs.num_antennas, sc.config.N_B,
                                      sc.config.n_jam)
            c = complex(*rng.standard_normal(2))
            ref = pem_gd_model(state, sc.channels)
            for s in (replace(state, alpha=c * state.alpha, beta=state.beta / np.conj(c)),
                      replace(state, omega=c * state.omega, nu=state.nu / np.conj(c))):
                if rel_err(pem_gd_model(s, sc.channels), ref) > 1e-10:
                    failures.append(f"gauge {seed}")
    verdict(10, not failures, 120, t,
            f"200 seeds, {len(failures)} violations" + (f": {failures[:5]}" if failures else ""))


def test_criterion_11_determinism(tmp_path):
    argv = [sys.executable, "-m", "irs_jcm", "--sweep", "jnr", "--values", "0,5", "--trials", "3",
            "--seed", "11", "--no-runtime", "--quiet"]
    with Timer() as t:
        for name in ("a", "b"):
            subprocess.run(argv + ["--out", str(tmp_path / f"{name}.csv")], check=True,
                           capture_output=True, timeout=60)
    same = all((tmp_path / f"a{s}.csv").read_bytes() == (tmp_path / f"b{s}.csv").read_bytes()
               for s in ("", "_aggregate"))
    verdict(11, same, 60, t, f"two separate runs give byte-identical files: {same}")
