"""Transmit side, ideal JCM, calibration and observation sampling."""

from dataclasses import replace

import numpy as np
import pytest

from irs_jcm.estimators import scm
from irs_jcm.signal_model import (InfeasibleError, JcmTruth, ScenarioConfig, build_scenario,
                                  calibrate, db2lin, ideal_jcm, make_transmit_side,
                                  sample_observations)
from irs_jcm.scenario import build_channels

from conftest import random_unitary


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(beta=1.5), dict(n_jam=0), dict(n_jam=8), dict(K=0),
                                    dict(P_M=-1.0), dict(noise_source="oracle")])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            ScenarioConfig(**kw)

    def test_resize(self):
        cfg = ScenarioConfig().with_(N_B=12, M=32, jnr_db=0.0)
        assert cfg.N_B == 12 and cfg.irs.num_antennas == 32 and cfg.jnr_db == 0.0
        assert cfg.bob.wavelength == ScenarioConfig().bob.wavelength


class TestTransmitSide:
    def test_normalizations(self, default_scenario):
        tx = default_scenario.tx
        assert abs(np.vdot(tx.v, tx.v) - 1) < 1e-12
        assert abs(np.trace(tx.T_A_AN @ tx.T_A_AN.conj().T) - 1) < 1e-12
        assert abs(np.trace(tx.T_M_AN @ tx.T_M_AN.conj().T) - 1) < 1e-12

    def test_an_in_null_space(self, default_scenario):
        ch, tx = default_scenario.channels, default_scenario.tx
        assert np.linalg.norm(ch.H_AB_h @ tx.T_A_AN) <= 1e-10
        assert np.linalg.norm(ch.H_AI_h @ tx.T_A_AN) <= 1e-10

    def test_jammer_projection_semi_unitary(self, default_scenario):
        T = default_scenario.tx.T_M_AN
        n_jam = default_scenario.config.n_jam
        np.testing.assert_allclose(T.conj().T @ T, np.eye(n_jam) / n_jam, atol=1e-14)

    def test_v_is_dominant_direction(self, default_scenario):
        H, v = default_scenario.channels.H_A1, default_scenario.tx.v
        assert np.linalg.norm(H @ v) == pytest.approx(np.linalg.norm(H, 2), rel=1e-12)

    def test_an_infeasible(self):
        cfg = ScenarioConfig().with_(N_A=1)
        with pytest.raises(InfeasibleError, match="AN infeasible"):
            make_transmit_side(build_channels(cfg), cfg)


class TestIdealJcm:
    def test_zero_power(self, default_scenario):
        sc = default_scenario
        truth = ideal_jcm(sc.channels, sc.tx, replace(sc.config, P_M=0.0))
        assert not np.any(truth.R_i)

    def test_direct_path_only_is_rank_one(self, default_scenario):
        sc = default_scenario
        ch = sc.channels
        ch = replace(ch, g_MIB=0.0, H_M1=np.sqrt(ch.g_MB) * ch.H_MB_h)
        w = np.linalg.eigvalsh(ideal_jcm(ch, sc.tx, sc.config).R_i)[::-1]
        assert w[1] <= 1e-12 * w[0]

    def test_default_rank_two(self, default_scenario):
        R = default_scenario.truth.R_i
        w = np.linalg.eigvalsh(R)[::-1]
        assert w[1] > 1e-10 * w[0]
        assert w[2] <= 1e-10 * w[0]
        np.testing.assert_allclose(R, R.conj().T, atol=1e-15 * np.abs(R).max())
        assert w[-1] >= -1e-10 * w[0]

    def test_factor(self, default_scenario):
        t = default_scenario.truth
        assert np.array_equal(t.R_i, t.F @ t.F.conj().T)

    def test_invariant_to_jammer_rotation(self, default_scenario, rng):
        sc = default_scenario
        U = random_unitary(rng, sc.config.n_jam)
        tx = replace(sc.tx, T_M_AN=sc.tx.T_M_AN @ U)
        np.testing.assert_allclose(ideal_jcm(sc.channels, tx, sc.config).R_i, sc.truth.R_i,
                                   atol=1e-12 * np.abs(sc.truth.R_i).max())


class TestCalibrate:
    def test_hits_targets(self):
        cfg = ScenarioConfig(jnr_db=3.0, snr_db=-2.0)
        sc = build_scenario(cfg)
        ch, tx, t = sc.channels, sc.tx, sc.truth
        snr = cfg.beta * cfg.P_A * np.linalg.norm(ch.H_A1 @ tx.v) ** 2 / (cfg.N_B * t.sigma_B2)
        jnr = np.trace(t.R_i).real / (cfg.N_B * t.sigma_B2)
        assert 10 * np.log10(snr) == pytest.approx(-2.0, abs=1e-10)
        assert 10 * np.log10(jnr) == pytest.approx(3.0, abs=1e-10)

    def test_zero_db_means_equal_power(self):
        sc = build_scenario(ScenarioConfig(jnr_db=0.0))
        assert np.trace(sc.truth.R_i).real == pytest.approx(8 * sc.truth.sigma_B2, rel=1e-12)

    def test_doubling_power_adds_3db(self, default_scenario):
        sc = default_scenario
        jnr = [np.trace(ideal_jcm(sc.channels, sc.tx, replace(sc.config, P_M=p)).R_i).real
               for p in (sc.config.P_M, 2 * sc.config.P_M)]
        assert 10 * np.log10(jnr[1] / jnr[0]) == pytest.approx(3.0103, abs=1e-4)

    def test_fixed_powers_skip_calibration(self, default_scenario):
        sc = build_scenario(ScenarioConfig(), powers=(2.0, 3.0))
        assert sc.truth.sigma_B2 == 2.0 and sc.config.P_M == 3.0

    def test_zero_channel(self, default_scenario):
        sc = default_scenario
        ch = replace(sc.channels, H_A1=np.zeros_like(sc.channels.H_A1))
        with pytest.raises(InfeasibleError, match="calibration infeasible"):
            calibrate(ch, sc.tx, sc.config)

    def test_db2lin(self):
        assert db2lin(10.0) == pytest.approx(10.0)
        assert db2lin(-3.0103) == pytest.approx(0.5, rel=1e-5)


class TestSampling:
    def test_noiseless_single_stream_in_column_space(self, rng):
        F = rng.standard_normal((6, 1)) + 1j * rng.standard_normal((6, 1))
        Y = sample_observations(JcmTruth(F @ F.conj().T, F, 0.0), 20, seed=3).samples
        P = np.eye(6) - F @ F.conj().T / np.vdot(F, F)
        assert np.linalg.norm(Y @ P.T) < 1e-12 * np.linalg.norm(Y)

    def test_bit_reproducible(self, default_scenario):
        a = sample_observations(default_scenario.truth, 7, seed=11).samples
        b = sample_observations(default_scenario.truth, 7, seed=11).samples
        assert np.array_equal(a, b)
        c = sample_observations(default_scenario.truth, 7, seed=12).samples
        assert not np.array_equal(a, c)

    def test_large_sample_moments(self, default_scenario):
        t = default_scenario.truth
        K = 10 ** 6
        batch = sample_observations(t, K, seed=5)
        assert batch.K == K
        C = t.R_i + t.sigma_B2 * np.eye(t.R_i.shape[0])
        # zero mean: each coordinate within five standard errors
        se = np.sqrt(np.real(np.diag(C)) / K)
        assert np.all(np.abs(batch.samples.mean(axis=0)) < 5 * se)
        R_hat = scm(batch).R_hat
        assert np.linalg.norm(R_hat - C) / np.linalg.norm(C) < 0.01

    def test_invalid_K(self, default_scenario):
        with pytest.raises(ValueError):
            sample_observations(default_scenario.truth, 0, seed=0)
