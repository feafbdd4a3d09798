"""Transmit-side design, ideal jamming covariance and silent-period samples."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import null_space

from .scenario import ArraySpec, ChannelSet, NodeLayout, build_channels

__all__ = [
    "ScenarioConfig",
    "TransmitSide",
    "JcmTruth",
    "ObservationBatch",
    "InfeasibleError",
    "make_transmit_side",
    "ideal_jcm",
    "calibrate",
    "sample_observations",
    "complex_normal",
    "db2lin",
    "Scenario",
    "build_scenario",
]


class InfeasibleError(ValueError):
    """Raised when an AN projection or a power calibration cannot be formed."""


def db2lin(db: float) -> float:
    return 10.0 ** (db / 10.0)


def complex_normal(rng: np.random.Generator, shape, var: float = 1.0) -> np.ndarray:
    """Circular complex Gaussian samples with per-entry variance ``var``."""
    scale = np.sqrt(var / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@dataclass(frozen=True)
class ScenarioConfig:
    """Every knob of one simulated link. Defaults reproduce the reference setup."""

    alice: ArraySpec = ArraySpec(8)
    bob: ArraySpec = ArraySpec(8)
    mallory: ArraySpec = ArraySpec(8)
    irs: ArraySpec = ArraySpec(16)
    layout: NodeLayout = field(default_factory=NodeLayout)
    P_A: float = 1.0
    P_M: float = 1.0
    beta: float = 0.9
    n_jam: int = 4
    K: int = 5
    jnr_db: float = 5.0
    snr_db: float = 10.0
    seed: int = 0
    path_loss_exponent: float = 2.0
    ref_distance: float = 1.0
    irs_mode: str = "random"
    irs_fixed_phases: tuple | None = None
    noise_source: str = "evd"

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        if not 1 <= self.n_jam <= self.mallory.num_antennas - 1:
            raise ValueError(f"n_jam must lie in [1, N_M - 1], got {self.n_jam}")
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.P_A < 0 or self.P_M < 0:
            raise ValueError("transmit powers must be nonnegative")
        if self.noise_source not in ("evd", "truth"):
            raise ValueError(f"noise_source must be 'evd' or 'truth', got {self.noise_source!r}")

    @property
    def N_B(self) -> int:
        return self.bob.num_antennas

    def with_(self, **changes) -> "ScenarioConfig":
        """Copy with some fields replaced; ``N_A``/``N_B``/``N_M``/``M`` resize arrays."""
        for key, attr in (("N_A", "alice"), ("N_B", "bob"), ("N_M", "mallory"), ("M", "irs")):
            if key in changes:
                base = changes.get(attr, getattr(self, attr))
                changes[attr] = replace(base, num_antennas=int(changes.pop(key)))
        return replace(self, **changes)


@dataclass(frozen=True)
class TransmitSide:
    v: np.ndarray
    T_A_AN: np.ndarray
    T_M_AN: np.ndarray


@dataclass(frozen=True)
class JcmTruth:
    R_i: np.ndarray
    F: np.ndarray
    sigma_B2: float


@dataclass(frozen=True)
class ObservationBatch:
    samples: np.ndarray  # (K, N_B), one observation per row
    sigma_B2_true: float

    @property
    def K(self) -> int:
        return self.samples.shape[0]


def make_transmit_side(channels: ChannelSet, config: ScenarioConfig) -> TransmitSide:
    """Transmit beamformer, Alice's AN projector and Mallory's jamming projector.

    ``v`` is the dominant right-singular vector of ``H_A1``. The AN projector
    spans the null space of ``[H_AI^H; H_AB^H]`` and Mallory's projection is a
    seeded random semi-unitary matrix; both are scaled to unit ``tr(T T^H)``.
    """
    _, _, vh = np.linalg.svd(channels.H_A1)
    v = vh[0].conj()

    stacked = np.vstack([channels.H_AI_h, channels.H_AB_h])
    basis = null_space(stacked, rcond=1e-10)
    if basis.shape[1] == 0:
        raise InfeasibleError("AN infeasible: stacked CM channels have no null space")
    T_A_AN = basis @ basis.conj().T / np.sqrt(basis.shape[1])

    rng = np.random.default_rng([config.seed, 1])
    q, _ = np.linalg.qr(complex_normal(rng, (config.mallory.num_antennas, config.n_jam)))
    T_M_AN = q / np.sqrt(config.n_jam)
    return TransmitSide(v, T_A_AN, T_M_AN)


def _jamming_factor(channels: ChannelSet, tx: TransmitSide, P_M: float) -> np.ndarray:
    return np.sqrt(P_M) * channels.H_M1 @ tx.T_M_AN


def ideal_jcm(channels: ChannelSet, tx: TransmitSide, config: ScenarioConfig,
              sigma_B2: float = 0.0) -> JcmTruth:
    """``R_i = F F^H`` with ``F = sqrt(P_M) H_M1 T_M_AN``."""
    F = _jamming_factor(channels, tx, config.P_M)
    return JcmTruth(F @ F.conj().T, F, sigma_B2)


def calibrate(channels: ChannelSet, tx: TransmitSide, config: ScenarioConfig) -> tuple[float, float]:
    """Noise variance and Mallory power hitting the configured SNR and JNR.

    Both ratios are per-receive-antenna averages::

        SNR = beta * P_A * ||H_A1 v||^2 / (N_B * sigma^2)
        JNR = tr(R_i) / (N_B * sigma^2)
    """
    N_B = config.N_B
    signal = config.beta * config.P_A * np.linalg.norm(channels.H_A1 @ tx.v) ** 2
    if signal <= 0:
        raise InfeasibleError("calibration infeasible: zero equivalent Alice channel")
    sigma_B2 = signal / (N_B * db2lin(config.snr_db))

    F1 = _jamming_factor(channels, tx, 1.0)
    unit_jam = np.real(np.vdot(F1, F1))
    if unit_jam <= 0:
        raise InfeasibleError("calibration infeasible: zero equivalent Mallory channel")
    P_M = db2lin(config.jnr_db) * N_B * sigma_B2 / unit_jam
    return float(sigma_B2), float(P_M)


def sample_observations(truth: JcmTruth, K: int, seed: int) -> ObservationBatch:
    """``K`` silent-period snapshots ``y = F z + n`` drawn from ``seed``."""
    if K < 1:
        raise ValueError("K must be >= 1")
    rng = np.random.default_rng(seed)
    N_B, N_J = truth.F.shape
    z = complex_normal(rng, (K, N_J))
    n = complex_normal(rng, (K, N_B), truth.sigma_B2)
    return ObservationBatch(z @ truth.F.T + n, float(truth.sigma_B2))


@dataclass(frozen=True)
class Scenario:
    """Everything that is fixed across Monte-Carlo draws of one link."""

    config: ScenarioConfig
    channels: ChannelSet
    tx: TransmitSide
    truth: JcmTruth


def build_scenario(config: ScenarioConfig, powers: tuple[float, float] | None = None) -> Scenario:
    """Channels, transmit side, calibrated powers and the ideal JCM.

    ``powers = (sigma_B2, P_M)`` skips calibration and uses the given noise
    variance and Mallory power as they are.
    """
    channels = build_channels(config)
    tx = make_transmit_side(channels, config)
    sigma_B2, P_M = calibrate(channels, tx, config) if powers is None else map(float, powers)
    config = replace(config, P_M=P_M)
    truth = ideal_jcm(channels, tx, config, sigma_B2)
    return Scenario(config, channels, tx, truth)
