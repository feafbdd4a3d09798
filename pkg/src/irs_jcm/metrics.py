"""Null-space receive beamforming and the evaluation metrics (NMSE, SR, CRLB)."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .scenario import angles_from_layout, path_gain, rank1_channel
from .signal_model import ScenarioConfig

__all__ = [
    "RbfSolution",
    "MetricReport",
    "MrcEavesdropper",
    "nsp_max_wfrp",
    "nmse",
    "bob_rate",
    "secrecy_rate",
    "fisher_information",
    "crlb_sum",
]


@dataclass(frozen=True)
class RbfSolution:
    v_BR: np.ndarray
    residual_jam_power: float
    achieved_signal_power: float
    null_dim: int


@dataclass(frozen=True)
class MetricReport:
    nmse: float
    sr_bits: float
    crlb_sum: float
    runtime: float
    iterations: int


def nsp_max_wfrp(R_est: np.ndarray, H_A1: np.ndarray, v: np.ndarray, rank_tol: float = 1e-6,
                 rank: int | None = None, R_check: np.ndarray | None = None) -> RbfSolution:
    """Receive beamformer maximizing desired power inside the null space of ``R_est``.

    The null space is spanned by eigenvectors whose eigenvalue falls below
    ``rank_tol * lambda_max`` (negative eigenvalues included), or, when
    ``rank`` is given, by all but the ``rank`` dominant eigenvectors. The
    optimum is the normalized projection of the matched filter ``H_A1 v``.
    ``R_check`` (default ``R_est``) is the covariance used to report residual
    jamming power.
    """
    R_est = 0.5 * (R_est + R_est.conj().T)
    g = H_A1 @ v
    w, U = np.linalg.eigh(R_est)
    if rank is not None:
        N = U[:, : R_est.shape[0] - rank]
    else:
        lam_max = max(w[-1], 0.0)
        N = U[:, w <= rank_tol * lam_max] if lam_max > 0 else U
    if N.shape[1] == 0:
        raise ValueError("jamming occupies full space: empty null space")
    proj = N @ (N.conj().T @ g)
    norm = np.linalg.norm(proj)
    if norm <= 1e-14 * max(np.linalg.norm(g), 1e-300):
        raise ValueError("signal orthogonal to null space")
    v_BR = proj / norm
    R_check = R_est if R_check is None else R_check
    residual = float(np.real(np.vdot(v_BR, R_check @ v_BR)))
    signal = float(abs(np.vdot(v_BR, g)) ** 2)
    return RbfSolution(v_BR, residual, signal, N.shape[1])


def nmse(R_est: np.ndarray, R_truth: np.ndarray) -> float:
    """``||R_est - R_truth||_F^2 / ||R_truth||_F^2``."""
    denom = float(np.linalg.norm(R_truth) ** 2)
    if denom == 0.0:
        raise ValueError("nmse undefined for a zero reference matrix")
    return float(np.linalg.norm(R_est - R_truth) ** 2 / denom)


class MrcEavesdropper:
    """Mallory listening with maximal-ratio combining and no self-interference.

    Alice's signal reaches Mallory directly and via the IRS; Alice's AN is
    received in full (it is only nulled towards the IRS and Bob). Mallory's
    noise variance equals Bob's.
    """

    def __init__(self, config: ScenarioConfig):
        angles = angles_from_layout(config.layout)
        lay = config.layout

        def gain(a, b):
            return path_gain(lay.distance(a, b), config.path_loss_exponent, config.ref_distance)

        self.H_IM_h = rank1_channel(angles["IM"][1], angles["IM"][0], config.mallory, config.irs)
        self.H_AM_h = rank1_channel(angles["AM"][1], angles["AM"][0], config.mallory, config.alice)
        self.g_AIM = gain("alice", "irs") * gain("irs", "mallory")
        self.g_AM = gain("alice", "mallory")
        self.config = config

    def equivalent_channel(self, channels) -> np.ndarray:
        return (np.sqrt(self.g_AIM) * self.H_IM_h @ channels.Theta @ channels.H_AI_h
                + np.sqrt(self.g_AM) * self.H_AM_h)

    def rate(self, channels, tx, sigma2: float) -> float:
        cfg = self.config
        H_A2 = self.equivalent_channel(channels)
        g = H_A2 @ tx.v
        if not np.any(g):
            return 0.0
        w = g / np.linalg.norm(g)
        signal = cfg.beta * cfg.P_A * np.linalg.norm(g) ** 2
        an = (1 - cfg.beta) * cfg.P_A * np.linalg.norm(tx.T_A_AN.conj().T @ H_A2.conj().T @ w) ** 2
        return float(np.log2(1 + signal / (an + sigma2)))


def bob_rate(channels, tx, v_BR: np.ndarray, truth, beta: float, P_A: float) -> float:
    """``log2(1 + SINR_B)`` with jamming ``R_i`` plus white noise as interference."""
    signal = beta * P_A * abs(np.vdot(v_BR, channels.H_A1 @ tx.v)) ** 2
    interference = np.real(np.vdot(v_BR, truth.R_i @ v_BR)) + truth.sigma_B2 * np.real(np.vdot(v_BR, v_BR))
    if interference <= 0:
        return float("inf")
    return float(np.log2(1 + signal / interference))


def secrecy_rate(channels, tx, v_BR: np.ndarray, truth, config: ScenarioConfig,
                 eav_model: MrcEavesdropper | None | str = "mrc") -> float:
    """``max(0, R_B - R_E)``; with ``eav_model=None`` returns Bob's rate alone."""
    r_b = bob_rate(channels, tx, v_BR, truth, config.beta, config.P_A)
    if eav_model is None:
        return r_b
    if isinstance(eav_model, str):
        if eav_model != "mrc":
            raise ValueError(f"unknown eavesdropper model {eav_model!r}")
        eav_model = MrcEavesdropper(config)
    return max(0.0, r_b - eav_model.rate(channels, tx, truth.sigma_B2))


def _hermitian_basis(n: int) -> np.ndarray:
    """Real coordinates of an ``n x n`` Hermitian matrix as basis matrices.

    Order: diagonal entries, then the real and imaginary part of every
    strictly-lower entry ``(p, q)``, ``p > q``, column by column.
    """
    basis = []
    for p in range(n):
        D = np.zeros((n, n), complex)
        D[p, p] = 1
        basis.append(D)
    for q in range(n):
        for p in range(q + 1, n):
            D = np.zeros((n, n), complex)
            D[p, q] = D[q, p] = 1
            basis.append(D)
            D = np.zeros((n, n), complex)
            D[p, q], D[q, p] = 1j, -1j
            basis.append(D)
    return np.array(basis)


def fisher_information(C: np.ndarray, K: int) -> np.ndarray:
    """Fisher matrix of ``K`` zero-mean ``CN(0, C)`` snapshots in the real
    Hermitian coordinates of :func:`_hermitian_basis`."""
    W = np.linalg.inv(C)
    Y = W[None] @ _hermitian_basis(C.shape[0])
    return K * np.real(np.einsum("kij,lji->kl", Y, Y))


def crlb_sum(truth, K: int, terms: str = "all", return_flag: bool = False):
    """Sum of per-parameter CRLBs of the unstructured covariance, over ``||R_i||_F^2``.

    ``terms`` picks which variances enter the sum:

    ``"all"``          every real coordinate once (default)
    ``"frobenius"``    off-diagonal coordinates weighted twice, i.e. the bound
                       on ``E||R_hat - R||_F^2``
    ``"first_column"`` only the entries of the first column of ``R``
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    R = truth.R_i
    n = R.shape[0]
    C = R + truth.sigma_B2 * np.eye(n)
    info = fisher_information(C, K)
    singular = np.linalg.cond(info) > 1e12
    if singular:
        warnings.warn("singular Fisher matrix; using pseudo-inverse", RuntimeWarning)
        var = np.diag(np.linalg.pinv(info))
    else:
        var = np.diag(np.linalg.inv(info))
    if terms == "all":
        total = var.sum()
    elif terms == "frobenius":
        total = var[:n].sum() + 2 * var[n:].sum()
    elif terms == "first_column":
        # first column pairs sit right after the diagonal: (Re, Im) for p = 1..n-1
        total = var[0] + var[n:n + 2 * (n - 1)].sum()
    else:
        raise ValueError(f"unknown terms {terms!r}")
    out = float(total / np.linalg.norm(R) ** 2)
    return (out, singular) if return_flag else out
