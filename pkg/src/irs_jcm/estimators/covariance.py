"""Sample covariance and the rank-constrained eigen-decomposition estimator."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["METHODS", "JcmEstimate", "hermitian", "scm", "evd_estimate", "psd_part"]

METHODS = ("SCM", "EVD", "PEM_GD", "PEM_AO")


@dataclass
class JcmEstimate:
    """An estimated jamming covariance plus solver bookkeeping."""

    R_hat: np.ndarray
    method: str
    sigma_hat2: float | None = None
    iterations: int = 0
    objective_trace: list = field(default_factory=list)
    converged: bool = True
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")


def hermitian(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.conj().T)


def psd_part(A: np.ndarray) -> np.ndarray:
    """Projection of a Hermitian matrix onto the PSD cone."""
    w, U = np.linalg.eigh(hermitian(A))
    return (U * np.clip(w, 0, None)) @ U.conj().T


def scm(batch) -> JcmEstimate:
    """``(1/K) sum_k y_k y_k^H`` over the rows of ``batch.samples``.

    Accepts an :class:`ObservationBatch` or a bare ``(K, N)`` array. The
    result estimates jamming plus noise; subtract the noise floor before
    comparing it with a jamming covariance.
    """
    Y = np.asarray(getattr(batch, "samples", batch))
    if Y.ndim != 2 or Y.shape[0] == 0:
        raise ValueError("scm needs a non-empty (K, N) batch")
    R = Y.T @ Y.conj() / Y.shape[0]
    return JcmEstimate(hermitian(R), "SCM")


def evd_estimate(R_scm: np.ndarray, rank: int = 2) -> JcmEstimate:
    """Rank-``rank`` signal subspace minus the averaged noise eigenvalues.

    The noise variance is the mean of the ``N - rank`` smallest eigenvalues;
    the kept eigenvalues are reduced by it and clamped at zero so the output
    stays PSD.
    """
    R_scm = np.asarray(R_scm)
    N = R_scm.shape[0]
    if N <= rank:
        raise ValueError(f"insufficient dimension: N={N} must exceed rank={rank}")
    w, U = np.linalg.eigh(hermitian(R_scm))
    w, U = w[::-1], U[:, ::-1]
    sigma2 = float(np.mean(w[rank:]))
    lam = np.clip(w[:rank] - sigma2, 0, None)
    R = (U[:, :rank] * lam) @ U[:, :rank].conj().T
    return JcmEstimate(hermitian(R), "EVD", sigma_hat2=sigma2)
