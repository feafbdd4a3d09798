"""Parametric JCM fit by block gradient descent over four factor vectors.

The jamming covariance is modelled as ``R = A A^H`` with

    A = B alpha beta^H + omega nu^H,    B = H_IB^H Theta (known),

so the reflected path is pinned to Bob's IRS-facing subspace while the
direct path ``omega`` is free. ``beta`` and ``nu`` live in a surrogate jammer
space of dimension ``n_jam`` which only has to exceed the true stream count.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .covariance import JcmEstimate, hermitian
from . import _gd_kernel
from .numerics import QuarticLine, armijo

__all__ = [
    "PemGdState",
    "factor_matrix",
    "pem_gd_model",
    "pem_gd_objective",
    "pem_gd_gradients",
    "pem_gd",
]

BLOCKS = ("alpha", "beta", "omega", "nu")


@dataclass(frozen=True)
class PemGdState:
    alpha: np.ndarray  # (M,)
    beta: np.ndarray   # (n_jam,)
    omega: np.ndarray  # (N_B,)
    nu: np.ndarray     # (n_jam,)

    @classmethod
    def random(cls, rng: np.random.Generator, M: int, N_B: int, n_jam: int) -> "PemGdState":
        def cn(n):
            return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
        return cls(cn(M), cn(n_jam), cn(N_B), cn(n_jam))

    def scaled(self, c: float) -> "PemGdState":
        return PemGdState(c * self.alpha, c * self.beta, c * self.omega, c * self.nu)


def _known_path(channels) -> np.ndarray:
    return channels if isinstance(channels, np.ndarray) else channels.irs_to_bob


def factor_matrix(state: PemGdState, B: np.ndarray) -> np.ndarray:
    return np.outer(B @ state.alpha, state.beta.conj()) + np.outer(state.omega, state.nu.conj())


def pem_gd_model(state: PemGdState, channels) -> np.ndarray:
    """``R(alpha, beta, omega, nu)``; ``channels`` is a ChannelSet or ``B`` itself."""
    A = factor_matrix(state, _known_path(channels))
    return A @ A.conj().T


def pem_gd_objective(state: PemGdState, S: np.ndarray, channels) -> float:
    E = pem_gd_model(state, channels) - S
    return float(np.real(np.vdot(E, E)))


def _residual(state, S, B):
    A = factor_matrix(state, B)
    return A, A @ A.conj().T - S


def _block_gradient(block, state, A, E, B):
    if block == "alpha":
        return B.conj().T @ (E @ (A @ state.beta))
    if block == "beta":
        return A.conj().T @ (E @ (B @ state.alpha))
    if block == "omega":
        return E @ (A @ state.nu)
    return A.conj().T @ (E @ state.omega)


def pem_gd_gradients(state: PemGdState, S: np.ndarray, channels):
    """Conjugate gradients w.r.t. ``alpha, beta, omega, nu`` (in that order).

    Normalized as half the Wirtinger derivative ``df/dx*``, e.g.
    ``grad_alpha = Theta^H H_IB (R - S)^H A beta``.
    """
    B = _known_path(channels)
    A, E = _residual(state, S, B)
    return tuple(_block_gradient(b, state, A, E, B) for b in BLOCKS)


def _block_step(state, block, grad, A, E, B, f0, line_opts):
    """Backtracking step on one block; the objective is a quartic in ``t``."""
    d = -grad
    if block == "alpha":
        D = np.outer(B @ d, state.beta.conj())
    elif block == "beta":
        D = np.outer(B @ state.alpha, d.conj())
    elif block == "omega":
        D = np.outer(d, state.nu.conj())
    else:
        D = np.outer(state.omega, d.conj())
    AD = A @ D.conj().T
    line = QuarticLine(E, AD + AD.conj().T, D @ D.conj().T)
    dd = float(np.real(np.vdot(d, d)))
    t, ft = armijo(line, f0, dd, **line_opts)
    if t is None:
        return state, f0, True
    if t == 0.0:
        return state, f0, False
    return replace(state, **{block: getattr(state, block) + t * d}), ft, False


def _descend(state, Sn, B, max_iters, tol, patience, line_opts):
    f = pem_gd_objective(state, Sn, B)
    trace = [f]
    quiet = 0
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        f_start = f
        stalls = 0
        for block in BLOCKS:
            A, E = _residual(state, Sn, B)
            f = float(np.real(np.vdot(E, E)))
            grad = _block_gradient(block, state, A, E, B)
            state, _, stalled = _block_step(state, block, grad, A, E, B, f, line_opts)
            stalls += stalled
        f = pem_gd_objective(state, Sn, B)
        # guard against round-off in the quartic line model
        f = min(f, f_start) if f <= f_start * (1 + 1e-12) else f
        trace.append(f)
        if stalls == len(BLOCKS):
            break
        if f <= 1e-28:
            converged = True
            break
        rel = (f_start - f) / f_start
        quiet = quiet + 1 if rel < tol else 0
        if quiet >= patience:
            converged = True
            break
    return trace, it, converged, state


def pem_gd(S: np.ndarray, channels, max_iters: int = 2000, tol: float = 1e-8, seed: int = 0,
           n_jam: int | None = None, patience: int = 5, init: PemGdState | None = None,
           init_step: float = 1.0, shrink: float = 0.5, slope_frac: float = 0.3,
           max_halvings: int = 60, compiled: bool = True) -> JcmEstimate:
    """Fit the factored model to ``S`` by block gradient descent.

    One iteration updates ``alpha, beta, omega, nu`` in turn, each with a
    fresh gradient and its own Armijo step (initial step reset to
    ``init_step`` every time). Stops once the relative decrease stays below
    ``tol`` for ``patience`` consecutive iterations. Internally ``S`` is
    scaled to unit Frobenius norm; the seeded Gaussian start is rescaled to
    the same energy. ``objective_trace[m]`` is the objective after
    iteration ``m`` (index 0 is the start) in the units of ``S``.

    ``compiled=False`` runs the pure-numpy loop instead of the numba kernel;
    both follow the same arithmetic.
    """
    S = hermitian(np.asarray(S))
    B = _known_path(channels)
    N_B, M = B.shape
    n_jam = N_B if n_jam is None else int(n_jam)
    if n_jam < 1:
        raise ValueError("n_jam must be >= 1")
    scale = float(np.linalg.norm(S))
    if scale == 0.0:
        return JcmEstimate(np.zeros_like(S), "PEM_GD", iterations=0, objective_trace=[0.0])
    Sn = S / scale

    if init is None:
        state = PemGdState.random(np.random.default_rng(seed), M, N_B, n_jam)
        size = np.linalg.norm(pem_gd_model(state, B))
        state = state.scaled(size ** -0.25)
    else:
        state = init.scaled(scale ** -0.25)

    if compiled:
        out = _gd_kernel.gd_loop(np.ascontiguousarray(Sn), np.ascontiguousarray(B, dtype=complex),
                                 state.alpha, state.beta, state.omega, state.nu, int(max_iters),
                                 float(tol), int(patience), float(init_step), float(shrink),
                                 float(slope_frac), int(max_halvings))
        state = PemGdState(*out[:4])
        trace, it, status = list(out[4]), int(out[5]), int(out[6])
        converged = status == 1
    else:
        trace, it, converged, state = _descend(state, Sn, B, max_iters, tol, patience,
                                               dict(init_step=init_step, shrink=shrink,
                                                    slope_frac=slope_frac, max_halvings=max_halvings))

    R = hermitian(pem_gd_model(state, B)) * scale
    return JcmEstimate(R, "PEM_GD", iterations=it, objective_trace=[v * scale ** 2 for v in trace],
                       converged=converged, info={"state": state.scaled(scale ** 0.25)})
