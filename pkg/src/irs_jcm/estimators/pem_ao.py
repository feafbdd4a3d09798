"""Reduced parametric fit by alternating a closed-form scalar step with descent.

After absorbing the unknown gains, the model collapses to

    R = c1 h h^H + conj(c2) h w^H + c2 w h^H + w w^H,   c1 >= |c2|^2,

with ``h`` Bob's unit steering vector towards the IRS. For fixed ``w`` the
objective is a convex quadratic in ``(c1, c2)`` over a convex set; its KKT
point is available in closed form up to one real root of a cubic in the
multiplier. ``w`` is then refined by backtracking gradient descent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .covariance import JcmEstimate, hermitian
from .numerics import QuarticLine, armijo, solve_cubic_real

__all__ = [
    "PemAoState",
    "pem_ao_model",
    "pem_ao_objective",
    "kkt_scalars",
    "cubic_coefficients",
    "c_objective",
    "pem_ao_c_subproblem",
    "c_subproblem_bruteforce",
    "pem_ao_omega_gradient",
    "pem_ao",
]


@dataclass(frozen=True)
class PemAoState:
    c1: float
    c2: complex
    omega: np.ndarray


@dataclass(frozen=True)
class CStep:
    c1: float
    c2: complex
    v: float
    fallback: bool = False


def _steering(channels) -> np.ndarray:
    return channels if isinstance(channels, np.ndarray) else channels.h_ib_rx


def pem_ao_model(c1: float, c2: complex, omega: np.ndarray, h: np.ndarray) -> np.ndarray:
    hw = np.outer(h, omega.conj())
    return c1 * np.outer(h, h.conj()) + np.conj(c2) * hw + c2 * hw.conj().T + np.outer(omega, omega.conj())


def pem_ao_objective(state: PemAoState, S: np.ndarray, channels) -> float:
    E = pem_ao_model(state.c1, state.c2, state.omega, _steering(channels)) - S
    return float(np.real(np.vdot(E, E)))


def kkt_scalars(omega: np.ndarray, h: np.ndarray, S: np.ndarray):
    """``(a, e, gamma, tau)`` with ``a = w^H h``, ``e = w^H w``,
    ``gamma = h^H S w`` and ``tau = h^H S h`` (real for Hermitian ``S``)."""
    a = np.vdot(omega, h)
    e = float(np.real(np.vdot(omega, omega)))
    gamma = np.vdot(h, S @ omega)
    tau = float(np.real(np.vdot(h, S @ h)))
    return complex(a), e, complex(gamma), tau


def cubic_coefficients(a: complex, e: float, gamma: complex, tau: float):
    aa = float(np.real(a * np.conj(a)))
    l1 = 4 * e + 2 * tau - 4 * aa
    l2 = 4 * aa ** 2 - 8 * aa * e - 8 * aa * tau + 4 * e ** 2 + 8 * e * tau
    l3 = (8 * aa ** 2 * tau - 16 * aa * e * tau - 8 * aa * tau ** 2
          + 16 * tau * np.real(gamma * a) + 8 * e ** 2 * tau - 8 * abs(gamma) ** 2)
    return l1, l2, float(l3)


def c_objective(c1: float, c2: complex, a: complex, e: float, gamma: complex, tau: float) -> float:
    """The ``(c1, c2)``-dependent part of ``||R - S||_F^2`` for fixed ``w``."""
    c2s = np.conj(c2)
    val = (c1 ** 2 + 2 * c2s ** 2 * a ** 2 + 4 * c1 * c2s * a + 2 * c1 * a * np.conj(a)
           + 2 * c2 * c2s * e + 4 * c2s * a * e - 2 * c1 * tau - 4 * c2 * gamma)
    return float(np.real(val))


def _best_c1(c2, a, tau):
    # stationary c1 for a given c2, clipped onto the feasible set
    c1 = tau - abs(a) ** 2 - 2 * np.real(np.conj(c2) * a)
    return max(c1, abs(c2) ** 2)


def c_subproblem_bruteforce(a: complex, e: float, gamma: complex, tau: float,
                            grid: int = 81) -> tuple[float, complex]:
    """Grid search over ``c2`` with ``c1`` profiled out, then a local polish.

    The profiled objective is convex in ``c2``, so a Nelder-Mead polish from
    the best grid point reaches the global minimizer.
    """
    radius = 3.0 * (np.sqrt(abs(tau)) + abs(a) + abs(gamma) / max(np.sqrt(e), 1e-6) + 1.0)

    def prof(x):
        c2 = complex(x[0], x[1])
        return c_objective(_best_c1(c2, a, tau), c2, a, e, gamma, tau)

    axis = np.linspace(-radius, radius, grid)
    best = min(((prof((x, y)), x, y) for x in axis for y in axis))
    res = minimize(prof, x0=np.array(best[1:]), method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
    x = res.x if res.fun <= best[0] else np.array(best[1:])
    c2 = complex(x[0], x[1])
    return _best_c1(c2, a, tau), c2


def pem_ao_c_subproblem(a: complex, e: float, gamma: complex, tau: float) -> CStep:
    """Closed-form KKT minimizer of ``c_objective`` subject to ``c1 >= |c2|^2``.

    With ``m = |a|^2 - e - v/2``::

        c2 = ((tau - m) a - conj(gamma)) / m
        c1 = tau + v/2 - |a|^2 - conj(c2) a - c2 conj(a)

    ``v = 0`` when the unconstrained point is feasible (``l3 >= 0``);
    otherwise every positive root of ``v^3 + l1 v^2 + l2 v + l3`` is tried and
    the best feasible candidate kept. For ``w = 0`` the result is
    ``(max(tau, 0), 0)``. A vanishing ``m`` (only possible when ``w`` is
    parallel to ``h``) falls back to the numeric search.
    """
    aa = abs(a) ** 2
    if e == 0.0:
        # w = 0: only c1 enters the objective; c2 = 0 is the natural choice
        return CStep(max(tau, 0.0), 0j, 0.0)
    l1, l2, l3 = cubic_coefficients(a, e, gamma, tau)
    size = max(1.0, e, abs(tau))
    if l3 >= 0:
        candidates = [0.0]
    else:
        candidates = [v for v in solve_cubic_real(l1, l2, l3) if v > 0]

    best = None
    for v in candidates:
        m = aa - e - v / 2
        if abs(m) < 1e-12 * size:
            continue
        c2 = ((tau - m) * a - np.conj(gamma)) / m
        c1 = float(np.real(tau + v / 2 - aa - np.conj(c2) * a - c2 * np.conj(a)))
        if v > 0:
            # complementary slackness puts the optimum on the boundary
            c1 = max(c1, abs(c2) ** 2)
        if c1 < abs(c2) ** 2 - 1e-9 * size:
            continue
        c1 = max(c1, abs(c2) ** 2)
        val = c_objective(c1, c2, a, e, gamma, tau)
        if best is None or val < best[0]:
            best = (val, CStep(c1, complex(c2), float(v)))
    if best is not None:
        return best[1]
    c1, c2 = c_subproblem_bruteforce(a, e, gamma, tau)
    return CStep(c1, c2, float("nan"), fallback=True)


def pem_ao_omega_gradient(state: PemAoState, S: np.ndarray, channels) -> np.ndarray:
    """``(R - S)(conj(c2) h + w)``, half the Wirtinger derivative in ``w*``."""
    h = _steering(channels)
    E = pem_ao_model(state.c1, state.c2, state.omega, h) - S
    return E @ (np.conj(state.c2) * h + state.omega)


def _omega_descent(c1, c2, w, h, S, f, max_inner, tol, patience, line_opts, inner_trace):
    quiet = 0
    for _ in range(max_inner):
        E = pem_ao_model(c1, c2, w, h) - S
        d = -(E @ (np.conj(c2) * h + w))
        P = np.outer(np.conj(c2) * h + w, d.conj())
        line = QuarticLine(E, P + P.conj().T, np.outer(d, d.conj()))
        t, ft = armijo(line, f, float(np.real(np.vdot(d, d))), **line_opts)
        if not t:
            break
        w = w + t * d
        f_new = pem_ao_objective(PemAoState(c1, c2, w), S, h)
        f_new = min(f_new, f) if f_new <= f * (1 + 1e-12) else f_new
        inner_trace.append(f_new)
        rel = (f - f_new) / f if f > 0 else 0.0
        f = f_new
        quiet = quiet + 1 if rel < tol else 0
        if quiet >= patience or f <= 1e-28:
            break
    return w, f


def pem_ao(S: np.ndarray, channels, max_outer: int = 200, max_inner: int = 50, tol: float = 1e-8,
           seed: int = 0, patience: int = 5, init_omega: np.ndarray | None = None,
           init_step: float = 1.0, shrink: float = 0.5, slope_frac: float = 0.3) -> JcmEstimate:
    """Alternate the closed-form ``(c1, c2)`` update with descent on ``w``.

    ``channels`` is a ChannelSet or Bob's IRS-facing steering vector ``h``.
    ``objective_trace[m]`` is the objective after outer iteration ``m``;
    ``info["inner_traces"]`` keeps the per-outer ``w``-descent values.
    """
    S = hermitian(np.asarray(S))
    h = np.asarray(_steering(channels))
    h = h / np.linalg.norm(h)
    scale = float(np.linalg.norm(S))
    if scale == 0.0:
        return JcmEstimate(np.zeros_like(S), "PEM_AO", iterations=0, objective_trace=[0.0])
    Sn = S / scale

    if init_omega is None:
        rng = np.random.default_rng(seed)
        w = (rng.standard_normal(h.size) + 1j * rng.standard_normal(h.size)) / np.sqrt(2)
        w = w / np.linalg.norm(w)
    else:
        w = np.asarray(init_omega, dtype=complex) / np.sqrt(scale)

    line_opts = dict(init_step=init_step, shrink=shrink, slope_frac=slope_frac)
    c1, c2 = 0.0, 0.0j
    f = pem_ao_objective(PemAoState(c1, c2, w), Sn, h)
    trace = [f]
    inner_traces = []
    fallbacks = 0
    quiet = 0
    converged = False
    it = 0
    for it in range(1, max_outer + 1):
        f_start = f
        step = pem_ao_c_subproblem(*kkt_scalars(w, h, Sn))
        f_c = pem_ao_objective(PemAoState(step.c1, step.c2, w), Sn, h)
        fallbacks += step.fallback
        if f_c <= f:
            c1, c2, f = step.c1, step.c2, f_c
        inner = [f]
        w, f = _omega_descent(c1, c2, w, h, Sn, f, max_inner, tol, patience, line_opts, inner)
        inner_traces.append([x * scale ** 2 for x in inner])
        trace.append(f)
        if f <= 1e-28:
            converged = True
            break
        rel = (f_start - f) / f_start
        quiet = quiet + 1 if rel < tol else 0
        if quiet >= patience:
            converged = True
            break

    R = hermitian(pem_ao_model(c1, c2, w, h)) * scale
    state = PemAoState(c1 * scale, c2 * scale ** 0.5, w * scale ** 0.5)
    return JcmEstimate(R, "PEM_AO", iterations=it, objective_trace=[x * scale ** 2 for x in trace],
                       converged=converged,
                       info={"state": state, "inner_traces": inner_traces, "fallbacks": fallbacks})
