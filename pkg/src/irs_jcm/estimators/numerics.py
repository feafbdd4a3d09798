"""Small numerical kernels shared by the parametric estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "LineSearchResult",
    "backtracking_search",
    "finite_difference_gradient",
    "solve_cubic_real",
    "armijo",
    "QuarticLine",
]


@dataclass(frozen=True)
class LineSearchResult:
    step: float
    value: float
    point: np.ndarray
    stalled: bool = False


def backtracking_search(objective: Callable[[np.ndarray], float], point, direction,
                        init_step: float = 1.0, shrink: float = 0.5, slope_frac: float = 0.3,
                        max_halvings: int = 60, f0: float | None = None) -> LineSearchResult:
    """Armijo backtracking along ``direction``.

    Tries ``t = init_step * shrink**n`` for ``n = 0, 1, ...`` and accepts the
    first ``t`` with ``f(x + t d) <= f(x) - slope_frac * t * ||d||^2``. When no
    step passes within ``max_halvings`` tries, returns ``t = 0`` with
    ``stalled=True`` so the caller keeps ``x`` unchanged.
    """
    x = np.asarray(point)
    d = np.asarray(direction)
    fx = objective(x) if f0 is None else f0
    dd = float(np.real(np.vdot(d, d)))
    t, ft = armijo(lambda s: objective(x + s * d), fx, dd, init_step, shrink, slope_frac, max_halvings)
    if t is None:
        return LineSearchResult(0.0, fx, x, stalled=True)
    return LineSearchResult(t, ft, x + t * d if t else x)


def armijo(phi: Callable[[float], float], f0: float, dd: float, init_step: float = 1.0,
           shrink: float = 0.5, slope_frac: float = 0.3, max_halvings: int = 60):
    """Backtracking on a scalar line function ``phi(t) = f(x + t d)``.

    ``dd`` is ``||d||^2``. Returns ``(t, phi(t))`` for the accepted step, or
    ``(None, f0)`` when every trial fails.
    """
    if init_step <= 0:
        raise ValueError("init_step must be positive")
    if not 0 < shrink < 1:
        raise ValueError("shrink must lie in (0, 1)")
    if not 0 < slope_frac < 0.5:
        raise ValueError("slope_frac must lie in (0, 0.5)")
    if dd == 0.0:
        return 0.0, f0
    t = init_step
    for _ in range(max_halvings + 1):
        ft = phi(t)
        if ft <= f0 - slope_frac * t * dd:
            return t, ft
        t *= shrink
    return None, f0


class QuarticLine:
    """``t -> ||E + t P + t^2 Q||_F^2`` stored as polynomial coefficients.

    Every PEM block update moves a factor linearly, so the residual is a
    quadratic matrix polynomial in the step and the objective along the
    search line is a quartic in ``t``.
    """

    def __init__(self, E: np.ndarray, P: np.ndarray, Q: np.ndarray):
        def ip(X, Y):
            return float(np.real(np.vdot(X, Y)))
        self.coef = (ip(E, E), 2 * ip(E, P), ip(P, P) + 2 * ip(E, Q), 2 * ip(P, Q), ip(Q, Q))

    def __call__(self, t: float) -> float:
        c0, c1, c2, c3, c4 = self.coef
        return max(c0 + t * (c1 + t * (c2 + t * (c3 + t * c4))), 0.0)


def finite_difference_gradient(objective: Callable[[np.ndarray], float], point,
                               step: float = 1e-6, scale: float = 0.25) -> np.ndarray:
    """Central-difference gradient over the real and imaginary parts of ``point``.

    Returns ``scale * (df/dRe + 1j * df/dIm)``. With the default ``scale=1/4``
    this equals half the Wirtinger derivative ``df/dx*``, which is the
    normalization used by the analytic PEM gradients. For a real ``point``
    pass ``scale=1`` to get the ordinary gradient.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    x = np.asarray(point)
    is_complex = np.iscomplexobj(x)
    base = x.astype(complex if is_complex else float).ravel()
    grad = np.zeros(base.shape, dtype=complex if is_complex else float)
    parts = (1.0, 1j) if is_complex else (1.0,)
    for i in range(base.size):
        for unit in parts:
            xp = base.copy()
            xm = base.copy()
            xp[i] += step * unit
            xm[i] -= step * unit
            slope = (objective(xp.reshape(x.shape)) - objective(xm.reshape(x.shape))) / (2 * step)
            grad[i] += slope * unit
    return scale * grad.reshape(x.shape)


def _newton_polish(v, l1, l2, l3):
    p = ((v + l1) * v + l2) * v + l3
    dp = (3 * v + 2 * l1) * v + l2
    if dp != 0.0:
        w = v - p / dp
        if abs(((w + l1) * w + l2) * w + l3) <= abs(p):
            return w
    return v


def solve_cubic_real(l1: float, l2: float, l3: float) -> np.ndarray:
    """All real roots of ``v**3 + l1*v**2 + l2*v + l3`` in ascending order.

    Closed form via the depressed cubic ``t**3 + p*t + q`` with
    ``v = t - l1/3``: trigonometric branch when the discriminant admits three
    real roots, Cardano otherwise. Each root gets one Newton step; roots closer
    than ``1e-7`` (relative) are reported once.
    """
    l1, l2, l3 = float(l1), float(l2), float(l3)
    shift = l1 / 3.0
    p = l2 - l1 * l1 / 3.0
    q = 2.0 * l1 ** 3 / 27.0 - l1 * l2 / 3.0 + l3
    size = max(1.0, abs(l1), abs(l2) ** 0.5, abs(l3) ** (1 / 3))
    tiny = 1e-14 * size

    if abs(p) <= tiny ** 2 and abs(q) <= tiny ** 3:
        ts = [0.0]
    else:
        disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
        if disc > 0:
            sq = math.sqrt(disc)
            ts = [math.copysign(abs(-q / 2 + sq) ** (1 / 3), -q / 2 + sq)
                  + math.copysign(abs(-q / 2 - sq) ** (1 / 3), -q / 2 - sq)]
        else:
            r = math.sqrt(-p / 3.0)
            cos_arg = max(-1.0, min(1.0, (3 * q) / (2 * p * r))) if p != 0 else 0.0
            phi = math.acos(cos_arg)
            ts = [2 * r * math.cos((phi - 2 * math.pi * k) / 3) for k in range(3)]

    roots = sorted(_newton_polish(t - shift, l1, l2, l3) for t in ts)
    # a double root is only resolved to ~sqrt(eps); merge such pairs
    groups = [[roots[0]]]
    for r in roots[1:]:
        if abs(r - groups[-1][-1]) > 1e-7 * max(1.0, abs(r)):
            groups.append([r])
        else:
            groups[-1].append(r)
    return np.array([sum(g) / len(g) for g in groups])
