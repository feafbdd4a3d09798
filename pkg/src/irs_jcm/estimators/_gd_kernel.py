"""Compiled block-descent loop for PEM-GD.

Mirrors ``pem_gd._block_gradient`` / ``_block_step`` operation for operation;
the pure-numpy versions stay the reference and the tests compare the two.
"""

import numpy as np
from numba import njit

ALPHA, BETA, OMEGA, NU = 0, 1, 2, 3


@njit(cache=True)
def _ip(X, Y):
    x = X.ravel()
    y = Y.ravel()
    acc = 0.0
    for i in range(x.size):
        acc += x[i].real * y[i].real + x[i].imag * y[i].imag
    return acc


@njit(cache=True)
def factor(B, alpha, beta, omega, nu):
    return np.outer(B @ alpha, np.conj(beta)) + np.outer(omega, np.conj(nu))


@njit(cache=True)
def block_gradient(block, B, alpha, beta, omega, nu, A, E):
    if block == ALPHA:
        return np.conj(B).T @ (E @ (A @ beta))
    if block == BETA:
        return np.conj(A).T @ (E @ (B @ alpha))
    if block == OMEGA:
        return E @ (A @ nu)
    return np.conj(A).T @ (E @ omega)


@njit(cache=True)
def block_direction(block, B, alpha, beta, omega, nu, d):
    if block == ALPHA:
        return np.outer(B @ d, np.conj(beta))
    if block == BETA:
        return np.outer(B @ alpha, np.conj(d))
    if block == OMEGA:
        return np.outer(d, np.conj(nu))
    return np.outer(omega, np.conj(d))


@njit(cache=True)
def gd_loop(S, B, alpha, beta, omega, nu, max_iters, tol, patience,
            init_step, shrink, slope_frac, max_halvings):
    """Returns ``(alpha, beta, omega, nu, trace, iterations, status)``.

    ``status``: 0 hit ``max_iters``, 1 converged, 2 every block stalled.
    """
    alpha, beta, omega, nu = alpha.copy(), beta.copy(), omega.copy(), nu.copy()
    A = factor(B, alpha, beta, omega, nu)
    E = A @ np.conj(A).T - S
    f = _ip(E, E)
    trace = np.empty(max_iters + 1)
    trace[0] = f
    quiet = 0
    status = 0
    it = 0
    for it in range(1, max_iters + 1):
        f_start = f
        stalls = 0
        for block in range(4):
            A = factor(B, alpha, beta, omega, nu)
            E = A @ np.conj(A).T - S
            f = _ip(E, E)
            d = -block_gradient(block, B, alpha, beta, omega, nu, A, E)
            dd = _ip(d, d)
            if dd == 0.0:
                continue
            D = block_direction(block, B, alpha, beta, omega, nu, d)
            AD = A @ np.conj(D).T
            P = AD + np.conj(AD).T
            Q = D @ np.conj(D).T
            c0 = f
            c1 = 2 * _ip(E, P)
            c2 = _ip(P, P) + 2 * _ip(E, Q)
            c3 = 2 * _ip(P, Q)
            c4 = _ip(Q, Q)
            t = init_step
            accepted = False
            for _ in range(max_halvings + 1):
                ft = max(c0 + t * (c1 + t * (c2 + t * (c3 + t * c4))), 0.0)
                if ft <= f - slope_frac * t * dd:
                    accepted = True
                    break
                t *= shrink
            if not accepted:
                stalls += 1
                continue
            if block == ALPHA:
                alpha = alpha + t * d
            elif block == BETA:
                beta = beta + t * d
            elif block == OMEGA:
                omega = omega + t * d
            else:
                nu = nu + t * d
        A = factor(B, alpha, beta, omega, nu)
        E = A @ np.conj(A).T - S
        f = _ip(E, E)
        if f > f_start and f <= f_start * (1 + 1e-12):
            f = f_start
        trace[it] = f
        if stalls == 4:
            status = 2
            break
        if f <= 1e-28:
            status = 1
            break
        if (f_start - f) / f_start < tol:
            quiet += 1
        else:
            quiet = 0
        if quiet >= patience:
            status = 1
            break
    return alpha, beta, omega, nu, trace[: it + 1], it, status
