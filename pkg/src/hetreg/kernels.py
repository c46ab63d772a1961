"""Inner loops of the estimators, in two flavours.

Each kernel has a ``*_numpy`` implementation and a ``*_numba`` one compiled
with ``@njit``. The module-level names (``cholesky_solve``, ``power_iteration``,
``truncated_pseudograd``) point at the numba versions unless numba is missing or
``HETREG_DISABLE_NUMBA`` is set. The two backends agree to rounding, not bitwise.

Kernels never raise on numerical trouble; they return status values and the
callers in :mod:`hetreg.numerics` turn those into exceptions.
"""
import math

import numpy as np

from ._jit import USE_NUMBA, njit

BACKEND = "numba" if USE_NUMBA else "numpy"


# -- Cholesky solve --------------------------------------------------------

def cholesky_solve_numpy(A, b, floor):
    """Solve ``A x = b`` for SPD ``A`` via ``L L^T``.

    Returns ``(x, bad_index, pivot)``; ``bad_index`` is -1 on success, else the
    column whose pivot fell to ``floor`` or below (``x`` is then meaningless).
    """
    d = A.shape[0]
    L = np.zeros((d, d))
    for j in range(d):
        lj = L[j, :j]
        s = A[j, j] - lj @ lj
        if not s > floor:
            return np.zeros(d), j, s
        ljj = math.sqrt(s)
        L[j, j] = ljj
        if j + 1 < d:
            L[j + 1:, j] = (A[j + 1:, j] - L[j + 1:, :j] @ lj) / ljj
    z = np.empty(d)
    for i in range(d):
        z[i] = (b[i] - L[i, :i] @ z[:i]) / L[i, i]
    x = np.empty(d)
    for i in range(d - 1, -1, -1):
        x[i] = (z[i] - L[i + 1:, i] @ x[i + 1:]) / L[i, i]
    return x, -1, 0.0


@njit
def cholesky_solve_numba(A, b, floor):
    d = A.shape[0]
    L = np.zeros((d, d))
    for j in range(d):
        s = A[j, j]
        for k in range(j):
            s -= L[j, k] * L[j, k]
        if not s > floor:
            return np.zeros(d), j, s
        ljj = math.sqrt(s)
        L[j, j] = ljj
        for i in range(j + 1, d):
            t = A[i, j]
            for k in range(j):
                t -= L[i, k] * L[j, k]
            L[i, j] = t / ljj
    z = np.empty(d)
    for i in range(d):
        t = b[i]
        for k in range(i):
            t -= L[i, k] * z[k]
        z[i] = t / L[i, i]
    x = np.empty(d)
    for i in range(d - 1, -1, -1):
        t = z[i]
        for k in range(i + 1, d):
            t -= L[k, i] * x[k]
        x[i] = t / L[i, i]
    return x, -1, 0.0


# -- power iteration -------------------------------------------------------

def power_iteration_numpy(A, v0, tol, max_iter):
    """Power iteration from ``v0``.

    Returns ``(lam, v, residual, iterations, converged)`` where ``lam`` is the
    Rayleigh quotient at ``v`` and ``residual = ||A v - lam v||``. Stops once
    ``residual <= tol * lam``.
    """
    v = v0 / np.linalg.norm(v0)
    lam = 0.0
    res = np.inf
    for it in range(1, max_iter + 1):
        w = A @ v
        lam = v @ w
        res = np.linalg.norm(w - lam * v)
        if res <= tol * lam:
            return lam, v, res, it, True
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # A v = 0: v is an eigenvector for the zero eigenvalue
            return 0.0, v, 0.0, it, True
        v = w / nw
    return lam, v, res, max_iter, False


@njit
def power_iteration_numba(A, v0, tol, max_iter):
    d = A.shape[0]
    nv = 0.0
    for i in range(d):
        nv += v0[i] * v0[i]
    nv = math.sqrt(nv)
    v = v0 / nv
    w = np.empty(d)
    lam = 0.0
    res = np.inf
    for it in range(1, max_iter + 1):
        for i in range(d):
            t = 0.0
            for j in range(d):
                t += A[i, j] * v[j]
            w[i] = t
        lam = 0.0
        nw = 0.0
        for i in range(d):
            lam += v[i] * w[i]
            nw += w[i] * w[i]
        res = 0.0
        for i in range(d):
            e = w[i] - lam * v[i]
            res += e * e
        res = math.sqrt(res)
        if res <= tol * lam:
            return lam, v, res, it, True
        nw = math.sqrt(nw)
        if nw == 0.0:
            return 0.0, v, 0.0, it, True
        v = w / nw
    return lam, v, res, max_iter, False


# -- truncated pseudogradient ----------------------------------------------

def truncated_pseudograd_numpy(X, a, b, r2, mu_bar):
    """``(1/m) sum_{|a_i| >= mu_bar} a_i x_i (b_i^2 - r2_i) / a_i^4``.

    ``a = X f_hat``, ``b = X f_cur``, ``r2`` the squared residuals. Rows below
    the threshold are skipped before any division.
    """
    m = X.shape[0]
    keep = np.abs(a) >= mu_bar
    ak = a[keep]
    a2 = ak * ak
    bk = b[keep]
    coef = ak * (bk * bk - r2[keep]) / (a2 * a2)
    return (X[keep].T @ coef) / m


@njit
def truncated_pseudograd_numba(X, a, b, r2, mu_bar):
    m, d = X.shape
    g = np.zeros(d)
    for i in range(m):
        ai = a[i]
        if abs(ai) >= mu_bar:
            a2 = ai * ai
            c = ai * (b[i] * b[i] - r2[i]) / (a2 * a2)
            for j in range(d):
                g[j] += c * X[i, j]
    for j in range(d):
        g[j] /= m
    return g


if USE_NUMBA:
    cholesky_solve = cholesky_solve_numba
    power_iteration = power_iteration_numba
    truncated_pseudograd = truncated_pseudograd_numba
else:
    cholesky_solve = cholesky_solve_numpy
    power_iteration = power_iteration_numpy
    truncated_pseudograd = truncated_pseudograd_numpy
