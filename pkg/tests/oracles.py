"""Slow, independent reference computations used only by the tests."""
import mpmath
import numpy as np


def mp_solve(A, b, dps=50):
    """Gaussian elimination with partial pivoting in 50-digit arithmetic."""
    with mpmath.workdps(dps):
        M = mpmath.matrix([[mpmath.mpf(float(v)) for v in row] for row in A])
        rhs = mpmath.matrix([mpmath.mpf(float(v)) for v in b])
        x = mpmath.lu_solve(M, rhs)
        return np.array([float(v) for v in x])


def mp_weighted_lstsq(X, y, weights=None, dps=50):
    """Minimize sum_i w_i (<w, x_i> - y_i)^2 by forming and solving the normal
    equations entirely in high precision. ``weights`` may be a callable
    ``row_index -> mpf`` so that the weights themselves are exact."""
    n, d = X.shape
    with mpmath.workdps(dps):
        Xm = [[mpmath.mpf(float(v)) for v in row] for row in X]
        ym = [mpmath.mpf(float(v)) for v in y]
        if weights is None:
            wt = [mpmath.mpf(1)] * n
        elif callable(weights):
            wt = [weights(i, Xm[i]) for i in range(n)]
        else:
            wt = [mpmath.mpf(float(v)) for v in weights]
        A = mpmath.matrix(d, d)
        rhs = mpmath.matrix(d, 1)
        for i in range(n):
            for j in range(d):
                rhs[j] += wt[i] * Xm[i][j] * ym[i]
                for k in range(d):
                    A[j, k] += wt[i] * Xm[i][j] * Xm[i][k]
        x = mpmath.lu_solve(A, rhs)
        return np.array([float(v) for v in x])


def jacobi_eigh(A, tol=1e-15, max_sweeps=100):
    """Cyclic Jacobi rotations. Returns (eigenvalues, eigenvectors as columns)."""
    A = np.array(A, dtype=float)
    d = A.shape[0]
    V = np.eye(d)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(A, -1) ** 2))
        if off < tol * np.linalg.norm(A):
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                if A[p, q] == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2 * A[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta ** 2 + 1)) if theta != 0 else 1.0
                c = 1 / np.sqrt(t * t + 1)
                s = t * c
                J = np.eye(d)
                J[p, p] = J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                A = J.T @ A @ J
                V = V @ J
    return np.diag(A).copy(), V


def truncated_loss(X, y, f, f_hat, w_hat, mu_bar):
    """(1/m) sum_{|<f_hat,x>| >= mu_bar} [(y - <w_hat,x>)^2 - <f,x>^2]^2 / <f_hat,x>^4."""
    a = X @ f_hat
    keep = np.abs(a) >= mu_bar
    r2 = (y - X @ w_hat) ** 2
    b = X @ f
    return np.sum(((r2 - b * b) ** 2 / a ** 4)[keep]) / X.shape[0]


def central_diff_grad(fun, x, h=1e-5):
    g = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (fun(x + e) - fun(x - e)) / (2 * h)
    return g


def random_spd(rng, d, cond=100.0):
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    eig = np.geomspace(1.0, cond, d)
    A = (Q * eig) @ Q.T
    return 0.5 * (A + A.T)


def random_psd_with_gap(rng, d, gap=2.0):
    """PSD matrix whose top eigenvalue is ``gap`` times the second."""
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    rest = np.sort(rng.uniform(0.0, 1.0, d - 1))
    eig = np.concatenate([rest, [gap * rest[-1] + 0.1]])
    A = (Q * eig) @ Q.T
    return 0.5 * (A + A.T)
