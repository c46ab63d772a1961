"""Estimators for heteroscedastic linear regression.

Every estimator is a pure function of its inputs and returns an
:class:`EstimateReport`. Passing ``truth=`` (a :class:`ProblemInstance`) only
fills the diagnostic trace; it never changes the estimate.
"""
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
import math

import numpy as np

from . import kernels
from .errors import (
    HetRegError,
    InsufficientSamplesError,
    InvalidArgumentError,
    InvalidParameterError,
    tag_stage,
)
from .model import err_f, err_w, partition
from .numerics import solve_spd, top_eigenpair

ZERO_RESID_REL = 1e-12
WLS_FLOOR_REL = 1e-12


@dataclass(frozen=True)
class IterationDiag:
    step_index: int
    err_w_true: float | None = None
    err_f_true: float | None = None
    note: str = ""


@dataclass(frozen=True, eq=False)
class EstimateReport:
    w_hat: np.ndarray
    f_hat: np.ndarray | None = None
    trace: tuple = ()


@dataclass(frozen=True)
class WlsParams:
    lam: float

    def __post_init__(self):
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise InvalidParameterError(f"lambda must be finite and >= 0, got {self.lam!r}")


@dataclass(frozen=True)
class PhaseRetrievalParams:
    mu_bar: float
    alpha0: float
    alpha1: float
    steps: int

    def __post_init__(self):
        for name in ("mu_bar", "alpha0", "alpha1"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise InvalidParameterError(f"{name} must be positive, got {v!r}")
        if self.steps < 1:
            raise InvalidParameterError(f"steps must be >= 1, got {self.steps!r}")

    @classmethod
    def from_step_constant(cls, mu_bar, f_norm, c_step, steps):
        """Step sizes ``alpha0 = c |f|^2`` and ``alpha1 = c mu_bar |f|``."""
        return cls(mu_bar, c_step * f_norm ** 2, c_step * mu_bar * f_norm, steps)


@dataclass(frozen=True)
class SymbLearnConfig:
    """Loop counts and schedule constants.

    ``K`` and ``K_p`` default to ``ceil(log2 n)`` and ``ceil(ln(n / K))``. The
    unspecified polylog factor in the schedules is
    ``polylog_const * ln(n d / delta) ** polylog_power``.
    """

    K: int | None = None
    K_p: int | None = None
    c_step: float = 0.05
    polylog_const: float = 0.5
    polylog_power: float = 1.0
    delta: float = 0.1

    def __post_init__(self):
        for name in ("K", "K_p"):
            v = getattr(self, name)
            if v is not None and (isinstance(v, bool) or int(v) != v or v < 1):
                raise InvalidParameterError(f"{name} must be a positive integer, got {v!r}")
        if not self.c_step > 0:
            raise InvalidParameterError(f"c_step must be positive, got {self.c_step!r}")
        if not self.polylog_const > 0:
            raise InvalidParameterError(f"polylog_const must be positive, got {self.polylog_const!r}")
        if not self.polylog_power >= 0:
            raise InvalidParameterError(f"polylog_power must be >= 0, got {self.polylog_power!r}")
        if not 0 < self.delta < 0.5:
            raise InvalidParameterError(f"delta must lie in (0, 1/2), got {self.delta!r}")

    def outer_steps(self, n):
        return self.K if self.K is not None else max(1, math.ceil(math.log2(n)))

    def pr_steps(self, n, K):
        return self.K_p if self.K_p is not None else max(1, math.ceil(math.log(n / K)))

    def polylog(self, n, d):
        return self.polylog_const * math.log(n * d / self.delta) ** self.polylog_power

    def to_dict(self):
        return asdict(self)


# -- schedules -------------------------------------------------------------

def schedule_s(k):
    """``S_k = sum_{j=0}^{k} 2^-j = 2 - 2^-k``."""
    if k < 0:
        raise InvalidArgumentError(f"k must be >= 0, got {k!r}")
    return 2.0 - 2.0 ** (-k)


def _schedule_core(k, m, d):
    if m < 1 or d < 1:
        raise InvalidArgumentError(f"need m >= 1 and d >= 1, got m={m}, d={d}")
    return max(k / m, k * d * d / (m * m)) + (d / m) ** schedule_s(k)


def schedule_lambda(k, m, d, f_norm, cfg, n=None):
    """WLS regularizer for outer step ``k``.

    ``n`` enters only through the polylog factor and defaults to ``m``.
    """
    n = m if n is None else n
    return f_norm ** 2 * _schedule_core(k, m, d) * cfg.polylog(n, d)


def schedule_mu(k, m, d, f_norm, cfg, n=None):
    """Truncation level for the phase-retrieval stage of outer step ``k``."""
    n = m if n is None else n
    return f_norm * math.sqrt(_schedule_core(k, m, d)) * cfg.polylog(n, d)


# -- helpers ---------------------------------------------------------------

def _gram(X, weights=None):
    """``sum_i w_i x_i x_i^T`` stored exactly symmetric (upper triangle mirrored)."""
    A = X.T @ X if weights is None else X.T @ (weights[:, None] * X)
    U = np.triu(A)
    return U + np.triu(U, 1).T


def _vec(v, d, name):
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (d,):
        raise InvalidArgumentError(f"{name} has shape {v.shape}, expected ({d},)")
    if not np.all(np.isfinite(v)):
        raise InvalidArgumentError(f"{name} has non-finite entries")
    return v


def _diag(step, note, truth, w=None, f=None):
    if truth is None:
        return IterationDiag(step, None, None, note)
    ew = err_w(w, truth.w_star) if w is not None else None
    ef = err_f(f, truth.f_star) if f is not None else None
    return IterationDiag(step, ew, ef, note)


@contextmanager
def _stage(label):
    try:
        yield
    except HetRegError as e:
        raise tag_stage(e, label)


# -- estimators ------------------------------------------------------------

def ols(ds, truth=None):
    """Ordinary least squares via the normal equations."""
    if ds.n < ds.d:
        raise InsufficientSamplesError(f"OLS needs n >= d, got n={ds.n}, d={ds.d}")
    w = solve_spd(_gram(ds.X), ds.X.T @ ds.y)
    return EstimateReport(w, None, (_diag(0, "ols", truth, w=w),))


def spectral_from_moment(S):
    """Noise model from a residual second-moment matrix: ``sqrt(|S|/3) * top eigenvector``."""
    if not np.any(S):
        return np.zeros(S.shape[0]), True
    lam, u = top_eigenpair(S)
    return math.sqrt(max(lam, 0.0) / 3.0) * u, False


def spectral(ds, w_hat, truth=None):
    """Spectral estimate of the noise model given a regressor estimate."""
    w_hat = _vec(w_hat, ds.d, "w_hat")
    r = ds.y - ds.X @ w_hat
    if r @ r <= ZERO_RESID_REL ** 2 * (ds.y @ ds.y):
        # residuals at round-off level: the data carry no noise to model
        f, degenerate = np.zeros(ds.d), True
    else:
        f, degenerate = spectral_from_moment(_gram(ds.X, r * r) / ds.n)
    note = "spectral:zero-moment" if degenerate else "spectral"
    return EstimateReport(w_hat, f, (_diag(0, note, truth, w=w_hat, f=f),))


def wls(ds, f_hat, params, truth=None):
    """Weighted least squares with weights ``1 / (<f_hat, x>^2 + lam)``.

    Each denominator is floored at ``1e-12 * (|f_hat|^2 + lam + 1e-12)``.
    """
    f_hat = _vec(f_hat, ds.d, "f_hat")
    if ds.n < ds.d:
        raise InsufficientSamplesError(f"WLS needs n >= d, got n={ds.n}, d={ds.d}")
    a = ds.X @ f_hat
    floor = WLS_FLOOR_REL * (f_hat @ f_hat + params.lam + 1e-12)
    weights = 1.0 / np.maximum(a * a + params.lam, floor)
    w = solve_spd(_gram(ds.X, weights), ds.X.T @ (weights * ds.y))
    return EstimateReport(w, None, (_diag(0, f"wls lam={params.lam:.3g}", truth, w=w),))


def pseudogradient(batch, f_cur, f_hat, w_hat, mu_bar):
    """Truncated pseudogradient of the weighted quartic loss at ``f_cur``.

    Samples with ``|<f_hat, x>| < mu_bar`` contribute nothing.
    """
    if not mu_bar > 0:
        raise InvalidParameterError(f"mu_bar must be positive, got {mu_bar!r}")
    d = batch.d
    X = batch.X
    a = X @ _vec(f_hat, d, "f_hat")
    b = X @ _vec(f_cur, d, "f_cur")
    r = batch.y - X @ _vec(w_hat, d, "w_hat")
    return kernels.truncated_pseudograd(X, a, b, r * r, float(mu_bar))


def phase_retrieval(ds, w_hat, f_hat, params, truth=None):
    """Preconditioned pseudogradient descent on ``params.steps`` disjoint batches.

    The preconditioner applies ``alpha0`` along ``f_hat`` and ``alpha1`` on its
    orthogonal complement; iteration starts at ``f_hat``.
    """
    f_hat = _vec(f_hat, ds.d, "f_hat")
    w_hat = _vec(w_hat, ds.d, "w_hat")
    fn = math.sqrt(f_hat @ f_hat)
    if not params.mu_bar < fn:
        raise InvalidParameterError(f"mu_bar={params.mu_bar:.4g} must be below |f_hat|={fn:.4g}")
    batches = partition(ds, params.steps)
    e = f_hat / fn
    a0, a1 = params.alpha0, params.alpha1
    f = f_hat.copy()
    trace = [_diag(0, "pr init", truth, w=w_hat, f=f)]
    for t, batch in enumerate(batches, start=1):
        g = pseudogradient(batch, f, f_hat, w_hat, params.mu_bar)
        f = f - (a1 * g + (a0 - a1) * (e @ g) * e)
        trace.append(_diag(t, "pr", truth, w=w_hat, f=f))
    return EstimateReport(w_hat, f, tuple(trace))


def _renumber(trace):
    return tuple(IterationDiag(i, t.err_w_true, t.err_f_true, t.note) for i, t in enumerate(trace))


def symblearn(ds, cfg=None, epoch_mode=False, truth=None, f_init=None):
    """Alternate WLS refinement of ``w`` and phase-retrieval refinement of ``f``.

    By default the data are split into ``2K`` disjoint parts: OLS on part 1,
    the spectral method on part 2, then WLS / phase retrieval on parts
    ``2k+1`` / ``2k+2`` for ``k = 1 .. K-1``. With ``epoch_mode`` every stage
    uses the whole dataset instead. ``f_init`` replaces the spectral estimate.
    """
    cfg = cfg or SymbLearnConfig()
    n, d = ds.n, ds.d
    K = cfg.outer_steps(n)
    Kp = cfg.pr_steps(n, K)
    if epoch_mode:
        m = n
        if n < d + 5 or n < Kp:
            raise InsufficientSamplesError(f"need n >= max(d + 5, K_p), got n={n}")
        parts = [ds] * (2 * K)
    else:
        m = n // (2 * K)
        if m < d + 5:
            raise InsufficientSamplesError(f"each of the 2K={2 * K} parts has {m} rows, need >= d + 5 = {d + 5}")
        parts = partition(ds, 2 * K)

    trace = []
    with _stage("ols"):
        w = ols(parts[0]).w_hat
    trace.append(_diag(0, "ols", truth, w=w))
    if f_init is None:
        with _stage("spectral"):
            f = spectral(parts[1], w).f_hat
        trace.append(_diag(0, "spectral", truth, w=w, f=f))
    else:
        f = _vec(f_init, d, "f_init").copy()
        trace.append(_diag(0, "f_init", truth, w=w, f=f))

    for k in range(1, K):
        fn = math.sqrt(f @ f)
        lam = schedule_lambda(k, m, d, fn, cfg, n=n)
        with _stage(f"wls k={k}"):
            w = wls(parts[2 * k], f, WlsParams(lam)).w_hat
        trace.append(_diag(0, f"wls k={k}", truth, w=w, f=f))
        if fn == 0.0:
            # noise-free residuals: nothing for phase retrieval to refine
            trace.append(_diag(0, f"pr k={k} skipped:zero-noise-model", truth, w=w, f=f))
            continue
        mu = schedule_mu(k, m, d, fn, cfg, n=n)
        with _stage(f"phase_retrieval k={k}"):
            pr = PhaseRetrievalParams.from_step_constant(mu, fn, cfg.c_step, Kp)
            f = phase_retrieval(parts[2 * k + 1], w, f, pr).f_hat
        trace.append(_diag(0, f"pr k={k}", truth, w=w, f=f))
    return EstimateReport(w, f, _renumber(trace))


def default_mult_lambda(k, m, d, w_norm, cfg, n=None):
    """Regularizer for WLS pass ``k`` (1-based) of :func:`symblearn_mult`.

    Uses the previous estimate's norm and the schedule core at ``k - 1``.
    """
    return schedule_lambda(k - 1, m, d, w_norm, cfg, n=n)


def symblearn_mult(ds, K=None, lambda_schedule=None, cfg=None, truth=None):
    """Iterated WLS for multiplicative noise (``f* = w*``).

    OLS on the first of ``K + 1`` contiguous parts, then ``K`` WLS passes, each
    on a fresh part and weighting by the previous estimate.
    """
    cfg = cfg or SymbLearnConfig()
    n, d = ds.n, ds.d
    if K is None:
        K = cfg.outer_steps(n)
    if isinstance(K, bool) or int(K) != K or K < 1:
        raise InvalidArgumentError(f"K must be a positive integer, got {K!r}")
    K = int(K)
    if lambda_schedule is not None and len(lambda_schedule) < K:
        raise InvalidArgumentError(f"lambda_schedule has {len(lambda_schedule)} entries, need {K}")
    m = n // (K + 1)
    if m < d + 5:
        raise InsufficientSamplesError(f"each of the K+1={K + 1} parts has {m} rows, need >= d + 5 = {d + 5}")
    parts = partition(ds, K + 1)

    with _stage("ols"):
        w = ols(parts[0]).w_hat
    trace = [_diag(0, "ols", truth, w=w)]
    for k in range(1, K + 1):
        if lambda_schedule is not None:
            lam = float(lambda_schedule[k - 1])
        else:
            lam = default_mult_lambda(k, m, d, math.sqrt(w @ w), cfg, n=n)
        with _stage(f"wls k={k}"):
            w = wls(parts[k], w, WlsParams(lam)).w_hat
        trace.append(_diag(k, f"wls k={k}", truth, w=w))
    return EstimateReport(w, None, tuple(trace))
