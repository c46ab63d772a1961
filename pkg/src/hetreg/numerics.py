"""Seeded random streams and the two dense linear-algebra primitives."""
from functools import lru_cache
import math

import numpy as np

from . import kernels
from .errors import ConvergenceError, InvalidArgumentError, SingularDesignError

_U64 = 1 << 64

PIVOT_FLOOR_REL = 1e-12
EIG_TOL = 1e-10
SIGN_EPS = 1e-12


class RngStream:
    """A Philox (counter-based) generator keyed by ``(master_seed, stream_index)``.

    The 128-bit Philox key holds both 64-bit halves, so distinct stream
    indices give independent sequences without any coordination between
    workers. A stream is stateful: hand each one to a single consumer.
    """

    __slots__ = ("master_seed", "stream_index", "generator")

    def __init__(self, master_seed, stream_index):
        for name, v in (("master_seed", master_seed), ("stream_index", stream_index)):
            if not isinstance(v, (int, np.integer)) or not 0 <= int(v) < _U64:
                raise InvalidArgumentError(f"{name} must be a 64-bit unsigned integer, got {v!r}")
        self.master_seed = int(master_seed)
        self.stream_index = int(stream_index)
        key = self.master_seed | (self.stream_index << 64)
        self.generator = np.random.Generator(np.random.Philox(key=key))

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, stream_index={self.stream_index})"


def make_stream(master_seed, stream_index):
    return RngStream(master_seed, stream_index)


def std_normal(stream, count):
    """``count`` i.i.d. N(0, 1) draws; advances ``stream``."""
    if isinstance(count, bool) or not isinstance(count, (int, np.integer)) or count < 1:
        raise InvalidArgumentError(f"count must be a positive integer, got {count!r}")
    return stream.generator.standard_normal(int(count))


def _as_square(A):
    A = np.ascontiguousarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise InvalidArgumentError(f"expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidArgumentError("matrix has non-finite entries")
    return A


def solve_spd(A, b, floor_rel=PIVOT_FLOOR_REL):
    """Solve ``A x = b`` for symmetric positive definite ``A`` by Cholesky.

    Raises :class:`SingularDesignError` when a pivot drops to
    ``floor_rel * trace(A) / d`` or below.
    """
    A = _as_square(A)
    b = np.ascontiguousarray(b, dtype=np.float64)
    d = A.shape[0]
    if b.shape != (d,):
        raise InvalidArgumentError(f"rhs has shape {b.shape}, expected ({d},)")
    floor = floor_rel * np.trace(A) / d
    if not floor > 0.0:
        raise SingularDesignError(f"non-positive trace {float(np.trace(A))!r}", pivot=float(np.trace(A)))
    x, bad, pivot = kernels.cholesky_solve(A, b, floor)
    if bad >= 0:
        raise SingularDesignError(
            f"pivot {pivot:.3e} at column {bad} is below floor {floor:.3e}",
            pivot=float(pivot), index=int(bad),
        )
    return x


@lru_cache(maxsize=64)
def _start_vector(d):
    # fixed generic start so the result is a pure function of A
    v = make_stream(0x5EED5EED, d).generator.standard_normal(d)
    v.setflags(write=False)
    return v


def default_max_iter(d):
    return int(10 * d * math.log(max(d, 1)) + 1000)


def canonical_sign(v, eps=SIGN_EPS):
    """Flip ``v`` so its first component with ``|v_i| >= eps`` is positive."""
    idx = np.flatnonzero(np.abs(v) >= eps)
    if idx.size and v[idx[0]] < 0:
        return -v
    return v


def top_eigenpair(A, tol=EIG_TOL, max_iter=None):
    """Largest eigenvalue and unit eigenvector of a PSD matrix by power iteration.

    The vector is sign-canonicalized (see :func:`canonical_sign`). Raises
    :class:`ConvergenceError` if ``||A v - lam v|| <= tol * lam`` is not
    reached within ``max_iter`` iterations.
    """
    A = _as_square(A)
    if not tol > 0:
        raise InvalidArgumentError(f"tol must be positive, got {tol!r}")
    d = A.shape[0]
    if max_iter is None:
        max_iter = default_max_iter(d)
    lam, v, res, iters, ok = kernels.power_iteration(A, np.array(_start_vector(d)), float(tol), int(max_iter))
    if not ok:
        raise ConvergenceError(
            f"power iteration did not converge in {iters} iterations (residual {res:.3e})",
            residual=float(res), iterations=int(iters),
        )
    v = v / np.linalg.norm(v)
    return float(lam), canonical_sign(v)
