"""Synthetic heteroscedastic instances, sampling, splitting and error metrics.

Data follow ``y = <w*, x> + eps * <f*, x>`` with ``x ~ N(0, I_d)`` and
``eps ~ N(0, 1)`` independent of ``x``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientSamplesError, InvalidArgumentError
from .numerics import std_normal


def _frozen(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def _check_count(name, v):
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
        raise InvalidArgumentError(f"{name} must be a positive integer, got {v!r}")
    return int(v)


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    d: int
    w_star: np.ndarray
    f_star: np.ndarray
    multiplicative: bool = False

    def __post_init__(self):
        _check_count("d", self.d)
        w, f = _frozen(self.w_star), _frozen(self.f_star)
        if w.shape != (self.d,) or f.shape != (self.d,):
            raise InvalidArgumentError(f"w_star/f_star must have length d={self.d}")
        if self.multiplicative and not np.array_equal(w, f):
            raise InvalidArgumentError("multiplicative instance requires f_star == w_star")
        object.__setattr__(self, "w_star", w)
        object.__setattr__(self, "f_star", f)


@dataclass(frozen=True, eq=False)
class Dataset:
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X, y = _frozen(self.X), _frozen(self.y)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0] or X.size == 0:
            raise InvalidArgumentError(f"inconsistent shapes X{X.shape}, y{y.shape}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise InvalidArgumentError("dataset has non-finite entries")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]


@dataclass(frozen=True)
class PartitionPlan:
    part_sizes: tuple
    offsets: tuple

    @classmethod
    def contiguous(cls, n, parts):
        parts = _check_count("parts", parts)
        if n < parts:
            raise InsufficientSamplesError(f"cannot split {n} samples into {parts} parts")
        m = n // parts
        return cls(tuple([m] * parts), tuple(range(0, m * parts, m)))


def random_instance(d, stream, w_norm=1.0, f_norm=1.0, multiplicative=False):
    """Draw ``w*`` and ``f*`` as uniform random directions scaled to the given norms.

    For a multiplicative instance ``f* = w*`` and ``f_norm`` is ignored.
    """
    d = _check_count("d", d)
    w = std_normal(stream, d)
    w *= w_norm / np.linalg.norm(w)
    if multiplicative:
        return ProblemInstance(d, w, w.copy(), True)
    f = std_normal(stream, d)
    f *= f_norm / np.linalg.norm(f)
    return ProblemInstance(d, w, f, False)


def sample_dataset(inst, n, stream):
    """Draw ``n`` samples from ``inst``: X first (row-major), then the noise."""
    n = _check_count("n", n)
    X = std_normal(stream, n * inst.d).reshape(n, inst.d)
    eps = std_normal(stream, n)
    y = X @ inst.w_star + eps * (X @ inst.f_star)
    return Dataset(X, y)


def _pair(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise InvalidArgumentError(f"length mismatch: {a.shape} vs {b.shape}")
    return a, b


def err_w(w_hat, w_star):
    """Squared Euclidean distance."""
    a, b = _pair(w_hat, w_star)
    e = a - b
    return float(e @ e)


def err_f(f_hat, f_star):
    """Squared distance up to sign: ``min(|f_hat - f*|^2, |f_hat + f*|^2)``."""
    a, b = _pair(f_hat, f_star)
    e1, e2 = a - b, a + b
    return float(min(e1 @ e1, e2 @ e2))


def partition(ds, parts):
    """Split into ``parts`` contiguous front slices of ``n // parts`` rows each.

    Trailing rows that do not fill a part are dropped.
    """
    plan = PartitionPlan.contiguous(ds.n, parts)
    return [Dataset(ds.X[o:o + s], ds.y[o:o + s]) for o, s in zip(plan.offsets, plan.part_sizes)]
