"""Monte-Carlo experiment runner.

A grid is the product (estimator x n x d x trial). Every trial draws its own
ground truth and dataset from a stream whose index is a stable hash of
``(n, d, trial, multiplicative)``, so results do not depend on execution order
or worker count, and all estimators in a cell see the same data.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
import hashlib
import logging
import math
import os
import time

import numpy as np

from . import estimators as est
from .errors import DataFormatError, HetRegError, InvalidArgumentError
from .io import parse_kv_file
from .model import err_f, err_w, random_instance, sample_dataset
from .numerics import make_stream

log = logging.getLogger(__name__)

ESTIMATORS = ("ols", "wls_spectral", "symblearn", "symblearn_mult")


# -- estimator dispatch ----------------------------------------------------

def wls_spectral(ds, cfg, truth=None):
    """OLS, then the spectral noise model, then one WLS pass on the same data."""
    w0 = est.ols(ds).w_hat
    f = est.spectral(ds, w0).f_hat
    lam = est.schedule_lambda(1, ds.n, ds.d, math.sqrt(f @ f), cfg, n=ds.n)
    w = est.wls(ds, f, est.WlsParams(lam)).w_hat
    trace = (
        est._diag(0, "ols", truth, w=w0),
        est._diag(1, "spectral", truth, w=w0, f=f),
        est._diag(2, f"wls lam={lam:.3g}", truth, w=w, f=f),
    )
    return est.EstimateReport(w, f, trace)


def fit(label, ds, cfg=None, epoch_mode=False, truth=None):
    """Run the estimator named ``label`` and return its report."""
    cfg = cfg or est.SymbLearnConfig()
    if label == "ols":
        return est.ols(ds, truth=truth)
    if label == "wls_spectral":
        return wls_spectral(ds, cfg, truth=truth)
    if label == "symblearn":
        return est.symblearn(ds, cfg, epoch_mode=epoch_mode, truth=truth)
    if label == "symblearn_mult":
        return est.symblearn_mult(ds, cfg=cfg, truth=truth)
    raise InvalidArgumentError(f"unknown estimator '{label}', expected one of {ESTIMATORS}")


# -- records ---------------------------------------------------------------

@dataclass(frozen=True)
class TrialRecord:
    estimator: str
    n: int
    d: int
    trial: int
    seed: int
    err_w: float
    err_f: float | None
    n_err_w: float
    runtime_ms: float
    reason: str | None = None

    @property
    def failed(self):
        return self.reason is not None

    def sort_key(self):
        return (self.estimator, self.n, self.d, self.trial)


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float


# -- experiment spec -------------------------------------------------------

def default_epoch_mode(name):
    return "figure2" in name.lower()


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    n_values: tuple
    d_values: tuple
    trials: int
    estimators: tuple
    f_norm: float = 1.0
    w_norm: float = 1.0
    master_seed: int = 0
    symblearn_cfg: est.SymbLearnConfig = field(default_factory=est.SymbLearnConfig)
    epoch_mode: bool | None = None

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(v) for v in self.n_values))
        object.__setattr__(self, "d_values", tuple(int(v) for v in self.d_values))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if self.epoch_mode is None:
            object.__setattr__(self, "epoch_mode", default_epoch_mode(self.name))
        if not self.n_values or not self.d_values or not self.estimators:
            raise InvalidArgumentError("n_values, d_values and estimators must be non-empty")
        if any(v < 1 for v in self.n_values + self.d_values) or self.trials < 1:
            raise InvalidArgumentError("n, d and trials must be positive")
        unknown = set(self.estimators) - set(ESTIMATORS)
        if unknown:
            raise InvalidArgumentError(f"unknown estimators {sorted(unknown)}")
        if not (self.f_norm > 0 and self.w_norm > 0):
            raise InvalidArgumentError("f_norm and w_norm must be positive")
        if not 0 <= self.master_seed < 1 << 64:
            raise InvalidArgumentError("master_seed must be a 64-bit unsigned integer")
        for n in self.n_values:
            for d in self.d_values:
                if n < 4 * d:
                    raise InvalidArgumentError(f"grid cell n={n}, d={d} violates n >= 4 d")

    def cells(self):
        for label in self.estimators:
            for n in self.n_values:
                for d in self.d_values:
                    for t in range(self.trials):
                        yield label, n, d, t

    @classmethod
    def from_text(cls, text):
        kv = parse_kv_file(text)
        known = {f.name for f in fields(cls)}
        for key, (_, line) in kv.items():
            if key not in known:
                raise DataFormatError(f"unknown key '{key}'", line=line, column=key)
        for key in ("name", "n_values", "d_values", "trials", "estimators"):
            if key not in kv:
                raise DataFormatError(f"missing required key '{key}'", column=key)

        def conv(key, fn):
            value, line = kv[key]
            try:
                return fn(value)
            except (ValueError, TypeError, HetRegError) as e:
                raise DataFormatError(f"bad value for '{key}': {e}", line=line, column=key) from None

        ints = lambda s: tuple(int(v) for v in s.split(",") if v.strip())
        kwargs = {
            "name": kv["name"][0],
            "n_values": conv("n_values", ints),
            "d_values": conv("d_values", ints),
            "trials": conv("trials", int),
            "estimators": conv("estimators", lambda s: tuple(v.strip() for v in s.split(",") if v.strip())),
        }
        for key in ("f_norm", "w_norm"):
            if key in kv:
                kwargs[key] = conv(key, float)
        if "master_seed" in kv:
            kwargs["master_seed"] = conv("master_seed", int)
        if "epoch_mode" in kv:
            kwargs["epoch_mode"] = conv("epoch_mode", _parse_bool)
        if "symblearn_cfg" in kv:
            kwargs["symblearn_cfg"] = conv("symblearn_cfg", parse_cfg)
        try:
            return cls(**kwargs)
        except InvalidArgumentError as e:
            raise DataFormatError(str(e)) from None

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            return cls.from_text(fh.read())


def _parse_bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


_CFG_TYPES = {"K": int, "K_p": int, "c_step": float, "polylog_const": float, "polylog_power": float, "delta": float}


def parse_cfg(s):
    """``key:value`` pairs separated by commas, e.g. ``c_step:0.05,K:12``."""
    kwargs = {}
    for item in s.split(","):
        if not item.strip():
            continue
        key, _, value = item.partition(":")
        key = key.strip()
        if key not in _CFG_TYPES:
            raise ValueError(f"unknown symblearn_cfg field '{key}'")
        kwargs[key] = _CFG_TYPES[key](value.strip())
    return est.SymbLearnConfig(**kwargs)


# -- trials ----------------------------------------------------------------

def cell_stream_index(n, d, trial, multiplicative):
    """Stable 64-bit stream index for one (n, d, trial) cell."""
    key = f"hetreg-cell|n={n}|d={d}|trial={trial}|mult={int(multiplicative)}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def cell_instance(master_seed, n, d, trial, multiplicative, w_norm=1.0, f_norm=1.0):
    """Ground truth and the (partially consumed) stream that will draw the data."""
    stream = make_stream(master_seed, cell_stream_index(n, d, trial, multiplicative))
    inst = random_instance(d, stream, w_norm=w_norm, f_norm=f_norm, multiplicative=multiplicative)
    return inst, stream


def run_trial(estimator, n, d, inst, stream, trial=0, cfg=None, epoch_mode=False):
    """Sample one dataset from ``inst``, fit ``estimator`` and score it.

    Estimator failures come back as a record with ``reason`` set and NaN
    errors; they are never raised.
    """
    t0 = time.perf_counter()
    try:
        ds = sample_dataset(inst, n, stream)
        report = fit(estimator, ds, cfg, epoch_mode)
        ew = err_w(report.w_hat, inst.w_star)
        ef = None if report.f_hat is None else err_f(report.f_hat, inst.f_star)
        reason = None
    except Exception as e:  # a failed trial must not take its siblings down
        log.warning("trial %s n=%d d=%d #%d failed: %s", estimator, n, d, trial, e)
        ew, ef, reason = math.nan, None, f"{type(e).__name__}: {e}"
    runtime = (time.perf_counter() - t0) * 1e3
    return TrialRecord(estimator, n, d, trial, stream.stream_index, ew, ef, n * ew, runtime, reason)


def _run_cell(args):
    label, n, d, t, spec = args
    inst, stream = cell_instance(spec.master_seed, n, d, t, label == "symblearn_mult", spec.w_norm, spec.f_norm)
    return run_trial(label, n, d, inst, stream, trial=t, cfg=spec.symblearn_cfg, epoch_mode=spec.epoch_mode)


def run_grid(spec, workers=1):
    """All trial records of ``spec``, sorted by (estimator, n, d, trial)."""
    tasks = [(label, n, d, t, spec) for label, n, d, t in spec.cells()]
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1:
        records = [_run_cell(a) for a in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_cell, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    return sorted(records, key=TrialRecord.sort_key)


# -- summaries -------------------------------------------------------------

def mean_by(records, key, value="err_w"):
    """Mean of ``value`` over successful records, grouped by ``key(record)``."""
    groups = {}
    for r in records:
        v = getattr(r, value)
        if r.failed or v is None:
            continue
        groups.setdefault(key(r), []).append(v)
    return {k: float(np.mean(v)) for k, v in sorted(groups.items())}


def fit_rate(records, vary):
    """Least-squares line through ``(log x, log mean err_w)``, ``x`` being ``vary``."""
    if vary not in ("n", "d"):
        raise InvalidArgumentError(f"vary must be 'n' or 'd', got {vary!r}")
    labels = {r.estimator for r in records}
    if len(labels) > 1:
        raise InvalidArgumentError(f"records mix estimators {sorted(labels)}")
    means = mean_by(records, key=lambda r: getattr(r, vary))
    if len(means) < 3:
        raise InvalidArgumentError(f"need at least 3 distinct values of {vary}, got {len(means)}")
    if min(means.values()) <= 0:
        raise InvalidArgumentError("mean errors must be positive for a log-log fit")
    x = np.log(np.array(list(means), dtype=float))
    y = np.log(np.array(list(means.values())))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    return RateFit(float(slope), float(intercept), min(max(r2, 0.0), 1.0))


def with_epoch_mode(spec, epoch_mode):
    return replace(spec, epoch_mode=epoch_mode)
