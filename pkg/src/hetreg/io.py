"""File formats: dataset CSV, results CSV, experiment spec files, fit/truth JSON."""
import csv
import json
import math

import numpy as np

from .errors import DataFormatError
from .model import Dataset, ProblemInstance

RESULTS_HEADER = ("estimator", "n", "d", "trial", "seed", "err_w", "err_f", "n_err_w", "runtime_ms")


def fmt_float(v):
    """17 significant digits: enough to round-trip any double."""
    return format(float(v), ".17g")


# -- datasets --------------------------------------------------------------

def dataset_header(d):
    return [f"x{j}" for j in range(1, d + 1)] + ["y"]


def write_dataset(ds, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(dataset_header(ds.d))
        for xi, yi in zip(ds.X, ds.y):
            w.writerow([fmt_float(v) for v in xi] + [fmt_float(yi)])


def read_dataset(path):
    with open(path, newline="") as fh:
        rows = csv.reader(fh)
        try:
            header = next(rows)
        except StopIteration:
            raise DataFormatError("empty file", line=1) from None
        if len(header) < 2:
            raise DataFormatError(f"need at least one covariate column and y, got {header}", line=1)
        expected = dataset_header(len(header) - 1)
        for col, (got, want) in enumerate(zip(header, expected)):
            if got.strip() != want:
                raise DataFormatError(f"column {col + 1}: expected '{want}', found '{got}'", line=1, column=want)
        values = []
        for lineno, row in enumerate(rows, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataFormatError(f"expected {len(header)} fields, found {len(row)}", line=lineno)
            try:
                values.append([float(v) for v in row])
            except ValueError as e:
                raise DataFormatError(str(e), line=lineno) from None
    if not values:
        raise DataFormatError("no data rows", line=2)
    arr = np.array(values)
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(arr), axis=1))[0])
        raise DataFormatError("non-finite value", line=bad + 2)
    return Dataset(arr[:, :-1], arr[:, -1])


# -- ground truth ----------------------------------------------------------

def write_truth(inst, path):
    payload = {
        "d": inst.d,
        "w_star": [float(v) for v in inst.w_star],
        "f_star": [float(v) for v in inst.f_star],
        "multiplicative": inst.multiplicative,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def read_truth(path):
    try:
        with open(path) as fh:
            payload = json.load(fh)
        return ProblemInstance(
            int(payload["d"]), payload["w_star"], payload["f_star"], bool(payload.get("multiplicative", False))
        )
    except (KeyError, TypeError, json.JSONDecodeError) as e:
        raise DataFormatError(f"bad truth file {path}: {e}") from None


# -- fit output ------------------------------------------------------------

def _num(v):
    return None if v is None else float(v)


def report_to_json(report, config):
    return {
        "w_hat": [float(v) for v in report.w_hat],
        "f_hat": None if report.f_hat is None else [float(v) for v in report.f_hat],
        "trace": [
            {"step_index": t.step_index, "err_w_true": _num(t.err_w_true), "err_f_true": _num(t.err_f_true), "note": t.note}
            for t in report.trace
        ],
        "config": config,
    }


def write_fit_json(report, config, path):
    with open(path, "w") as fh:
        json.dump(report_to_json(report, config), fh, indent=2)
        fh.write("\n")


# -- results CSV -----------------------------------------------------------

def record_row(rec, include_timing=True):
    err_f = "" if rec.err_f is None else fmt_float(rec.err_f)
    runtime = fmt_float(rec.runtime_ms) if include_timing else ""
    return [rec.estimator, str(rec.n), str(rec.d), str(rec.trial), str(rec.seed),
            fmt_float(rec.err_w), err_f, fmt_float(rec.n_err_w), runtime]


def write_csv(records, path, include_timing=True):
    """Write trial records; ``include_timing=False`` blanks ``runtime_ms``
    so that reruns produce byte-identical files."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULTS_HEADER)
        for rec in records:
            w.writerow(record_row(rec, include_timing))


def read_csv_rows(path):
    """Parse a results CSV into dicts of typed values (no TrialRecord objects)."""
    out = []
    with open(path, newline="") as fh:
        rows = csv.reader(fh)
        header = tuple(next(rows, ()))
        if header != RESULTS_HEADER:
            raise DataFormatError(f"unexpected results header {header}", line=1)
        for lineno, row in enumerate(rows, start=2):
            if len(row) != len(RESULTS_HEADER):
                raise DataFormatError(f"expected {len(RESULTS_HEADER)} fields, found {len(row)}", line=lineno)
            rec = dict(zip(RESULTS_HEADER, row))
            for k in ("n", "d", "trial", "seed"):
                rec[k] = int(rec[k])
            for k in ("err_w", "n_err_w"):
                rec[k] = float(rec[k])
            rec["err_f"] = float(rec["err_f"]) if rec["err_f"] else None
            rec["runtime_ms"] = float(rec["runtime_ms"]) if rec["runtime_ms"] else math.nan
            out.append(rec)
    return out


# -- experiment spec files -------------------------------------------------

def parse_kv_file(text):
    """``key = value`` lines; ``#`` starts a comment. Returns ``{key: (value, line)}``."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataFormatError(f"expected 'key = value', got {raw!r}", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key in out:
            raise DataFormatError(f"duplicate key '{key}'", line=lineno)
        out[key] = (value, lineno)
    return out
