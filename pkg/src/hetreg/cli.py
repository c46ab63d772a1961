"""Command line interface: ``hetreg gen | fit | bench``.

Exit codes: 0 success, 2 argument error, 3 data error, 4 numerical failure.
"""
import argparse
import logging
import sys

from . import io
from .errors import (
    ConvergenceError,
    DataFormatError,
    InsufficientSamplesError,
    InvalidArgumentError,
    InvalidParameterError,
    SingularDesignError,
)
from .estimators import SymbLearnConfig
from .harness import ESTIMATORS, ExperimentSpec, fit, run_grid
from .model import random_instance, sample_dataset
from .numerics import make_stream

EXIT_OK, EXIT_ARGS, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4

log = logging.getLogger("hetreg")


def truth_path(data_path):
    return f"{data_path}.truth.json"


def cmd_gen(args):
    stream = make_stream(args.seed, args.stream_index)
    inst = random_instance(args.d, stream, w_norm=args.w_norm, f_norm=args.f_norm, multiplicative=args.multiplicative)
    ds = sample_dataset(inst, args.n, stream)
    io.write_dataset(ds, args.out)
    io.write_truth(inst, truth_path(args.out))
    log.info("wrote %d x %d dataset to %s (truth: %s)", ds.n, ds.d, args.out, truth_path(args.out))


def _cfg_from_args(args):
    return SymbLearnConfig(
        K=args.K, K_p=args.K_p, c_step=args.c_step, polylog_const=args.polylog_const,
        polylog_power=args.polylog_power, delta=args.delta,
    )


def cmd_fit(args):
    ds = io.read_dataset(args.data)
    truth = io.read_truth(args.truth) if args.truth else None
    if truth is not None and truth.d != ds.d:
        raise DataFormatError(f"truth has d={truth.d} but data has d={ds.d}")
    cfg = _cfg_from_args(args)
    report = fit(args.estimator, ds, cfg, epoch_mode=args.epoch_mode, truth=truth)
    config = {"estimator": args.estimator, "n": ds.n, "d": ds.d, "epoch_mode": args.epoch_mode,
              "symblearn_cfg": cfg.to_dict(), "data": args.data}
    io.write_fit_json(report, config, args.out)


def cmd_bench(args):
    spec = ExperimentSpec.from_file(args.spec)
    records = run_grid(spec, workers=args.workers)
    io.write_csv(records, args.out, include_timing=not args.no_timing)
    failed = sum(r.failed for r in records)
    log.info("%d records (%d failed) written to %s", len(records), failed, args.out)


def build_parser():
    p = argparse.ArgumentParser(prog="hetreg", description="Heteroscedastic linear regression estimators.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="sample a synthetic dataset")
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--f-norm", type=float, default=1.0)
    g.add_argument("--w-norm", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--stream-index", type=int, default=0)
    g.add_argument("--multiplicative", action="store_true", help="set f* = w*")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    f = sub.add_parser("fit", help="fit one estimator to a dataset CSV")
    f.add_argument("--estimator", choices=ESTIMATORS, required=True)
    f.add_argument("--data", required=True)
    f.add_argument("--out", required=True)
    f.add_argument("--truth", help="ground-truth JSON written by 'gen' (enables trace errors)")
    f.add_argument("--epoch-mode", action="store_true", help="symblearn: reuse all data in every stage")
    d = SymbLearnConfig()
    f.add_argument("--K", type=int, default=None)
    f.add_argument("--K-p", dest="K_p", type=int, default=None)
    f.add_argument("--c-step", type=float, default=d.c_step)
    f.add_argument("--polylog-const", type=float, default=d.polylog_const)
    f.add_argument("--polylog-power", type=float, default=d.polylog_power)
    f.add_argument("--delta", type=float, default=d.delta)
    f.set_defaults(func=cmd_fit)

    b = sub.add_parser("bench", help="run a Monte-Carlo grid from a spec file")
    b.add_argument("--spec", required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--workers", type=int, default=None, help="default: number of CPUs")
    b.add_argument("--no-timing", action="store_true", help="leave runtime_ms empty (byte-reproducible CSV)")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except (InvalidArgumentError, InvalidParameterError) as e:
        print(f"hetreg: error: {e}", file=sys.stderr)
        return EXIT_ARGS
    except (DataFormatError, InsufficientSamplesError, OSError) as e:
        print(f"hetreg: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (SingularDesignError, ConvergenceError) as e:
        print(f"hetreg: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
