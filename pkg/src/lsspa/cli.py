"""Command-line interface.

    lsspa attribute --train train.csv --test test.csv [options]
    lsspa bench --preset toy|medium-desk [--seeds N] [--out DIR]

Exit codes: 0 success (converged or not), 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from .exact import exact_shapley, subset_r2_oracle
from .exceptions import InvalidInputError, LSSPAError, NumericalError
from .io import atomic_write, csv_text, read_csv
from .pipeline import RunConfig, ToleranceWarning, attribute, attribute_prepared, prepare
from .reduction import center
from .synthdata import SynthSpec, gen_dataset, gen_toy

SCHEMA_VERSION = "1.0"

_number_list = {"type": "array", "items": {"type": ["number", "null"]}}
REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": [
        "schema_version", "p", "feature_names", "shapley", "per_feature_error",
        "overall_error", "r2_full", "converged", "batches_used",
        "total_lift_vectors", "config_echo", "wall_time_seconds",
    ],
    "properties": {
        "schema_version": {"type": "string"},
        "p": {"type": "integer", "minimum": 1},
        "feature_names": {"type": "array", "items": {"type": "string"}},
        "shapley": _number_list,
        "per_feature_error": _number_list,
        "overall_error": {"type": ["number", "null"]},
        "r2_full": {"type": "number"},
        "intercept": {"type": ["number", "null"]},
        "converged": {"type": "boolean"},
        "batches_used": {"type": "integer", "minimum": 0},
        "total_lift_vectors": {"type": "integer", "minimum": 0},
        "config_echo": {"type": "object"},
        "wall_time_seconds": {"type": "number", "minimum": 0},
    },
}

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _finite(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _build_attribute_parser(parser):
    parser.add_argument("--train", required=True, type=Path)
    parser.add_argument("--test", required=True, type=Path)
    parser.add_argument("--target", default="last", help="label column name, default: last column")
    parser.add_argument("--max-perms", type=int, default=2**13)
    parser.add_argument("--batch-size", type=int, default=2**8)
    parser.add_argument("--tolerance", type=float, default=1e-2)
    parser.add_argument("--quantile", type=float, default=0.95)
    parser.add_argument("--risk-draws", type=int, default=1000)
    parser.add_argument("--sampler", choices=["mc", "argsort-qmc"], default="argsort-qmc")
    parser.add_argument("--antithetical", action="store_true")
    parser.add_argument("--ridge", type=float, default=None, metavar="LAMBDA")
    parser.add_argument("--no-center", action="store_true")
    parser.add_argument("--reduction", choices=["qr", "cholesky"], default="qr")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="-", help="report path, '-' for stdout")
    parser.add_argument("--history", type=Path, default=None, help="per-batch history CSV")


def _build_bench_parser(parser):
    parser.add_argument("--preset", required=True)
    parser.add_argument("--seeds", type=int, default=None)
    parser.add_argument("--out", type=Path, default=Path("bench_out"))


def history_csv(result) -> str:
    p = len(result.shapley)
    header = ["batch_index", "samples", "sigma_hat"] + [f"S_{j + 1}" for j in range(p)]
    rows = ([h.batch_index, h.samples, float(h.sigma_hat), *map(float, h.shapley)] for h in result.history)
    return csv_text(header, rows)


def build_report(result, feature_names, config: RunConfig, wall_time: float) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "p": len(result.shapley),
        "feature_names": list(feature_names),
        "shapley": [_finite(v) for v in result.shapley],
        "per_feature_error": [_finite(v) for v in result.per_feature_error],
        "overall_error": _finite(result.overall_error),
        "r2_full": float(result.r2_full),
        "intercept": None if result.intercept is None else float(result.intercept),
        "converged": bool(result.converged),
        "batches_used": int(result.batches_used),
        "total_lift_vectors": int(result.total_lift_vectors),
        "config_echo": config.to_dict(),
        "wall_time_seconds": wall_time,
    }


def run_attribute(argv) -> int:
    parser = _ArgumentParser(prog="lsspa attribute", description="Shapley attribution of out-of-sample R^2")
    _build_attribute_parser(parser)
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        train, names = read_csv(args.train, args.target)
        test, test_names = read_csv(args.test, args.target)
        if test_names != names:
            raise InvalidInputError("train and test CSVs must have the same feature columns")
        config = RunConfig(
            max_permutations=args.max_perms,
            batch_size=args.batch_size,
            tolerance=args.tolerance,
            quantile=args.quantile,
            risk_draws=args.risk_draws,
            sampler=args.sampler,
            antithetical=args.antithetical,
            ridge_lambda=args.ridge,
            center=not args.no_center,
            reduction_path=args.reduction,
            seed=args.seed,
        )
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ToleranceWarning)
            result = attribute(train, test, config)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    except NumericalError as exc:
        print(f"lsspa: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (LSSPAError, ValueError, OSError) as exc:
        print(f"lsspa: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID

    report = build_report(result, names, config, time.perf_counter() - started)
    text = json.dumps(report, indent=2) + "\n"
    if args.history is not None:
        atomic_write(args.history, history_csv(result))
    if args.out == "-":
        sys.stdout.write(text)
    else:
        atomic_write(args.out, text)
        print(args.out)
    return EXIT_OK


# preset: synthetic problem, sampling budget, ground-truth budget
BENCH_PRESETS = {
    "toy": dict(p=3, n=50, K=2**8, B=2**4, gt_perms=None, seeds=3),
    "medium-desk": dict(p=20, n=10**4, K=2**13, B=2**8, gt_perms=2**20, seeds=10),
}
BENCH_METHODS = (
    ("mc", "monte_carlo", False),
    ("argsort_qmc", "argsort_qmc", False),
    ("mc_antithetical", "monte_carlo", True),
    ("argsort_qmc_antithetical", "argsort_qmc", True),
)
_NO_STOP = 1e-300


def ground_truth(problem, n_perms, seed=2**32 - 1):
    """Shapley values from a long Monte Carlo run with antithetical pairs."""
    B = min(n_perms, 2**12)
    config = RunConfig(
        max_permutations=n_perms, batch_size=B, tolerance=_NO_STOP, sampler="monte_carlo",
        antithetical=True, seed=seed, risk_draws=10,
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ToleranceWarning)
        return attribute_prepared(problem, config).shapley


def _bench_problem(name, preset):
    if name == "toy":
        train, test = gen_toy(0)
    else:
        train, test, _ = gen_dataset(SynthSpec(preset["p"], preset["n"], preset["n"], seed=0))
    return train, test


def run_bench(argv) -> int:
    parser = _ArgumentParser(prog="lsspa bench", description="sampler comparison on synthetic data")
    _build_bench_parser(parser)
    args = parser.parse_args(argv)
    if args.preset not in BENCH_PRESETS:
        print(f"lsspa bench: unknown preset {args.preset!r}; choose from {sorted(BENCH_PRESETS)}", file=sys.stderr)
        return EXIT_INVALID
    preset = BENCH_PRESETS[args.preset]
    n_seeds = preset["seeds"] if args.seeds is None else args.seeds
    if n_seeds < 1:
        print("lsspa bench: --seeds must be positive", file=sys.stderr)
        return EXIT_INVALID

    train, test = _bench_problem(args.preset, preset)
    base = RunConfig(max_permutations=preset["K"], batch_size=preset["B"], tolerance=_NO_STOP)
    problem = prepare(train, test, base)
    if preset["gt_perms"] is None:
        truth = exact_shapley(subset_r2_oracle(*_centered(train, test)), problem.p)
    else:
        truth = ground_truth(problem, preset["gt_perms"])

    summary_rows = []
    for label, kind, anti in BENCH_METHODS:
        for seed in range(n_seeds):
            config = RunConfig(
                max_permutations=preset["K"], batch_size=preset["B"], tolerance=_NO_STOP,
                sampler=kind, antithetical=anti, seed=seed,
            )
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ToleranceWarning)
                result = attribute_prepared(problem, config)
            errors = [float(np.linalg.norm(h.shapley - truth)) for h in result.history]
            rows = ([h.batch_index, h.samples, float(h.sigma_hat), e] for h, e in zip(result.history, errors))
            atomic_write(
                args.out / f"history_{label}_seed{seed}.csv",
                csv_text(["batch_index", "samples", "sigma_hat", "true_error"], rows),
            )
            summary_rows.append([label, seed, errors[0], errors[-1], float(result.history[-1].sigma_hat)])

    atomic_write(
        args.out / "summary.csv",
        csv_text(["method", "seed", "initial_true_error", "final_true_error", "final_sigma_hat"], summary_rows),
    )
    final = {(r[0], r[1]): r[3] for r in summary_rows}
    wins = sum(final[("argsort_qmc", s)] <= final[("mc", s)] for s in range(n_seeds))
    print(f"ground truth: {np.array2string(truth, precision=4)}")
    for label, *_ in BENCH_METHODS:
        errs = [final[(label, s)] for s in range(n_seeds)]
        print(f"{label:26s} median final error {np.median(errs):.3e}")
    print(f"argsort QMC <= MC in {wins} of {n_seeds} seeds")
    return EXIT_OK


def _centered(train, test):
    train_c, test_c, _ = center(train, test)
    return train_c, test_c


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    commands = {"attribute": run_attribute, "bench": run_bench}
    if not argv or argv[0] not in commands:
        print("usage: lsspa {attribute,bench} [options]", file=sys.stderr)
        return EXIT_INVALID
    try:
        return commands[argv[0]](argv[1:])
    except SystemExit as exc:
        # argparse exits on --help and on bad flags
        return exc.code if isinstance(exc.code, int) else EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
