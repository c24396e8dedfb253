"""Command line interface: ``sparsepconf {fit,cv,predict,simulate}``."""

import argparse
import csv
import io
import logging
import sys

import numpy as np

from . import core
from .core import LabeledDataset, PconfDataset
from .exceptions import (
    ConfigError,
    DivergenceError,
    PconfError,
    ReplicationFailure,
)
from .io import (
    atomic_write,
    check_confidence_column,
    check_label_column,
    dump_model,
    fingerprint,
    load_model,
    read_config,
    read_table,
)
from .model_selection import LambdaGrid, auto_grid, cross_validate, fit_at_lambda
from .penalties import PenaltySpec, penalty_value
from .simulation import METHODS, METRICS, ExperimentConfig, SimDesign, run_experiment
from .solver import SolverConfig, fit_any

log = logging.getLogger("sparsepconf")

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_REPLICATIONS = 4

SUMMARY_COLUMNS = ["design_id", "method"] + [
    f"{m}_{s}" for m in ("prediction", "l2sq", "tpr", "fdr", "size") for s in ("mean", "sd")
]


def _fmt(x):
    return repr(float(x))


def _step(value):
    return value if value == "auto" else float(value)


def _add_solver_args(p):
    p.add_argument("--penalty", default="l1", choices=["l1", "scad", "mcp"])
    p.add_argument("--shape", type=float, default=None, help="SCAD a or MCP gamma")
    p.add_argument("--step", type=_step, default="auto", help="step size or 'auto'")
    p.add_argument("--max-epochs", type=int, default=10000)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--mode", default="pconf", choices=["pconf", "supervised"])
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-lambdas", type=int, default=50)
    p.add_argument("--lambda-ratio", type=float, default=0.01)
    p.add_argument("--grid", default=None, help="comma separated lambda values")


def build_parser():
    parser = argparse.ArgumentParser(prog="sparsepconf", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a model and write it to a model file")
    p.add_argument("input")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--lambda", dest="lam", default="cv", help="a number or 'cv'")
    _add_solver_args(p)
    p.add_argument("--config")

    p = sub.add_parser("cv", help="cross-validate lambda and write the CV curve")
    p.add_argument("input")
    p.add_argument("--out", default="-", help="curve CSV ('-' for stdout)")
    _add_solver_args(p)
    p.add_argument("--config")

    p = sub.add_parser("predict", help="predict labels with a fitted model")
    p.add_argument("model")
    p.add_argument("input")
    p.add_argument("--out", default="-")
    p.add_argument("--scores", action="store_true", help="also emit P(y=+1|x)")
    p.add_argument("--config")

    p = sub.add_parser("simulate", help="Monte Carlo simulation table")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--d", type=int, default=320)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--link", default="logistic", choices=["logistic", "probit"])
    p.add_argument("--test-labels", default="deterministic", choices=["deterministic", "noisy"])
    p.add_argument("--n-test", type=int, default=5000)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--methods", default=",".join(METHODS))
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--n-lambdas", type=int, default=50)
    p.add_argument("--lambda-ratio", type=float, default=0.01)
    p.add_argument("--step", type=_step, default="auto")
    p.add_argument("--max-epochs", type=int, default=10000)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="-")
    p.add_argument("--per-rep", default=None, help="optional per-replication CSV")
    p.add_argument("--config")
    return parser


def _apply_config(parser, argv):
    """Re-parse with defaults taken from ``--config`` so explicit flags still win."""
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    values = read_config(args.config)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in subparser._actions}
    aliases = {"lambda": "lam"}
    defaults = {}
    for key, raw in values.items():
        dest = aliases.get(key, key)
        action = actions.get(dest)
        if action is None or dest in ("config", "help"):
            raise ConfigError(f"{args.config}: unknown key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            defaults[dest] = raw.lower() in ("1", "true", "yes", "on")
            continue
        try:
            value = action.type(raw) if action.type else raw
        except (TypeError, ValueError):
            raise ConfigError(f"{args.config}: bad value {raw!r} for {key}") from None
        if action.choices and value not in action.choices:
            raise ConfigError(f"{args.config}: {key} must be one of {sorted(action.choices)}")
        defaults[dest] = value
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def _emit(path, text):
    if path == "-":
        sys.stdout.write(text)
    else:
        atomic_write(path, text)


def _solver_cfg(args):
    return SolverConfig(step=args.step, max_epochs=args.max_epochs, tol=args.tol, seed=args.seed)


def _grid(args, data):
    if args.grid:
        try:
            values = [float(v) for v in args.grid.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"--grid must be comma separated numbers, got {args.grid!r}") from None
        return LambdaGrid.explicit(values)
    grid = auto_grid(data, args.n_lambdas, args.lambda_ratio)
    if grid.degenerate:
        log.warning("gradient at zero vanishes; using the single-point grid %g", grid.values[0])
    return grid


def _load_training(args):
    target = "r" if args.mode == "pconf" else "y"
    X, t = read_table(args.input, target)
    mean = scale = None
    if args.standardize:
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0] = 1.0
        X = (X - mean) / scale
    if args.mode == "pconf":
        data = PconfDataset(X, check_confidence_column(t, args.input))
    else:
        y, mapped = check_label_column(t, args.input)
        if mapped:
            log.info("mapped 0/1 labels to -1/+1")
        data = LabeledDataset(X, y)
    return data, mean, scale


def _validate_common(args):
    PenaltySpec(args.penalty, 0.0, args.shape)
    cfg = _solver_cfg(args)
    if args.folds < 2:
        raise ConfigError("--folds must be >= 2")
    if args.n_lambdas < 1 or not 0 < args.lambda_ratio < 1:
        raise ConfigError("--n-lambdas must be >= 1 and --lambda-ratio in (0, 1)")
    return cfg


def cmd_fit(args):
    cfg = _validate_common(args)
    lam = args.lam
    if lam != "cv":
        try:
            lam = float(lam)
        except ValueError:
            raise ConfigError(f"--lambda must be a number or 'cv', got {lam!r}") from None
        PenaltySpec(args.penalty, lam, args.shape)
    data, mean, scale = _load_training(args)

    if lam == "cv":
        report = cross_validate(data, args.penalty, _grid(args, data), args.folds, args.seed, args.shape, cfg)
        result = fit_at_lambda(data, args.penalty, report.lambdas, report.index_opt, args.shape, cfg)
        chosen = report.lambda_opt
    else:
        result = fit_any(data, PenaltySpec(args.penalty, lam, args.shape), cfg)
        chosen = lam

    config = {
        "mode": args.mode,
        "penalty": args.penalty,
        "lambda": chosen,
        "lambda_arg": args.lam,
        "shape": result.spec.shape,
        "step": args.step,
        "max_epochs": args.max_epochs,
        "tol": args.tol,
        "folds": args.folds,
        "seed": args.seed,
        "standardize": args.standardize,
        "n_features": data.d,
    }
    model = {
        "beta": [float(b) for b in result.beta],
        "n_features": data.d,
        "penalty": {"family": args.penalty, "lambda": chosen, "shape": result.spec.shape},
        "standardization": None
        if mean is None
        else {"mean": [float(v) for v in mean], "scale": [float(v) for v in scale]},
        "config": config,
        "fingerprint": fingerprint(config),
    }
    atomic_write(args.out, dump_model(model))
    print(f"model size: {result.support.size}")
    print(f"lambda: {_fmt(chosen)}")
    print(f"objective: {_fmt(result.objective)}")
    print(f"epochs: {result.epochs_run}")
    print(f"converged: {str(result.converged).lower()}")
    return 0


def cmd_cv(args):
    cfg = _validate_common(args)
    data, _, _ = _load_training(args)
    report = cross_validate(data, args.penalty, _grid(args, data), args.folds, args.seed, args.shape, cfg)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    k = report.per_lambda_risk.shape[1]
    w.writerow(["lambda", "cv_risk"] + [f"fold_{j + 1}" for j in range(k)])
    for lam, mean, row in zip(report.lambdas, report.cv_curve, report.per_lambda_risk):
        w.writerow([_fmt(lam), _fmt(mean)] + [_fmt(v) for v in row])
    _emit(args.out, buf.getvalue())
    print(f"lambda_opt: {_fmt(report.lambda_opt)}", file=sys.stderr if args.out == "-" else sys.stdout)
    return 0


def cmd_predict(args):
    model = load_model(args.model)
    X, _ = read_table(args.input)
    d = model["n_features"]
    if X.shape[1] != d:
        raise ConfigError(f"{args.input} has {X.shape[1]} features but the model expects {d}")
    std = model.get("standardization")
    if std:
        X = (X - np.array(std["mean"])) / np.array(std["scale"])
    beta = np.array(model["beta"])
    margins = core.decision_function(X, beta)
    labels = np.where(margins >= 0, 1, -1)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if args.scores:
        w.writerow(["label", "score"])
        for lab, s in zip(labels, core.sigmoid(margins)):
            w.writerow([int(lab), _fmt(s)])
    else:
        w.writerow(["label"])
        w.writerows([int(lab)] for lab in labels)
    _emit(args.out, buf.getvalue())
    return 0


def cmd_simulate(args):
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = [m for m in methods if m not in METHODS]
    if unknown or not methods:
        raise ConfigError(f"unknown methods {unknown}; choose from {', '.join(METHODS)}")
    if args.jobs < 1 or args.folds < 2:
        raise ConfigError("--jobs must be >= 1 and --folds >= 2")
    design = SimDesign(
        n=args.n, d=args.d, rho_x=args.rho, link=args.link, n_test=args.n_test,
        test_labels=args.test_labels, replications=args.reps, base_seed=args.seed,
    )
    cfg = ExperimentConfig(
        folds=args.folds, n_lambdas=args.n_lambdas, lambda_ratio=args.lambda_ratio,
        solver=SolverConfig(step=args.step, max_epochs=args.max_epochs, tol=args.tol),
    )

    def progress(index, error):
        status = "failed: " + error if error else "done"
        print(f"replication {index + 1}/{design.replications} (seed {design.base_seed + index}) {status}",
              file=sys.stderr)

    report = run_experiment(design, methods, cfg, jobs=args.jobs, progress=progress)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for method, stats in report.summary().items():
        row = [design.design_id, method]
        for metric in METRICS:
            row += [_fmt(stats[metric][0]), _fmt(stats[metric][1])]
        w.writerow(row)
    if args.per_rep:
        per = io.StringIO()
        pw = csv.writer(per, lineterminator="\n")
        pw.writerow(["design_id", "replication", "seed", "method", *METRICS])
        for i in sorted(report.rows):
            for m in report.rows[i]:
                pw.writerow([design.design_id, i, design.base_seed + i, m.method,
                             *(_fmt(v) for v in m.as_tuple()[:-1]), m.size])
        atomic_write(args.per_rep, per.getvalue())
    _emit(args.out, buf.getvalue())
    return 0


COMMANDS = {"fit": cmd_fit, "cv": cmd_cv, "predict": cmd_predict, "simulate": cmd_simulate}


def main(argv=None):
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(levelname)s: %(message)s",
        )
        return COMMANDS[args.command](args)
    except ReplicationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REPLICATIONS
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except PconfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
