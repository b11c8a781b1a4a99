"""Command-line surface.

Subcommands cover the whole workflow: `gen-data` synthesizes a labeled
drive cycle, `train` fits one network on a holdout split, `crossval`
runs K-fold cross-validation, `evaluate` scores a saved model on a test
CSV, and `predict` writes clamped SOC predictions for a feature CSV.
Every stochastic subcommand takes --seed and is bit-reproducible under
it: rerunning the same invocation rewrites byte-identical CSVs and
model files.

Exit codes: 0 success; 2 usage or configuration error; 3 I/O error;
4 schema, shape, or model-format violation; 5 numeric failure (loss
went non-finite).
"""

import argparse
import logging
import os
import sys

from . import __version__
from .battsim import CellParams, CycleConfig, synth_dataset
from .data import (
    concat_datasets,
    fit_normalizer,
    apply_normalizer,
    load_csv,
    load_features_csv,
    split_holdout,
    target_vector,
    time_vector,
    write_csv,
    write_predictions_csv,
)
from .errors import ConfigError, NumericError, SocdfnError
from .modelio import (
    load_model,
    save_model,
    write_cv_csv,
    write_gnuplot_script,
    write_history_csv,
)
from .network import init_network, make_specs, predict_soc, RegConfig
from .optimize import OPTIMIZER_KINDS, OptimizerConfig
from .rng import BIT_GENERATOR, shift_seed
from .train import TrainConfig, cross_validate, evaluate, fit

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_SCHEMA = 4
EXIT_NUMERIC = 5

PRESETS = {
    # 2 hidden layers of 256, no regularization.
    "paper-2h": {"hidden": 2, "units": 256, "dropout": 0.0},
    # 4 hidden layers counting dropout: dense 256 + dropout 0.5, twice.
    "paper-4h-dropout": {"hidden": 4, "units": 256, "dropout": 0.5},
}

_EPILOG = """exit codes:
  0  success
  2  usage or configuration error
  3  I/O error (missing or unwritable file)
  4  schema/validation error (bad CSV, shape mismatch, bad model file)
  5  numeric failure (training loss went non-finite)
"""


def _add_arch_args(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--preset",
        choices=sorted(PRESETS),
        help="named architecture preset; explicit flags below override it",
    )
    p.add_argument(
        "--hidden",
        type=int,
        help="hidden layer count; dropout layers count, so with --dropout > 0 "
        "this must be even (default 2)",
    )
    p.add_argument("--units", type=int, help="units per dense hidden layer (default 256)")
    p.add_argument(
        "--dropout", type=float, help="dropout rate after each dense hidden layer (default 0)"
    )


def _add_train_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch", type=int, default=128)
    p.add_argument("--optimizer", choices=OPTIMIZER_KINDS, default="adam")
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--beta1", type=float, default=0.9)
    p.add_argument("--beta2", type=float, default=0.999)
    p.add_argument("--rho", type=float, default=0.9)
    p.add_argument("--epsilon", type=float, default=1e-8)
    p.add_argument("--l1", type=float, default=0.0)
    p.add_argument("--l2", type=float, default=0.0)
    p.add_argument("--loss", choices=("mse", "mae"), default="mse")
    p.add_argument("--train-frac", type=float, default=0.8)
    p.add_argument("--val-frac", type=float, default=0.1)
    p.add_argument(
        "--no-shuffle",
        action="store_true",
        help="split by file position instead of a seeded shuffle",
    )
    p.add_argument("--seed", type=int, default=0)


def _resolve_arch(args) -> tuple[int, int, float]:
    arch = {"hidden": 2, "units": 256, "dropout": 0.0}
    if args.preset is not None:
        arch.update(PRESETS[args.preset])
    if args.hidden is not None:
        arch["hidden"] = args.hidden
    if args.units is not None:
        arch["units"] = args.units
    if args.dropout is not None:
        arch["dropout"] = args.dropout
    return arch["hidden"], arch["units"], arch["dropout"]


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch,
        optimizer=OptimizerConfig(
            kind=args.optimizer,
            learning_rate=args.lr,
            beta1=args.beta1,
            beta2=args.beta2,
            rho=args.rho,
            epsilon=args.epsilon,
        ),
        reg=RegConfig(l1=args.l1, l2=args.l2),
        shuffle_seed=shift_seed(args.seed, 2),
        loss=args.loss,
    )


def _meta(args, hidden: int, units: int, dropout: float) -> dict:
    return {
        "tool": "socdfn",
        "tool_version": __version__,
        "bit_generator": BIT_GENERATOR,
        "seed": args.seed,
        "data": str(args.data),
        "arch": {"hidden": hidden, "units": units, "dropout": dropout},
        "split": {
            "train_frac": args.train_frac,
            "val_frac": args.val_frac,
            "shuffle": not args.no_shuffle,
        },
        "train": {
            "epochs": args.epochs,
            "batch_size": args.batch,
            "optimizer": args.optimizer,
            "lr": args.lr,
            "beta1": args.beta1,
            "beta2": args.beta2,
            "rho": args.rho,
            "epsilon": args.epsilon,
            "l1": args.l1,
            "l2": args.l2,
            "loss": args.loss,
        },
    }


def cmd_gen_data(args) -> int:
    cell = CellParams(
        capacity_ah=args.capacity,
        r_internal_ohm=args.r_internal,
        ambient_c=args.ambient,
    )
    cycle = CycleConfig(
        duration_s=args.duration,
        dt_s=args.dt,
        peak_discharge_a=args.peak,
        regen_fraction=args.regen_fraction,
        seed=args.seed,
    )
    dataset = synth_dataset(cell, cycle, soc0_pct=args.soc0)
    write_csv(dataset, args.out)
    print(f"wrote {len(dataset)} rows to {args.out}")
    return EXIT_OK


def _load_and_split(args):
    dataset = load_csv(args.data)
    return split_holdout(
        dataset,
        args.train_frac,
        args.val_frac,
        seed=args.seed,
        shuffle=not args.no_shuffle,
    )


def cmd_train(args) -> int:
    hidden, units, dropout = _resolve_arch(args)
    train_ds, val_ds, test_ds = _load_and_split(args)
    norm = fit_normalizer(train_ds)
    x_tr = apply_normalizer(norm, train_ds)
    y_tr = target_vector(train_ds)
    x_va = apply_normalizer(norm, val_ds)
    y_va = target_vector(val_ds)
    specs = make_specs(hidden, units, dropout)
    net = init_network(specs, shift_seed(args.seed, 1))
    cfg = _train_config(args)
    logger.info(
        "training %d epochs on %d rows (val %d, test %d)",
        cfg.epochs, len(train_ds), len(val_ds), len(test_ds),
    )
    net, history = fit(net, x_tr, y_tr, x_va, y_va, cfg)
    test_mae = evaluate(net, norm, test_ds)
    for name, split in (
        ("save_train", train_ds), ("save_val", val_ds), ("save_test", test_ds)
    ):
        path = getattr(args, name)
        if path:
            write_csv(split, path)
    if args.history_out:
        write_history_csv(history, args.history_out)
        if args.emit_gnuplot:
            write_gnuplot_script(str(args.history_out), str(args.history_out) + ".gnuplot")
    elif args.emit_gnuplot:
        raise ConfigError("--emit-gnuplot needs --history-out")
    if args.model_out:
        save_model(net, norm, args.model_out, meta=_meta(args, hidden, units, dropout))
    final = history.final
    print(
        f"epochs={cfg.epochs} train_mae={final.train_mae:.6f} "
        f"val_mae={final.val_mae:.6f} test_mae={test_mae:.6f}"
    )
    return EXIT_OK


def cmd_crossval(args) -> int:
    hidden, units, dropout = _resolve_arch(args)
    train_ds, val_ds, _ = _load_and_split(args)
    pool = concat_datasets(train_ds, val_ds, name="cv-pool")
    specs = make_specs(hidden, units, dropout)
    cfg = _train_config(args)
    jobs = args.jobs if args.jobs is not None else min(args.k, os.cpu_count() or 1)
    report = cross_validate(
        pool, specs, args.k, cfg, seed=shift_seed(args.seed, 3), jobs=jobs
    )
    if args.report_out:
        write_cv_csv(report, args.report_out)
    for fold in range(report.k):
        print(
            f"fold {fold}: final_val_mae={report.per_fold_final_val_mae[fold]:.6f} "
            f"best_val_mae={report.per_fold_best_val_mae[fold]:.6f}"
        )
    print(
        f"mean_val_mae={report.mean_val_mae:.6f} std_val_mae={report.std_val_mae:.6f}"
    )
    return EXIT_OK


def cmd_evaluate(args) -> int:
    net, norm, _ = load_model(args.model)
    test_ds = load_csv(args.data)
    print(f"mae_pct={evaluate(net, norm, test_ds):.6f}")
    return EXIT_OK


def cmd_predict(args) -> int:
    net, norm, _ = load_model(args.model)
    dataset = load_features_csv(args.data)
    soc = predict_soc(net, norm, dataset)
    write_predictions_csv(time_vector(dataset), soc, args.out)
    print(f"wrote {len(soc)} predictions to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="socdfn",
        description="Feedforward-network training engine for battery "
        "state-of-charge regression on drive-cycle CSVs.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"socdfn {__version__}")
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="log progress to stderr"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="synthesize a labeled drive-cycle CSV")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--duration", type=float, default=20000.0, help="cycle seconds")
    p.add_argument("--dt", type=float, default=1.0, help="step seconds")
    p.add_argument("--peak", type=float, default=1.0, help="peak discharge amperes")
    p.add_argument("--regen-fraction", type=float, default=0.1)
    p.add_argument("--soc0", type=float, default=100.0, help="starting SOC percent")
    p.add_argument("--capacity", type=float, default=2.9, help="cell ampere-hours")
    p.add_argument("--r-internal", type=float, default=0.05, help="ohms")
    p.add_argument("--ambient", type=float, default=25.0, help="degrees Celsius")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="fit one network on a holdout split")
    p.add_argument("--data", required=True, help="labeled drive-cycle CSV")
    _add_arch_args(p)
    _add_train_args(p)
    p.add_argument("--model-out", help="write the trained model JSON here")
    p.add_argument("--history-out", help="write the per-epoch learning-curve CSV here")
    p.add_argument(
        "--emit-gnuplot",
        action="store_true",
        help="also write <history-out>.gnuplot plotting the curves",
    )
    p.add_argument("--save-train", help="write the train split back out as CSV")
    p.add_argument("--save-val", help="write the val split back out as CSV")
    p.add_argument("--save-test", help="write the test split back out as CSV")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("crossval", help="K-fold cross-validation")
    p.add_argument("--data", required=True, help="labeled drive-cycle CSV")
    p.add_argument("--k", type=int, required=True, help="fold count (e.g. 4 or 8)")
    _add_arch_args(p)
    _add_train_args(p)
    p.add_argument("--report-out", help="write the per-fold report CSV here")
    p.add_argument(
        "--jobs", type=int, help="parallel fold workers (default: k capped at CPUs)"
    )
    p.set_defaults(func=cmd_crossval)

    p = sub.add_parser("evaluate", help="test MAE of a saved model on a labeled CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="write clamped SOC predictions for a feature CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True, help="feature CSV (soc column optional)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except SocdfnError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
