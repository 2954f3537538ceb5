"""Command-line interface for the experiment harness.

Subcommands: ``train`` (one configuration), ``sweep-p``, ``sweep-k``,
``learning-curve``, ``table1``, and ``gradcheck``. Options override config
file values, which override defaults. Exit codes: 0 success, 2 config
error, 3 data error.
"""

from __future__ import annotations

import argparse
import sys

from .data import DataError
from .experiment import (
    AggregateResult,
    ConfigError,
    config_from_sources,
    gradcheck_suite,
    learning_curve,
    run_experiment,
    sweep_k,
    sweep_p,
    table1,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file")
    common.add_argument("--dataset", choices=["mnist", "fashion-mnist"])
    common.add_argument("--data-dir", dest="data_dir", help="directory with IDX files")
    common.add_argument("--arch", help="e.g. 784-10, 784-128-100-10, autoencoder")
    common.add_argument(
        "--strategy", choices=["none", "random", "kstarts", "dissipating", "combination"]
    )
    common.add_argument("--p", type=float, help="connectivity factor (fraction pruned)")
    common.add_argument("--k", type=int, help="k-starts population size")
    common.add_argument("--fitness", choices=["magnitude", "gradient", "sumgrad"])
    common.add_argument("--epsilon", type=float, help="dissipating-gradients threshold")
    common.add_argument("--active-epochs", dest="active_epochs", type=int)
    common.add_argument("--elimination-interval", dest="elimination_interval", type=int)
    common.add_argument("--iterations", type=int)
    common.add_argument("--epochs", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", dest="base_seed", type=int)
    common.add_argument("--batch-size", dest="batch_size", type=int)
    common.add_argument("--lr", dest="learning_rate", type=float)
    common.add_argument("--l1-lambda", dest="l1_lambda", type=float)
    common.add_argument("--train-samples", dest="train_samples", type=int)
    common.add_argument("--weight-init", dest="weight_init",
                        choices=["glorot_uniform", "normal", "uniform"])
    common.add_argument("--init-scale", dest="init_scale", type=float)
    common.add_argument("--workers", type=int)
    common.add_argument("--out", help="artifact directory (omit to skip artifacts)")
    return common


_CONFIG_KEYS = (
    "dataset", "data_dir", "arch", "strategy", "p", "k", "fitness", "epsilon",
    "active_epochs", "elimination_interval", "iterations", "epochs", "trials",
    "base_seed", "batch_size", "learning_rate", "l1_lambda", "train_samples",
    "weight_init", "init_scale", "workers",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsestart",
        description="Pruning-at-initialization experiments on sigmoid MLPs",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_options()

    sub.add_parser("train", parents=[common], help="run one experiment configuration")

    sp = sub.add_parser("sweep-p", parents=[common], help="sparsity sweep per strategy")
    sp.add_argument("--p-list", default="0.1,0.3,0.5,0.7,0.9,0.95")
    sp.add_argument("--strategies", default="random,kstarts,dissipating,combination")

    sk = sub.add_parser("sweep-k", parents=[common], help="k-starts population-size sweep")
    sk.add_argument("--k-list", default="1,10,50,100")

    lc = sub.add_parser("learning-curve", parents=[common],
                        help="accuracy vs training-set size (2500 iterations)")
    lc.add_argument("--n-list", default="1000,2000,5000,8000")
    lc.add_argument("--p-list", default="0.0,0.5")
    lc.set_defaults(iterations=2500)

    t1 = sub.add_parser("table1", parents=[common],
                        help="iterations x {dense, p=0.5 k-starts} accuracy grid")
    t1.add_argument("--iterations-list", default="10,100,1000,10000")
    t1.add_argument("--k-list", default="1,10,50,100")

    gc = sub.add_parser("gradcheck", help="finite-difference gradient verification")
    gc.add_argument("--seeds", type=int, default=20)
    return parser


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _print_aggregates(results: list[AggregateResult]) -> None:
    for agg in results:
        cfg = agg.config
        value = agg.mean_metric * 100.0 if agg.metric_kind == "accuracy" else agg.mean_metric
        std = agg.std_metric * 100.0 if agg.metric_kind == "accuracy" else agg.std_metric
        print(
            f"{cfg.strategy:<12} p={cfg.p:<5g} k={cfg.k:<4d} iter={cfg.iterations:<6d} "
            f"n={cfg.train_samples or 'full':<6} {agg.metric_kind}="
            f"{value:.2f} +- {std:.2f}  sparsity={agg.mean_sparsity:.3f}"
        )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "gradcheck":
        report = gradcheck_suite(num_seeds=args.seeds)
        print(
            f"gradcheck: {report['num_coords']} coordinates, "
            f"{report['fraction_within'] * 100:.2f}% within tolerance, "
            f"max error {report['max_error']:.3e}"
        )
        print("PASS" if report["passed"] else "FAIL")
        return EXIT_OK if report["passed"] else 1

    try:
        overrides = {key: getattr(args, key, None) for key in _CONFIG_KEYS}
        config = config_from_sources(args.config, overrides)
        config.validate()

        if args.command == "train":
            results = [run_experiment(config, out_dir=args.out)]
        elif args.command == "sweep-p":
            strategies = tuple(s.strip() for s in args.strategies.split(",") if s.strip())
            results = sweep_p(config, _floats(args.p_list), strategies, out_dir=args.out)
        elif args.command == "sweep-k":
            results = sweep_k(config, _ints(args.k_list), out_dir=args.out)
        elif args.command == "learning-curve":
            results = learning_curve(
                config, _ints(args.n_list), _floats(args.p_list), out_dir=args.out
            )
        elif args.command == "table1":
            results = table1(
                config,
                tuple(_ints(args.iterations_list)),
                tuple(_ints(args.k_list)),
                out_dir=args.out,
            )
        else:  # pragma: no cover - argparse enforces the choices
            raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA

    _print_aggregates(results)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
