#!/usr/bin/env python3
"""
Parity benchmark command line

Subcommands:
- instance: Build one instance and describe it
- run: Run chosen models on one instance
- sweep: Reference sweep over betas and seeds
- ablate-band: Fixed-beta grid over band parameters
- nsweep: Fixed-beta sweep over register widths
- summarize / export: Tables and files from the result store
"""

import argparse
import json
import logging
import os
import sys

import pandas as pd

from . import __version__
from .benchmark import BenchmarkConfig, make_instance, score_level_marginal
from .config import Config
from .errors import ParityBenchError
from .harness import (
    ResultStore,
    SweepRunner,
    SweepSpec,
    export,
    run_instance,
    summarize,
)
from .harness.runner import RunSettings
from .trainer import OptimizerConfig

logger = logging.getLogger('parity_bench.app')

CONFIG_KEYS = Config.keys()


def _common_parser():
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--n", type=int, help="register width")
    parser.add_argument("--m", type=int, help="training sample size")
    parser.add_argument("--tau", type=float, help="high-value quantile")
    parser.add_argument("--models", nargs="+", help="model names")
    parser.add_argument("--budgets", nargs="+", type=int, help="sample budgets Q")
    parser.add_argument("--steps", type=int, help="Adam steps")
    parser.add_argument("--learning-rate", type=float, dest="learning_rate")
    parser.add_argument("--init-scale", type=float, dest="init_scale")
    parser.add_argument("--workers", type=int, help="worker processes")
    parser.add_argument("--out", dest="out_dir", help="output directory")
    return parser


def build_parser():
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="parity-bench",
        description="Exact benchmark for parity supervision in IQP Born machines",
    )
    parser.add_argument("--config", help="YAML file overriding the defaults")
    parser.add_argument("--log-level", dest="log_level", help="logging level")
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)

    for name in ("instance", "run"):
        sub = commands.add_parser(name, parents=[common])
        sub.add_argument("--beta", type=float, default=0.9)
        sub.add_argument("--seed", type=int, default=Config.SEEDS[0])
        sub.add_argument("--sigma", type=float)
        sub.add_argument("--K", type=int, dest="K")
        if name == "instance":
            sub.add_argument("--json", action="store_true", help="print the record")

    sweep = commands.add_parser("sweep", parents=[common])
    sweep.add_argument("--betas", nargs="+", type=float)
    sweep.add_argument("--seeds", nargs="+", type=int)
    sweep.add_argument("--sigma", type=float)
    sweep.add_argument("--K", type=int, dest="K")

    ablate = commands.add_parser("ablate-band", parents=[common])
    ablate.add_argument("--beta", type=float, dest="ablation_beta")
    ablate.add_argument("--seeds", nargs="+", type=int)
    ablate.add_argument("--sigmas", nargs="+", type=float)
    ablate.add_argument("--Ks", nargs="+", type=int, dest="Ks")

    nsweep = commands.add_parser("nsweep", parents=[common])
    nsweep.add_argument("--beta", type=float, dest="nsweep_beta")
    nsweep.add_argument("--seeds", nargs="+", type=int)
    nsweep.add_argument("--sizes", nargs="+", type=int)

    summary = commands.add_parser("summarize", parents=[common])
    summary.add_argument("--grouping", nargs="+", help="summary tables to show")

    exporter = commands.add_parser("export", parents=[common])
    exporter.add_argument("--format", dest="fmt", default="all",
                          choices=("all", "jsonl", "csv"))
    exporter.add_argument("--dest", help="export directory")
    return parser


def load_config(args):
    """Defaults, then the config file, then command-line flags."""
    config = Config.from_file(args.config) if args.config else Config()
    flags = {k: v for k, v in vars(args).items() if k.lower() in CONFIG_KEYS}
    return config.update(flags)


def _optimizer(config):
    return OptimizerConfig(
        learning_rate=config.LEARNING_RATE,
        steps=config.STEPS,
        beta1=config.BETA1,
        beta2=config.BETA2,
        epsilon=config.EPSILON,
    )


def _spec(config, **overrides):
    values = dict(
        betas=config.BETAS,
        seeds=config.SEEDS,
        n=config.N,
        bands=((config.SIGMA, config.K),),
        models=config.MODELS,
        budgets=config.BUDGETS,
        m=config.M,
        tau=config.TAU,
        optimizer=_optimizer(config),
        init_scale=config.INIT_SCALE,
    )
    values.update(overrides)
    return SweepSpec(**values)


def _benchmark_config(config, args):
    return BenchmarkConfig(
        n=config.N, beta=args.beta, seed=args.seed, m=config.M,
        sigma=config.SIGMA, K=config.K, tau=config.TAU,
    )


def _ablation_bands(config):
    """Reference band first, then the rest of the grid."""
    grid = [(s, k) for s in config.SIGMAS for k in config.KS]
    reference = (config.SIGMA, config.K)
    return tuple([reference] + [band for band in grid if band != reference])


class BenchmarkApp:
    """
    Runs one CLI command against the configured result store.
    """

    def __init__(self, config):
        self.config = config
        self.store = ResultStore(config.store_path)
        self.runners = []

    def _sweep(self, spec):
        runner = SweepRunner(spec, self.store, self.config.WORKERS)
        runner.setup_signal_handlers()
        self.runners.append(runner)
        return runner.run()

    def instance(self, args):
        instance = make_instance(_benchmark_config(self.config, args))
        record = instance.to_record()
        record["target_score_levels"] = score_level_marginal(instance.target).tolist()
        if args.json:
            print(json.dumps(record, indent=2))
        logger.info(
            "Instance %s: |O|=%s |U|=%s |H|=%s |E|=%s threshold=%s",
            instance.config.identity(), instance.observed.size,
            instance.unobserved.size, instance.high_value.size,
            instance.unseen_elite.size, instance.threshold,
        )
        return record

    def run(self, args):
        instance = make_instance(_benchmark_config(self.config, args))
        settings = RunSettings(
            optimizer=_optimizer(self.config),
            budgets=self.config.BUDGETS,
            init_scale=self.config.INIT_SCALE,
        )
        records = run_instance(instance, self.config.MODELS, settings)
        for record in records:
            if record.key not in self.store:
                self.store.append(record)
            kl = record.metrics["kl"] if record.metrics else float("nan")
            logger.info("%-24s %-8s KL=%.4f", record.model, record.status, kl)
        return records

    def sweep(self, args):
        return self._sweep(_spec(self.config))

    def ablate_band(self, args):
        spec = _spec(
            self.config,
            betas=(self.config.ABLATION_BETA,),
            bands=_ablation_bands(self.config),
        )
        return self._sweep(spec)

    def nsweep(self, args):
        stats = []
        for n in self.config.SIZES:
            spec = _spec(self.config, n=n, betas=(self.config.NSWEEP_BETA,))
            stats.append(self._sweep(spec))
            if any(r.shutdown_event.is_set() for r in self.runners):
                break
        return stats

    def summarize(self, args):
        tables = summarize(self.store.records(), grouping=args.grouping)
        with pd.option_context("display.width", 160,
                               "display.max_columns", None):
            for name, table in tables.items():
                print(f"== {name}")
                print(table.to_string(index=False))
        return tables

    def export(self, args):
        dest = args.dest or os.path.join(self.config.OUT_DIR, "export")
        return export(self.store.records(), dest, args.fmt)


def main(argv=None):
    """Main entry point."""
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
    except ParityBenchError as e:
        print(f"parity-bench: {e}", file=sys.stderr)
        return 2

    logging.basicConfig(
        level=config.LOG_LEVEL.upper(),
        format='[%(asctime)s] [%(levelname)s] [%(name)s] %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )
    logger.debug("%r", config)

    try:
        app = BenchmarkApp(config)
        getattr(app, args.command.replace("-", "_"))(args)
    except ParityBenchError as e:
        logger.error("Command %s failed: %s", args.command, e, exc_info=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
