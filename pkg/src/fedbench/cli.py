"""Command-line entry points for the benchmark.

Subcommands: synth, partition, fed, ensemble, compare, grid, report.
Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from . import bench, reports
from .bench import ConfigError, ExperimentConfig
from .data import generate_synthetic, load_csv, write_csv
from .ensemble import evaluate_ensemble, save_ensemble, train_bagging
from .federation import run_federation, write_history
from .model import save_params
from .partition import save_partition
from .rng import fnv1a64


class _Parser(argparse.ArgumentParser):
    # argument mistakes are configuration errors -> exit code 1
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="fedbench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="experiment config JSON")
        p.add_argument("--seed", type=int, default=None, help="override base_seed")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--workers", type=int, default=1, help="parallel worker count")

    p = sub.add_parser("synth", help="generate a synthetic dataset CSV")
    common(p)

    p = sub.add_parser("partition", help="write a partition manifest for one cell")
    common(p)
    p.add_argument("--client-count", type=int, default=None, help="override first client count")
    p.add_argument("--level", type=float, default=0.0, help="mixing level (entity strategies)")
    p.add_argument("--share", type=float, default=None, help="dominant/extra share column key")

    p = sub.add_parser("fed", help="run a single federated experiment")
    common(p)

    p = sub.add_parser("ensemble", help="train and evaluate the bagging baseline")
    common(p)

    p = sub.add_parser("compare", help="federated vs ensemble comparison table")
    common(p)

    p = sub.add_parser("grid", help="run a heatmap grid and write reports")
    common(p)

    p = sub.add_parser("report", help="re-aggregate grid.csv from a cells.csv log")
    common(p)
    p.add_argument("--cells", required=True, help="cells.csv produced by `grid`")
    return parser


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_json(args.config)
    if args.seed is not None:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "base_seed": args.seed})
    return cfg


def _cmd_synth(args) -> None:
    cfg = _load_config(args)
    if "synthetic" not in cfg.dataset:
        raise ConfigError("synth needs a config with a dataset.synthetic block")
    ds = bench.load_dataset(cfg)
    os.makedirs(args.out, exist_ok=True)
    write_csv(ds, os.path.join(args.out, "dataset.csv"))
    with open(os.path.join(args.out, "dataset.json"), "w", encoding="utf-8") as fh:
        json.dump(
            {
                "n_records": len(ds),
                "n_drugs": ds.n_drugs,
                "n_proteins": ds.n_proteins,
                "synthetic": cfg.dataset["synthetic"],
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")


def _cmd_partition(args) -> None:
    cfg = _load_config(args)
    ds = bench.load_dataset(cfg)
    split = bench.build_split(cfg, ds)
    k = args.client_count or cfg.client_counts[0]
    if cfg.strategy == "quantity":
        col = args.share if args.share is not None else cfg.dominant_shares[0]
        row = k
    elif cfg.strategy == "addition":
        col = args.share if args.share is not None else cfg.extra_shares[0]
        row = k
    elif cfg.strategy == "iid":
        row, col = k, 0.0
    else:
        row, col = k, args.level
    seed = bench.cell_seed(cfg.base_seed, cfg.strategy, row, col, 0)
    partition = bench.build_partition(
        cfg, split.train, cfg.strategy, row, col, fnv1a64(seed, "partition")
    )
    os.makedirs(args.out, exist_ok=True)
    save_partition(
        partition,
        os.path.join(args.out, "partition.csv"),
        os.path.join(args.out, "partition.json"),
    )


def _cmd_fed(args) -> None:
    cfg = _load_config(args)
    ds = bench.load_dataset(cfg)
    split = bench.build_split(cfg, ds)
    mcfg = bench.model_config(cfg, ds)
    seed = bench.cell_seed(cfg.base_seed, cfg.strategy, cfg.client_counts[0], 0.0, 0)
    partition = bench.build_partition(
        cfg, split.train, cfg.strategy, cfg.client_counts[0], 0.0, fnv1a64(seed, "partition")
    )
    tcfg = bench.train_config(cfg, fnv1a64(seed, "train"))
    result = run_federation(
        split, partition, mcfg, tcfg, cfg.rounds, fnv1a64(seed, "model"), workers=args.workers
    )
    os.makedirs(args.out, exist_ok=True)
    write_history(result.history, os.path.join(args.out, "history.csv"))
    save_params(result.final_params, os.path.join(args.out, "final.params"))
    with open(os.path.join(args.out, "result.json"), "w", encoding="utf-8") as fh:
        json.dump(
            {
                "final_mse": result.history[-1][1] if result.history else None,
                "config_echo": result.config_echo,
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")


def _cmd_ensemble(args) -> None:
    cfg = _load_config(args)
    ds = bench.load_dataset(cfg)
    split = bench.build_split(cfg, ds)
    mcfg = bench.model_config(cfg, ds)
    seed = bench.cell_seed(cfg.base_seed, cfg.strategy, cfg.client_counts[0], 0.0, 0)
    partition = bench.build_partition(
        cfg, split.train, cfg.strategy, cfg.client_counts[0], 0.0, fnv1a64(seed, "partition")
    )
    tcfg = bench.train_config(cfg, fnv1a64(seed, "train"))
    ens = train_bagging(
        split, partition, mcfg, tcfg, cfg.rounds * tcfg.epochs, fnv1a64(seed, "ensemble")
    )
    os.makedirs(args.out, exist_ok=True)
    save_ensemble(ens, args.out)
    with open(os.path.join(args.out, "mse.json"), "w", encoding="utf-8") as fh:
        json.dump(
            {
                "ensemble_mse": evaluate_ensemble(ens, split.test),
                "members": len(ens.members),
                "partition_hash": partition.provenance_hash(),
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")


def _cmd_compare(args) -> None:
    cfg = _load_config(args)
    report = bench.run_comparison(cfg, workers=args.workers)
    reports.write_reports(report, args.out)


def _cmd_grid(args) -> None:
    cfg = _load_config(args)
    report = bench.run_grid(cfg, workers=args.workers)
    reports.write_reports(report, args.out)


def _cmd_report(args) -> None:
    cfg = _load_config(args)
    with open(args.cells, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != reports.CELLS_HEADER:
            raise ConfigError(f"{args.cells}: bad header {header}")
        results = [
            (float(row), float(col), int(rep), int(seed), float(mse))
            for row, col, rep, seed, mse in reader
        ]
    if cfg.strategy == "quantity":
        rows = sorted({r[0] for r in results})
        cols = sorted({r[1] for r in results}, reverse=True)
        reference = (rows[0], cols[0])
    elif cfg.strategy == "addition":
        rows = sorted({r[0] for r in results})
        cols = sorted({r[1] for r in results})
        reference = (0.0, 0.0)
    else:
        rows = sorted({r[0] for r in results})
        cols = sorted({r[1] for r in results})
        reference = (rows[0], cols[0])
    report = bench._assemble_grid(
        cfg.strategy, results, reference, {"config": cfg.to_dict()}, rows, cols
    )
    reports.write_reports(report, args.out)


_COMMANDS = {
    "synth": _cmd_synth,
    "partition": _cmd_partition,
    "fed": _cmd_fed,
    "ensemble": _cmd_ensemble,
    "compare": _cmd_compare,
    "grid": _cmd_grid,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"fedbench: config error: {exc}", file=sys.stderr)
        return 1
    try:
        _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"fedbench: config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"fedbench: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
