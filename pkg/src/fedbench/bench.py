"""Benchmark orchestration: comparison runs, heatmap grids, repeat
averaging and %-change normalization.

Every grid cell is a pure function of (config, row, col, repeat): its
seed is an FNV-1a hash of those coordinates, so cells can run in any
order or process and still reproduce byte-identical reports.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .data import Dataset, SplitPair, generate_synthetic, load_csv, split_train_test
from .ensemble import evaluate_ensemble, train_bagging
from .ensemble import member_seed as bench_member_seed
from .federation import run_federation
from .model import ModelConfig, TrainConfig
from .partition import (
    AdditionPlan,
    MixingConfig,
    Partition,
    apply_gaussian_mixing,
    partition_combined,
    partition_entity,
    partition_iid,
    partition_quantity_skew,
    partition_addition,
)
from .rng import fnv1a64

MIXING_LEVELS = [i / 8 for i in range(9)]
DEFAULT_CLIENT_COUNTS = [2, 4, 8, 16, 32]
DEFAULT_DOMINANT_SHARES = [0.9, 0.75, 0.6, 0.45, 0.3]
STRATEGIES = ("iid", "entity_protein", "entity_drug", "combined", "quantity", "addition")


class ConfigError(ValueError):
    """Invalid experiment configuration (bad JSON, unknown keys...)."""


def _check_keys(mapping: dict, allowed: set[str], where: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")


@dataclass
class ExperimentConfig:
    """Full description of one benchmark run (see docs/config schema)."""

    dataset: dict
    strategy: str
    rounds: int
    base_seed: int
    test_fraction: float = 0.2
    client_counts: list[int] = field(default_factory=lambda: list(DEFAULT_CLIENT_COUNTS))
    noniid_dim: str = "protein"
    mixing_levels: list[float] = field(default_factory=lambda: list(MIXING_LEVELS))
    sigma: float | None = None  # default K/4, resolved per client count
    dominant_shares: list[float] = field(
        default_factory=lambda: list(DEFAULT_DOMINANT_SHARES)
    )
    sigma_q: float | None = None  # default (K-1)/4
    addition_dominant_share: float = 0.6
    extra_shares: list[float] = field(default_factory=lambda: [0.1, 0.2, 0.3, 0.4])
    extra_client_counts: list[int] = field(default_factory=lambda: [1, 2, 3, 4])
    model: dict = field(
        default_factory=lambda: {"kind": "two_tower_mlp", "embedding_dim": 8, "hidden_dim": 16}
    )
    train: dict = field(
        default_factory=lambda: {"epochs": 1, "learning_rate": 0.05, "batch_size": 64}
    )
    repeats: int = 10

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}")
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        if not self.client_counts:
            raise ConfigError("client_counts must be non-empty")
        if self.noniid_dim not in ("protein", "drug"):
            raise ConfigError("noniid_dim must be 'protein' or 'drug'")
        _check_keys(self.model, {"kind", "embedding_dim", "hidden_dim"}, "model")
        _check_keys(self.train, {"epochs", "learning_rate", "batch_size"}, "train")
        if set(self.dataset) == {"path"}:
            pass
        elif set(self.dataset) == {"synthetic"}:
            _check_keys(
                self.dataset["synthetic"],
                {"n_drugs", "n_proteins", "n_records", "latent_dim", "noise_sd", "seed"},
                "dataset.synthetic",
            )
        else:
            raise ConfigError("dataset must have exactly one of 'path' or 'synthetic'")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        allowed = {f for f in cls.__dataclass_fields__}
        _check_keys(raw, allowed, "config")
        try:
            return cls(**raw)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc))

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}")
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "strategy": self.strategy,
            "rounds": self.rounds,
            "base_seed": self.base_seed,
            "test_fraction": self.test_fraction,
            "client_counts": self.client_counts,
            "noniid_dim": self.noniid_dim,
            "mixing_levels": self.mixing_levels,
            "sigma": self.sigma,
            "dominant_shares": self.dominant_shares,
            "sigma_q": self.sigma_q,
            "addition_dominant_share": self.addition_dominant_share,
            "extra_shares": self.extra_shares,
            "extra_client_counts": self.extra_client_counts,
            "model": self.model,
            "train": self.train,
            "repeats": self.repeats,
        }


@dataclass
class GridCell:
    row_key: float
    col_key: float
    repeats: int
    mean_mse: float
    std_mse: float
    pct_change: float


@dataclass
class RepeatEntry:
    row_key: float
    col_key: float
    repeat: int
    seed: int
    final_mse: float


@dataclass
class GridReport:
    setup: str
    cells: list[GridCell]
    reference_cell: tuple[float, float]
    repeat_log: list[RepeatEntry]
    provenance: dict


@dataclass
class ComparisonRow:
    distribution: str
    client_count: int
    ensemble_mse: float
    federated_mse: float
    pct_difference: float


@dataclass
class ComparisonReport:
    rows: list[ComparisonRow]
    provenance: dict


def pct_difference(fed_mse: float, ens_mse: float) -> float:
    """Percentage change of the federated MSE relative to the ensemble."""
    if ens_mse <= 0:
        raise ValueError("ensemble MSE must be positive")
    return 100.0 * (fed_mse - ens_mse) / ens_mse


def cell_seed(base_seed: int, strategy: str, row_key, col_key, repeat: int) -> int:
    return fnv1a64(base_seed, strategy, row_key, col_key, repeat)


def load_dataset(cfg: ExperimentConfig) -> Dataset:
    if "path" in cfg.dataset:
        return load_csv(cfg.dataset["path"])
    spec = dict(cfg.dataset["synthetic"])
    spec.setdefault("seed", fnv1a64(cfg.base_seed, "synthetic"))
    return generate_synthetic(
        n_drugs=spec["n_drugs"],
        n_proteins=spec["n_proteins"],
        n_records=spec["n_records"],
        latent_dim=spec.get("latent_dim", 8),
        noise_sd=spec.get("noise_sd", 0.1),
        seed=spec["seed"],
    )


def build_split(cfg: ExperimentConfig, ds: Dataset) -> SplitPair:
    # one fixed split per config, shared by every cell
    return split_train_test(ds, cfg.test_fraction, fnv1a64(cfg.base_seed, "split"))


def model_config(cfg: ExperimentConfig, ds: Dataset) -> ModelConfig:
    return ModelConfig(
        kind=cfg.model.get("kind", "two_tower_mlp"),
        embedding_dim=cfg.model.get("embedding_dim", 8),
        hidden_dim=cfg.model.get("hidden_dim", 16),
        n_drugs=ds.n_drugs,
        n_proteins=ds.n_proteins,
    )


def train_config(cfg: ExperimentConfig, seed: int) -> TrainConfig:
    return TrainConfig(
        epochs=cfg.train.get("epochs", 1),
        learning_rate=cfg.train.get("learning_rate", 0.05),
        batch_size=cfg.train.get("batch_size", 64),
        seed=seed,
    )


def build_partition(
    cfg: ExperimentConfig, train_view, strategy: str, row_key, col_key, seed: int
) -> Partition:
    """The partition for one grid/comparison cell."""
    if strategy == "iid":
        return partition_iid(train_view, int(row_key), seed)
    if strategy in ("entity_protein", "entity_drug"):
        k = int(row_key)
        dim = strategy.split("_", 1)[1]
        base = partition_entity(train_view, k, dim, seed)
        sigma = cfg.sigma if cfg.sigma is not None else max(k / 4.0, 1e-9)
        return apply_gaussian_mixing(
            base, MixingConfig(level=float(col_key), sigma=sigma, seed=seed)
        )
    if strategy == "combined":
        k = int(row_key)
        sigma = cfg.sigma if cfg.sigma is not None else max(k / 4.0, 1e-9)
        return partition_combined(
            train_view, k, MixingConfig(level=float(col_key), sigma=sigma, seed=seed), seed
        )
    if strategy == "quantity":
        k = int(row_key)
        sigma_q = cfg.sigma_q if cfg.sigma_q is not None else max((k - 1) / 4.0, 1e-9)
        return partition_quantity_skew(train_view, k, float(col_key), sigma_q, seed)
    if strategy == "addition":
        plan = AdditionPlan(
            dominant_share=cfg.addition_dominant_share,
            extra_share=float(col_key),
            n_extra_clients=int(row_key),
        )
        return partition_addition(train_view, plan, seed)
    raise ConfigError(f"unknown strategy {strategy!r}")


# Worker-side cache: datasets and splits are deterministic functions of the
# config, so each process rebuilds them once and reuses them across cells.
_SPLIT_CACHE: dict = {}


def _cached_setup(cfg_dict: dict):
    key = json.dumps(cfg_dict, sort_keys=True)
    if key not in _SPLIT_CACHE:
        cfg = ExperimentConfig.from_dict(cfg_dict)
        ds = load_dataset(cfg)
        _SPLIT_CACHE[key] = (cfg, ds, build_split(cfg, ds), model_config(cfg, ds))
    return _SPLIT_CACHE[key]


def _grid_cell_worker(args):
    """Run one federated grid cell; returns its RepeatEntry fields."""
    cfg_dict, strategy, row_key, col_key, repeat = args
    cfg, ds, split, mcfg = _cached_setup(cfg_dict)
    seed = cell_seed(cfg.base_seed, strategy, row_key, col_key, repeat)
    partition = build_partition(
        cfg, split.train, strategy, row_key, col_key, fnv1a64(seed, "partition")
    )
    tcfg = train_config(cfg, fnv1a64(seed, "train"))
    result = run_federation(
        split, partition, mcfg, tcfg, cfg.rounds, fnv1a64(seed, "model")
    )
    return (row_key, col_key, repeat, seed, result.history[-1][1])


def _comparison_cell_worker(args):
    """Run one federated + one bagging pipeline on the same partition."""
    cfg_dict, strategy, client_count, distribution, repeat = args
    cfg, ds, split, mcfg = _cached_setup(cfg_dict)
    seed = cell_seed(cfg.base_seed, "comparison", client_count, distribution, repeat)
    if distribution == "iid":
        partition = partition_iid(split.train, client_count, fnv1a64(seed, "partition"))
    else:
        partition = partition_entity(
            split.train, client_count, cfg.noniid_dim, fnv1a64(seed, "partition")
        )
    tcfg = train_config(cfg, fnv1a64(seed, "train"))
    # the federated init shares member 0's seed so that at K=1 both
    # pipelines are the same centralized computation, bit for bit
    ens_seed = fnv1a64(seed, "ensemble")
    fed = run_federation(
        split, partition, mcfg, tcfg, cfg.rounds, bench_member_seed(ens_seed, 0)
    )
    total_epochs = cfg.rounds * tcfg.epochs
    ens = train_bagging(split, partition, mcfg, tcfg, total_epochs, ens_seed)
    return (
        distribution,
        client_count,
        repeat,
        seed,
        fed.history[-1][1],
        evaluate_ensemble(ens, split.test),
        partition.provenance_hash(),
    )


def _run_jobs(worker, jobs, workers: int):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(worker, jobs))
    return [worker(j) for j in jobs]


def _assemble_grid(
    setup: str,
    results,
    reference: tuple[float, float],
    provenance: dict,
    row_order,
    col_order,
) -> GridReport:
    results = sorted(results, key=lambda r: (row_order.index(r[0]), col_order.index(r[1]), r[2]))
    log = [RepeatEntry(*r) for r in results]
    by_cell: dict[tuple, list[float]] = {}
    seeds_seen = set()
    for entry in log:
        by_cell.setdefault((entry.row_key, entry.col_key), []).append(entry.final_mse)
        seeds_seen.add(entry.seed)
    ref_mean = float(np.mean(by_cell[reference]))
    cells = []
    for row in row_order:
        for col in col_order:
            if (row, col) not in by_cell:
                continue
            mses = by_cell[(row, col)]
            mean = float(np.mean(mses))
            cells.append(
                GridCell(
                    row_key=row,
                    col_key=col,
                    repeats=len(mses),
                    mean_mse=mean,
                    std_mse=float(np.std(mses)),
                    pct_change=100.0 * (mean - ref_mean) / ref_mean,
                )
            )
    return GridReport(setup, cells, reference, log, provenance)


def run_iidness_grid(cfg: ExperimentConfig, workers: int = 1) -> GridReport:
    """Client count x mixing level heatmap for the entity strategies."""
    if cfg.strategy not in ("entity_protein", "entity_drug", "combined"):
        raise ConfigError(f"iidness grid needs an entity strategy, got {cfg.strategy!r}")
    rows = sorted(cfg.client_counts)
    cols = list(cfg.mixing_levels)
    cfg_dict = cfg.to_dict()
    jobs = [
        (cfg_dict, cfg.strategy, k, level, rep)
        for k in rows
        for level in cols
        for rep in range(cfg.repeats)
    ]
    results = _run_jobs(_grid_cell_worker, jobs, workers)
    reference = (rows[0], cols[0])
    return _assemble_grid(
        cfg.strategy, results, reference, {"config": cfg_dict}, rows, cols
    )


def run_quantity_grid(cfg: ExperimentConfig, workers: int = 1) -> GridReport:
    """Client count x dominant share heatmap; reference is the smallest
    client count at the highest concentration."""
    if cfg.strategy != "quantity":
        raise ConfigError("quantity grid needs strategy 'quantity'")
    rows = sorted(cfg.client_counts)
    cols = sorted(cfg.dominant_shares, reverse=True)
    cfg_dict = cfg.to_dict()
    jobs = [
        (cfg_dict, "quantity", k, share, rep)
        for k in rows
        for share in cols
        for rep in range(cfg.repeats)
    ]
    results = _run_jobs(_grid_cell_worker, jobs, workers)
    reference = (rows[0], cols[0])
    return _assemble_grid("quantity", results, reference, {"config": cfg_dict}, rows, cols)


def run_addition_grid(cfg: ExperimentConfig, workers: int = 1) -> GridReport:
    """Extra-client count x extra-share grid, normalized against the
    dominant-client-only run (row 0, col 0.0)."""
    if cfg.strategy != "addition":
        raise ConfigError("addition grid needs strategy 'addition'")
    rows = [0] + sorted(cfg.extra_client_counts)
    cols = [0.0] + sorted(cfg.extra_shares)
    cfg_dict = cfg.to_dict()
    jobs = [(cfg_dict, "addition", 0, 0.0, rep) for rep in range(cfg.repeats)]
    jobs += [
        (cfg_dict, "addition", n_extra, share, rep)
        for n_extra in rows[1:]
        for share in cols[1:]
        for rep in range(cfg.repeats)
    ]
    results = _run_jobs(_grid_cell_worker, jobs, workers)
    return _assemble_grid(
        "addition", results, (0, 0.0), {"config": cfg_dict}, rows, cols
    )


def run_grid(cfg: ExperimentConfig, workers: int = 1) -> GridReport:
    if cfg.strategy == "quantity":
        return run_quantity_grid(cfg, workers)
    if cfg.strategy == "addition":
        return run_addition_grid(cfg, workers)
    if cfg.strategy == "iid":
        raise ConfigError("heatmap grids need a non-IID strategy; use `compare` for IID")
    return run_iidness_grid(cfg, workers)


def run_comparison(cfg: ExperimentConfig, workers: int = 1) -> ComparisonReport:
    """Federated vs bagging on identical partitions, per client count
    and distribution, averaged over repeats."""
    cfg_dict = cfg.to_dict()
    jobs = [
        (cfg_dict, cfg.strategy, k, dist, rep)
        for dist in ("iid", "noniid")
        for k in sorted(cfg.client_counts)
        for rep in range(cfg.repeats)
    ]
    results = _run_jobs(_comparison_cell_worker, jobs, workers)
    by_cell: dict[tuple, list] = {}
    hashes: dict[str, int] = {}
    for dist, k, rep, seed, fed_mse, ens_mse, phash in sorted(
        results, key=lambda r: (r[0], r[1], r[2])
    ):
        by_cell.setdefault((dist, k), []).append((fed_mse, ens_mse))
        hashes[f"{dist}/{k}/{rep}"] = phash
    rows = []
    for dist in ("iid", "noniid"):
        for k in sorted(cfg.client_counts):
            pairs = by_cell[(dist, k)]
            fed = float(np.mean([p[0] for p in pairs]))
            ens = float(np.mean([p[1] for p in pairs]))
            rows.append(ComparisonRow(dist, k, ens, fed, pct_difference(fed, ens)))
    return ComparisonReport(
        rows, {"config": cfg_dict, "partition_hashes": hashes, "noniid_dim": cfg.noniid_dim}
    )
