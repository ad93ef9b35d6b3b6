"""In-process FedAvg engine.

Each round every client runs local SGD from the current global
parameters, then the server takes the sample-count-weighted average and
evaluates the result on the shared test set. Clients are stateless
between rounds and their shuffle streams are keyed by
(seed, round, client), so sequential and concurrent execution produce
identical results.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .data import SplitPair
from .model import (
    ModelConfig,
    ParameterVector,
    TrainConfig,
    evaluate_mse,
    init_model,
    sgd_train,
)
from .partition import Partition
from .rng import fnv1a64


class FederationError(ValueError):
    """Invalid federation setup or aggregation input."""


@dataclass
class ClientUpdate:
    params: ParameterVector
    n_samples: int
    client_id: int


@dataclass
class FedResult:
    final_params: ParameterVector
    history: list[tuple[int, float]]
    config_echo: dict


def local_seed(base_seed: int, round_idx: int, client_id: int) -> int:
    """Shuffle-stream key for one client's local training in one round."""
    return fnv1a64(base_seed, "local", round_idx, client_id)


def local_update(
    global_params: ParameterVector,
    client_data,
    mcfg: ModelConfig,
    tcfg: TrainConfig,
    round_idx: int,
    client_id: int,
) -> ClientUpdate:
    """One client's round: local SGD from a copy of the global model.

    Empty clients return the global parameters unchanged with zero
    weight.
    """
    n = len(client_data)
    if n == 0:
        return ClientUpdate(global_params.copy(), 0, client_id)
    t = replace(tcfg, seed=local_seed(tcfg.seed, round_idx, client_id))
    trained = sgd_train(global_params, mcfg, t, client_data)
    return ClientUpdate(trained, n, client_id)


def fedavg_aggregate(updates: list[ClientUpdate]) -> ParameterVector:
    """Sample-count-weighted mean of client parameters.

    Zero-sample updates are excluded. The sum is anchored at the first
    contributing client (result = p0 + sum_k w_k (p_k - p0)), so a
    federation of identical updates aggregates to those parameters
    bit-exactly. Accumulation runs in ascending client id order for
    reproducibility.
    """
    contributing = sorted(
        (u for u in updates if u.n_samples > 0), key=lambda u: u.client_id
    )
    if not contributing:
        raise FederationError("no update contributed any samples")
    first = contributing[0]
    for u in contributing[1:]:
        if not first.params.same_layout(u.params):
            raise FederationError("client updates have mismatched parameter layouts")
    total = sum(u.n_samples for u in contributing)
    acc = first.params.values.copy()
    for u in contributing[1:]:
        acc += (u.n_samples / total) * (u.params.values - first.params.values)
    return ParameterVector(acc, list(first.params.layout))


def run_federation(
    split: SplitPair,
    partition: Partition,
    mcfg: ModelConfig,
    tcfg: TrainConfig,
    rounds: int,
    seed: int,
    workers: int = 1,
) -> FedResult:
    """Synchronous FedAvg rounds with full client participation."""
    if rounds < 0:
        raise FederationError("rounds must be non-negative")
    if len(split.train) == 0:
        raise FederationError("cannot federate an empty train set")
    client_data = [split.train.take(idx) for idx in partition.assignments]
    params = init_model(mcfg, seed)
    history: list[tuple[int, float]] = []

    def one_client(args):
        c, data = args
        return local_update(params, data, mcfg, tcfg, round_idx, c)

    for round_idx in range(rounds):
        jobs = list(enumerate(client_data))
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                updates = list(pool.map(one_client, jobs))
        else:
            updates = [one_client(j) for j in jobs]
        params = fedavg_aggregate(updates)
        history.append((round_idx, evaluate_mse(params, mcfg, split.test)))

    return FedResult(
        final_params=params,
        history=history,
        config_echo={
            "rounds": rounds,
            "seed": seed,
            "n_clients": partition.n_clients,
            "partition": partition.provenance,
            "train": {
                "epochs": tcfg.epochs,
                "learning_rate": tcfg.learning_rate,
                "batch_size": tcfg.batch_size,
                "seed": tcfg.seed,
            },
            "model": {
                "kind": mcfg.kind,
                "embedding_dim": mcfg.embedding_dim,
                "hidden_dim": mcfg.hidden_dim,
                "n_drugs": mcfg.n_drugs,
                "n_proteins": mcfg.n_proteins,
            },
        },
    )


def write_history(history: list[tuple[int, float]], path) -> None:
    """Per-round global test MSE as `round,global_mse`."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["round", "global_mse"])
        for round_idx, mse in history:
            writer.writerow([round_idx, format(mse, ".17g")])
