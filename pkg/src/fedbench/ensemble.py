"""Bagging baseline: independent per-client models combined by mean
prediction, trained on exactly the same partitions as the federated
runs so the two pipelines stay comparable.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace

import numpy as np

from .data import SplitPair
from .model import (
    ModelConfig,
    ParameterVector,
    TrainConfig,
    init_model,
    load_params,
    predict_batch,
    save_params,
    sgd_train,
)
from .partition import Partition
from .rng import fnv1a64


class EnsembleError(ValueError):
    """Invalid ensemble construction or evaluation."""


@dataclass
class EnsembleModel:
    members: list[ParameterVector]
    mcfg: ModelConfig

    def __post_init__(self):
        if not self.members:
            raise EnsembleError("an ensemble needs at least one member")
        for m in self.members[1:]:
            if not self.members[0].same_layout(m):
                raise EnsembleError("ensemble members have mismatched layouts")


def member_seed(seed: int, client_id: int) -> int:
    return fnv1a64(seed, "member", client_id)


def train_bagging(
    split: SplitPair,
    partition: Partition,
    mcfg: ModelConfig,
    tcfg: TrainConfig,
    total_epochs: int,
    seed: int,
) -> EnsembleModel:
    """One independently initialized member per non-empty client.

    Member k trains for total_epochs in chunks of tcfg.epochs whose
    shuffle streams are keyed like federated local rounds; with matched
    seeds, a single-client ensemble is therefore bit-identical to the
    single-client federation it is compared against.
    """
    if total_epochs <= 0:
        raise EnsembleError("total_epochs must be positive")
    from .federation import local_seed

    members = []
    for client_id, idx in enumerate(partition.assignments):
        if len(idx) == 0:
            continue
        params = init_model(mcfg, member_seed(seed, client_id))
        data = split.train.take(idx)
        done = 0
        chunk = 0
        while done < total_epochs:
            epochs = min(tcfg.epochs, total_epochs - done)
            t = replace(
                tcfg, epochs=epochs, seed=local_seed(tcfg.seed, chunk, client_id)
            )
            params = sgd_train(params, mcfg, t, data)
            done += epochs
            chunk += 1
        members.append(params)
    if not members:
        raise EnsembleError("every client is empty; nothing to train")
    return EnsembleModel(members, mcfg)


def predict_ensemble_batch(e: EnsembleModel, d_idx, p_idx) -> np.ndarray:
    preds = [predict_batch(m, e.mcfg, d_idx, p_idx) for m in e.members]
    return np.mean(np.stack(preds, axis=0), axis=0)


def predict_ensemble(e: EnsembleModel, drug_idx: int, protein_idx: int) -> float:
    return float(predict_ensemble_batch(e, [drug_idx], [protein_idx])[0])


def evaluate_ensemble(e: EnsembleModel, data) -> float:
    """MSE of the mean prediction over ``data``."""
    if len(data) == 0:
        raise EnsembleError("cannot evaluate on an empty dataset")
    yhat = predict_ensemble_batch(e, data.drug_idx, data.protein_idx)
    return float(np.mean((yhat - data.labels) ** 2))


def save_ensemble(e: EnsembleModel, out_dir) -> None:
    """Member checkpoints plus a JSON manifest."""
    os.makedirs(out_dir, exist_ok=True)
    names = []
    for i, m in enumerate(e.members):
        name = f"member_{i:04d}.params"
        save_params(m, os.path.join(out_dir, name))
        names.append(name)
    manifest = {
        "members": names,
        "model": {
            "kind": e.mcfg.kind,
            "embedding_dim": e.mcfg.embedding_dim,
            "hidden_dim": e.mcfg.hidden_dim,
            "n_drugs": e.mcfg.n_drugs,
            "n_proteins": e.mcfg.n_proteins,
        },
    }
    with open(os.path.join(out_dir, "ensemble.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_ensemble(out_dir) -> EnsembleModel:
    with open(os.path.join(out_dir, "ensemble.json"), encoding="utf-8") as fh:
        manifest = json.load(fh)
    mcfg = ModelConfig(**manifest["model"])
    members = [load_params(os.path.join(out_dir, n)) for n in manifest["members"]]
    return EnsembleModel(members, mcfg)
