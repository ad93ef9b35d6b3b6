"""Stateless regression models over (drug, protein) pairs.

Two kinds: a bilinear factorization (``linear``) and a two-tower MLP
with layer normalization (``two_tower_mlp``). Parameters live in a flat
float64 vector with a named layout, gradients are analytic (including
the layer-norm backward pass), and training is plain mini-batch SGD so
clients carry no optimizer state between rounds.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .rng import fnv1a64, stream

LAYER_NORM_EPS = 1e-5


class ModelError(ValueError):
    """Invalid model configuration or parameter vector."""


@dataclass
class ParameterVector:
    """Flat float64 parameters plus an ordered (name, shape) layout."""

    values: np.ndarray
    layout: list[tuple[str, tuple[int, ...]]]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.layout = [(name, tuple(shape)) for name, shape in self.layout]
        expected = sum(int(np.prod(shape)) for _, shape in self.layout)
        if expected != self.values.size:
            raise ModelError(
                f"layout describes {expected} values, vector holds {self.values.size}"
            )

    def copy(self) -> "ParameterVector":
        return ParameterVector(self.values.copy(), list(self.layout))

    def tensors(self) -> dict[str, np.ndarray]:
        """Reshaped views into the flat vector, keyed by tensor name."""
        out = {}
        offset = 0
        for name, shape in self.layout:
            size = int(np.prod(shape))
            out[name] = self.values[offset : offset + size].reshape(shape)
            offset += size
        return out

    def same_layout(self, other: "ParameterVector") -> bool:
        return self.layout == other.layout


@dataclass
class ModelConfig:
    kind: str
    embedding_dim: int
    n_drugs: int
    n_proteins: int
    hidden_dim: int = 0

    def __post_init__(self):
        if self.kind not in ("linear", "two_tower_mlp"):
            raise ModelError(f"unknown model kind {self.kind!r}")
        if self.embedding_dim <= 0 or self.n_drugs <= 0 or self.n_proteins <= 0:
            raise ModelError("embedding_dim and entity counts must be positive")
        if self.kind == "two_tower_mlp" and self.hidden_dim <= 0:
            raise ModelError("two_tower_mlp needs a positive hidden_dim")


@dataclass
class TrainConfig:
    epochs: int
    learning_rate: float
    batch_size: int
    seed: int

    def __post_init__(self):
        if self.epochs <= 0 or self.batch_size <= 0:
            raise ModelError("epochs and batch_size must be positive")
        if self.learning_rate < 0:
            raise ModelError("learning_rate must be non-negative")


def layout_for(cfg: ModelConfig) -> list[tuple[str, tuple[int, ...]]]:
    d = cfg.embedding_dim
    layout = [
        ("drug_embedding", (cfg.n_drugs, d)),
        ("protein_embedding", (cfg.n_proteins, d)),
    ]
    if cfg.kind == "linear":
        layout.append(("bias", (1,)))
    else:
        h = cfg.hidden_dim
        layout += [
            ("hidden_weight", (h, 3 * d)),
            ("hidden_bias", (h,)),
            ("norm_gain", (h,)),
            ("norm_bias", (h,)),
            ("output_weight", (h,)),
            ("output_bias", (1,)),
        ]
    return layout


def init_model(cfg: ModelConfig, seed: int) -> ParameterVector:
    """Weights ~ Normal(0, 1/fan_in); biases 0; layer-norm gain 1."""
    rng = stream(seed, "init", cfg.kind)
    layout = layout_for(cfg)
    pv = ParameterVector(np.zeros(sum(int(np.prod(s)) for _, s in layout)), layout)
    tensors = pv.tensors()
    fan_in = {
        "drug_embedding": cfg.embedding_dim,
        "protein_embedding": cfg.embedding_dim,
        "hidden_weight": 3 * cfg.embedding_dim,
        "output_weight": max(cfg.hidden_dim, 1),
    }
    for name, shape in layout:
        if name in fan_in:
            tensors[name][...] = rng.standard_normal(shape) / math.sqrt(fan_in[name])
        elif name == "norm_gain":
            tensors[name][...] = 1.0
        # all other biases stay zero
    return pv


def _forward(params: ParameterVector, cfg: ModelConfig, d_idx, p_idx):
    """Batched forward pass; returns (prediction, intermediates)."""
    t = params.tensors()
    u = t["drug_embedding"][d_idx]
    v = t["protein_embedding"][p_idx]
    if cfg.kind == "linear":
        yhat = np.einsum("ij,ij->i", u, v) + t["bias"][0]
        return yhat, {"u": u, "v": v}
    x = np.concatenate([u, v, u * v], axis=1)
    s = x @ t["hidden_weight"].T + t["hidden_bias"]
    mu = s.mean(axis=1, keepdims=True)
    var = s.var(axis=1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LAYER_NORM_EPS)
    norm = (s - mu) * inv
    z = t["norm_gain"] * norm + t["norm_bias"]
    a = np.maximum(z, 0.0)
    yhat = a @ t["output_weight"] + t["output_bias"][0]
    return yhat, {"u": u, "v": v, "x": x, "inv": inv, "norm": norm, "z": z, "a": a}


def predict_batch(params: ParameterVector, cfg: ModelConfig, d_idx, p_idx) -> np.ndarray:
    d_idx = np.asarray(d_idx, dtype=np.int64)
    p_idx = np.asarray(p_idx, dtype=np.int64)
    if (d_idx < 0).any() or (d_idx >= cfg.n_drugs).any():
        raise ModelError("drug index out of range")
    if (p_idx < 0).any() or (p_idx >= cfg.n_proteins).any():
        raise ModelError("protein index out of range")
    yhat, _ = _forward(params, cfg, d_idx, p_idx)
    return yhat


def predict(params: ParameterVector, cfg: ModelConfig, drug_idx: int, protein_idx: int) -> float:
    return float(predict_batch(params, cfg, [drug_idx], [protein_idx])[0])


def _gradient_arrays(
    params: ParameterVector, cfg: ModelConfig, d_idx, p_idx, y
) -> ParameterVector:
    n = len(y)
    if n == 0:
        raise ModelError("gradient needs a non-empty batch")
    t = params.tensors()
    yhat, cache = _forward(params, cfg, d_idx, p_idx)
    r = 2.0 * (yhat - y) / n  # d(mean squared error)/d(yhat)

    grad = ParameterVector(np.zeros_like(params.values), list(params.layout))
    g = grad.tensors()
    u, v = cache["u"], cache["v"]

    if cfg.kind == "linear":
        np.add.at(g["drug_embedding"], d_idx, r[:, None] * v)
        np.add.at(g["protein_embedding"], p_idx, r[:, None] * u)
        g["bias"][0] = r.sum()
        return grad

    w1, w2 = t["hidden_weight"], t["output_weight"]
    gain = t["norm_gain"]
    x, inv, norm, z, a = cache["x"], cache["inv"], cache["norm"], cache["z"], cache["a"]

    g["output_bias"][0] = r.sum()
    g["output_weight"][...] = a.T @ r
    da = r[:, None] * w2
    dz = da * (z > 0)
    g["norm_bias"][...] = dz.sum(axis=0)
    g["norm_gain"][...] = (dz * norm).sum(axis=0)
    dn = dz * gain
    ds = inv * (
        dn - dn.mean(axis=1, keepdims=True) - norm * (dn * norm).mean(axis=1, keepdims=True)
    )
    g["hidden_weight"][...] = ds.T @ x
    g["hidden_bias"][...] = ds.sum(axis=0)
    dx = ds @ w1
    d_emb = cfg.embedding_dim
    du = dx[:, :d_emb] + dx[:, 2 * d_emb :] * v
    dv = dx[:, d_emb : 2 * d_emb] + dx[:, 2 * d_emb :] * u
    np.add.at(g["drug_embedding"], d_idx, du)
    np.add.at(g["protein_embedding"], p_idx, dv)
    return grad


def gradient(params: ParameterVector, cfg: ModelConfig, batch) -> ParameterVector:
    """Analytic gradient of the batch-mean squared error."""
    if len(batch) == 0:
        raise ModelError("gradient needs a non-empty batch")
    d_idx = np.asarray([b[0] for b in batch], dtype=np.int64)
    p_idx = np.asarray([b[1] for b in batch], dtype=np.int64)
    y = np.asarray([b[2] for b in batch], dtype=np.float64)
    return _gradient_arrays(params, cfg, d_idx, p_idx, y)


def sgd_train(
    params: ParameterVector, cfg: ModelConfig, tcfg: TrainConfig, data
) -> ParameterVector:
    """Mini-batch SGD; per-epoch shuffles keyed by (seed, epoch).

    A pure function of its inputs; the last batch of an epoch may be
    short.
    """
    n = len(data)
    if n == 0:
        raise ModelError("cannot train on an empty dataset")
    out = params.copy()
    d_all, p_all, y_all = data.drug_idx, data.protein_idx, data.labels
    for epoch in range(tcfg.epochs):
        perm = stream(tcfg.seed, "epoch", epoch).permutation(n)
        for start in range(0, n, tcfg.batch_size):
            sel = perm[start : start + tcfg.batch_size]
            grad = _gradient_arrays(out, cfg, d_all[sel], p_all[sel], y_all[sel])
            out.values -= tcfg.learning_rate * grad.values
    return out


def evaluate_mse(params: ParameterVector, cfg: ModelConfig, data) -> float:
    """Mean squared error of the model over ``data``."""
    if len(data) == 0:
        raise ModelError("cannot evaluate on an empty dataset")
    yhat = predict_batch(params, cfg, data.drug_idx, data.protein_idx)
    return float(np.mean((yhat - data.labels) ** 2))


def save_params(pv: ParameterVector, path: str | os.PathLike) -> None:
    """Checkpoint: one JSON header line, then raw little-endian f64."""
    header = {
        "layout": [[name, list(shape)] for name, shape in pv.layout],
        "count": int(pv.values.size),
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        fh.write(np.ascontiguousarray(pv.values, dtype="<f8").tobytes())


def load_params(path: str | os.PathLike) -> ParameterVector:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        payload = fh.read()
    values = np.frombuffer(payload, dtype="<f8", count=header["count"]).astype(np.float64)
    layout = [(name, tuple(shape)) for name, shape in header["layout"]]
    return ParameterVector(values, layout)
