"""Two-entity interaction datasets: CSV ingestion, synthetic generation,
and the single fixed train/test split shared by every experiment.

Records are (drug_id, protein_id, label) triples. Entities are opaque
string ids mapped to dense integer indices; no chemistry is parsed.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .rng import stream

CSV_HEADER = ["drug_id", "protein_id", "label"]


class DataError(ValueError):
    """Malformed input data (bad CSV, invalid record fields)."""


@dataclass(frozen=True)
class InteractionRecord:
    """One (drug, protein, affinity) observation."""

    drug_id: str
    protein_id: str
    label: float

    def __post_init__(self):
        if not self.drug_id or not self.protein_id:
            raise DataError("drug_id and protein_id must be non-empty")
        if not math.isfinite(self.label):
            raise DataError(f"label must be finite, got {self.label!r}")


class Dataset:
    """Immutable ordered collection of interaction records.

    Entity indices are dense, contiguous from 0, assigned in first-seen
    record order, so two loads of the same file build identical maps.
    """

    def __init__(self, records: list[InteractionRecord], metadata: dict | None = None):
        self.records = list(records)
        self.metadata = dict(metadata or {})
        self.drug_index: dict[str, int] = {}
        self.protein_index: dict[str, int] = {}
        self.drugs: list[str] = []
        self.proteins: list[str] = []
        d_idx = np.empty(len(records), dtype=np.int64)
        p_idx = np.empty(len(records), dtype=np.int64)
        labels = np.empty(len(records), dtype=np.float64)
        for i, rec in enumerate(self.records):
            if rec.drug_id not in self.drug_index:
                self.drug_index[rec.drug_id] = len(self.drugs)
                self.drugs.append(rec.drug_id)
            if rec.protein_id not in self.protein_index:
                self.protein_index[rec.protein_id] = len(self.proteins)
                self.proteins.append(rec.protein_id)
            d_idx[i] = self.drug_index[rec.drug_id]
            p_idx[i] = self.protein_index[rec.protein_id]
            labels[i] = rec.label
        self.drug_idx = d_idx
        self.protein_idx = p_idx
        self.labels = labels

    def __len__(self) -> int:
        return len(self.records)

    @property
    def n_drugs(self) -> int:
        return len(self.drugs)

    @property
    def n_proteins(self) -> int:
        return len(self.proteins)

    def view(self, indices=None) -> "DataView":
        if indices is None:
            indices = np.arange(len(self), dtype=np.int64)
        return DataView(self, np.asarray(indices, dtype=np.int64))


@dataclass
class DataView:
    """A subset of a Dataset's records, sharing its entity index maps.

    Positions within the view are 0..len(view)-1; ``indices`` maps them
    back to source record indices.
    """

    source: Dataset
    indices: np.ndarray

    def __post_init__(self):
        self.drug_idx = self.source.drug_idx[self.indices]
        self.protein_idx = self.source.protein_idx[self.indices]
        self.labels = self.source.labels[self.indices]

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def n_drugs(self) -> int:
        return self.source.n_drugs

    @property
    def n_proteins(self) -> int:
        return self.source.n_proteins

    def take(self, positions) -> "DataView":
        positions = np.asarray(positions, dtype=np.int64)
        return DataView(self.source, self.indices[positions])


@dataclass
class SplitPair:
    """The fixed train/test split every experiment shares."""

    train: DataView
    test: DataView
    seed: int
    test_fraction: float


def load_csv(path: str | os.PathLike) -> Dataset:
    """Load a `drug_id,protein_id,label` CSV into a Dataset.

    Raises DataError naming the offending line for schema or label
    problems; a header-only file yields a valid empty dataset.
    """
    if not os.path.exists(path):
        raise DataError(f"dataset file not found: {path}")
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, expected header {CSV_HEADER}")
        if header != CSV_HEADER:
            raise DataError(f"{path}: bad header {header}, expected {CSV_HEADER}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise DataError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
            drug_id, protein_id, raw = row
            try:
                label = float(raw)
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric label {raw!r}")
            if not math.isfinite(label):
                raise DataError(f"{path}:{lineno}: non-finite label {raw!r}")
            try:
                records.append(InteractionRecord(drug_id, protein_id, label))
            except DataError as exc:
                raise DataError(f"{path}:{lineno}: {exc}")
    return Dataset(records, metadata={"source": str(path), "n_records": len(records)})


def write_csv(ds: Dataset, path: str | os.PathLike) -> None:
    """Write a Dataset in the canonical schema; labels carry 17
    significant digits so load_csv round-trips losslessly."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for rec in ds.records:
            writer.writerow([rec.drug_id, rec.protein_id, format(rec.label, ".17g")])


def generate_synthetic(
    n_drugs: int,
    n_proteins: int,
    n_records: int,
    latent_dim: int,
    noise_sd: float,
    seed: int,
) -> Dataset:
    """Synthetic dataset with a known bilinear ground truth.

    Each record pairs a uniformly drawn (drug, protein); the label is
    dot(u_d, v_p) + Normal(0, noise_sd^2) noise, with per-entity latent
    vectors of i.i.d. standard-normal entries scaled by 1/sqrt(latent_dim).
    Latents are kept in metadata so tests can reconstruct labels.
    """
    if n_records < 0:
        raise ValueError("n_records must be non-negative")
    if latent_dim <= 0:
        raise ValueError("latent_dim must be positive")
    if noise_sd < 0:
        raise ValueError("noise_sd must be non-negative")
    if n_records > 0 and (n_drugs <= 0 or n_proteins <= 0):
        raise ValueError("need positive n_drugs and n_proteins to draw records")

    scale = 1.0 / math.sqrt(latent_dim)
    drug_latents = stream(seed, "synthetic", "drug_latents").standard_normal(
        (max(n_drugs, 0), latent_dim)
    ) * scale
    protein_latents = stream(seed, "synthetic", "protein_latents").standard_normal(
        (max(n_proteins, 0), latent_dim)
    ) * scale

    records: list[InteractionRecord] = []
    if n_records > 0:
        pair_rng = stream(seed, "synthetic", "pairs")
        d = pair_rng.integers(0, n_drugs, size=n_records)
        p = pair_rng.integers(0, n_proteins, size=n_records)
        noise = stream(seed, "synthetic", "noise").normal(0.0, noise_sd, size=n_records)
        # per-record np.dot so labels are exactly reproducible from the
        # stored latents with the same reduction
        clean = np.array(
            [np.dot(drug_latents[d[i]], protein_latents[p[i]]) for i in range(n_records)]
        )
        labels = clean if noise_sd == 0 else clean + noise
        width_d = len(str(max(n_drugs - 1, 0)))
        width_p = len(str(max(n_proteins - 1, 0)))
        for i in range(n_records):
            records.append(
                InteractionRecord(
                    f"D{d[i]:0{width_d}d}", f"P{p[i]:0{width_p}d}", float(labels[i])
                )
            )
    return Dataset(
        records,
        metadata={
            "synthetic": True,
            "seed": seed,
            "noise_sd": noise_sd,
            "latent_dim": latent_dim,
            "drug_latents": drug_latents,
            "protein_latents": protein_latents,
        },
    )


def split_train_test(ds: Dataset, test_fraction: float, seed: int) -> SplitPair:
    """Uniform random split by record index; a pure function of
    (dataset, test_fraction, seed). |test| = round(test_fraction * N)."""
    if not 0.0 <= test_fraction <= 1.0:
        raise ValueError("test_fraction must be in [0, 1]")
    n = len(ds)
    n_test = int(math.floor(test_fraction * n + 0.5))
    perm = stream(seed, "split").permutation(n)
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])
    return SplitPair(
        train=ds.view(train_idx),
        test=ds.view(test_idx),
        seed=seed,
        test_fraction=test_fraction,
    )
