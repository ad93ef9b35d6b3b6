"""Data-to-client assignment strategies.

Covers the full benchmark spectrum: uniform (IID), entity-exclusive
non-IID by protein or drug, a Gaussian ring-exchange continuum between
the two, the combined protein+drug mode, dominant-client quantity skew,
and the incremental data-addition plans. Every strategy is a pure
function of (dataset, parameters, seed).
"""

from __future__ import annotations

import csv
import heapq
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .rng import fnv1a64, stream


class PartitionError(ValueError):
    """Invalid partitioning request (bad client count, shares, etc.)."""


@dataclass
class Partition:
    """Disjoint assignment of record indices to clients.

    ``assignments[c]`` lists the record indices owned by client ``c``;
    empty clients are permitted. ``provenance`` records strategy,
    parameters and seed so any partition can be rebuilt or compared.
    """

    assignments: list[np.ndarray]
    n_clients: int
    provenance: dict

    def __post_init__(self):
        if self.n_clients != len(self.assignments):
            raise PartitionError("n_clients must match the number of index lists")
        self.assignments = [np.asarray(a, dtype=np.int64) for a in self.assignments]

    def sizes(self) -> list[int]:
        return [len(a) for a in self.assignments]

    def total(self) -> int:
        return sum(self.sizes())

    def owner_array(self) -> np.ndarray:
        """Owner client id per record index (records must be 0..N-1)."""
        n = self.total()
        owners = np.full(n, -1, dtype=np.int64)
        for c, idx in enumerate(self.assignments):
            owners[idx] = c
        if (owners < 0).any():
            raise PartitionError("partition does not cover a contiguous index range")
        return owners

    def provenance_hash(self) -> int:
        return fnv1a64(json.dumps(self.provenance, sort_keys=True))


@dataclass
class MixingConfig:
    """Continuum coordinate for the Gaussian ring exchange.

    ``level`` is the expected fraction of each client's records moved to
    ring neighbours; ``sigma`` is the kernel width in ring-distance units.
    """

    level: float
    sigma: float
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.level <= 1.0:
            raise PartitionError("mixing level must be in [0, 1]")
        if self.sigma <= 0:
            raise PartitionError("mixing sigma must be positive")


@dataclass
class AdditionPlan:
    """Dominant-client share plus extra data spread over added clients."""

    dominant_share: float
    extra_share: float
    n_extra_clients: int

    def __post_init__(self):
        if not 0.0 < self.dominant_share <= 1.0:
            raise PartitionError("dominant_share must be in (0, 1]")
        if self.extra_share < 0:
            raise PartitionError("extra_share must be non-negative")
        if self.dominant_share + self.extra_share > 1.0 + 1e-12:
            raise PartitionError("dominant_share + extra_share must not exceed 1")
        if self.n_extra_clients < 0:
            raise PartitionError("n_extra_clients must be non-negative")
        if self.extra_share > 0 and self.n_extra_clients < 1:
            raise PartitionError("extra_share > 0 requires at least one extra client")


def largest_remainder(weights, total: int) -> np.ndarray:
    """Integer counts proportional to ``weights`` summing to ``total``.

    Floors the exact targets, then hands the leftover units to the
    largest fractional parts; ties broken by ascending position.
    """
    w = np.asarray(weights, dtype=np.float64)
    if (w < 0).any() or w.sum() <= 0:
        raise PartitionError("weights must be non-negative with positive sum")
    targets = total * w / w.sum()
    counts = np.floor(targets).astype(np.int64)
    frac = targets - counts
    leftover = total - int(counts.sum())
    # stable sort on -frac keeps ascending-index order among ties
    order = np.argsort(-frac, kind="stable")
    counts[order[:leftover]] += 1
    return counts


def partition_iid(ds, n_clients: int, seed: int) -> Partition:
    """Uniform shuffle dealt round-robin; client sizes differ by <= 1."""
    if n_clients < 1:
        raise PartitionError("n_clients must be >= 1")
    n = len(ds)
    perm = stream(seed, "iid").permutation(n)
    assignments = [np.sort(perm[c::n_clients]) for c in range(n_clients)]
    return Partition(
        assignments,
        n_clients,
        {"strategy": "iid", "n_clients": n_clients, "seed": seed, "n_records": n},
    )


def _entity_greedy(
    record_indices: np.ndarray,
    entity_idx: np.ndarray,
    entity_ids: list[str],
    n_clients: int,
) -> list[np.ndarray]:
    """Greedy load-balanced assignment of whole entities to clients.

    Entities ordered by record count descending (ties by id ascending),
    each placed on the currently least-loaded client (ties by client id).
    """
    groups: dict[int, list[int]] = {}
    for rec, ent in zip(record_indices, entity_idx):
        groups.setdefault(int(ent), []).append(int(rec))
    if len(groups) < n_clients:
        raise PartitionError(
            f"need at least {n_clients} distinct entities, found {len(groups)}"
        )
    order = sorted(groups, key=lambda e: (-len(groups[e]), entity_ids[e]))
    heap = [(0, c) for c in range(n_clients)]
    heapq.heapify(heap)
    buckets: list[list[int]] = [[] for _ in range(n_clients)]
    for ent in order:
        load, c = heapq.heappop(heap)
        buckets[c].extend(groups[ent])
        heapq.heappush(heap, (load + len(groups[ent]), c))
    return [np.sort(np.asarray(b, dtype=np.int64)) for b in buckets]


def partition_entity(ds, n_clients: int, dim: str, seed: int) -> Partition:
    """Assign whole proteins or drugs to clients (entity-exclusive
    non-IID); every record lands on its entity's owner."""
    if n_clients < 1:
        raise PartitionError("n_clients must be >= 1")
    if dim not in ("protein", "drug"):
        raise PartitionError(f"dim must be 'protein' or 'drug', got {dim!r}")
    entity_idx = ds.protein_idx if dim == "protein" else ds.drug_idx
    source = ds.source if hasattr(ds, "source") else ds
    entity_ids = source.proteins if dim == "protein" else source.drugs
    records = np.arange(len(ds), dtype=np.int64)
    assignments = _entity_greedy(records, entity_idx, entity_ids, n_clients)
    return Partition(
        assignments,
        n_clients,
        {
            "strategy": f"entity_{dim}",
            "n_clients": n_clients,
            "seed": seed,
            "n_records": len(ds),
        },
    )


def ring_kernel(n_clients: int, sigma: float) -> np.ndarray:
    """Row-normalized Gaussian over ring distance, self excluded."""
    idx = np.arange(n_clients)
    diff = np.abs(idx[:, None] - idx[None, :])
    dist = np.minimum(diff, n_clients - diff)
    kernel = np.exp(-(dist.astype(np.float64) ** 2) / (2.0 * sigma**2))
    np.fill_diagonal(kernel, 0.0)
    return kernel / kernel.sum(axis=1, keepdims=True)


def apply_gaussian_mixing(p: Partition, cfg: MixingConfig) -> Partition:
    """Move each record off its owner with probability ``level``; the
    destination is a ring neighbour drawn from the Gaussian kernel.

    Draws are indexed by record position, so the result is a pure
    function of (partition, cfg).
    """
    k = p.n_clients
    if cfg.level > 0 and k == 1:
        raise PartitionError("cannot mix with a single client: no neighbour exists")
    provenance = {
        "base": p.provenance,
        "mixing": {"level": cfg.level, "sigma": cfg.sigma, "seed": cfg.seed},
    }
    if cfg.level == 0:
        return Partition([a.copy() for a in p.assignments], k, provenance)
    owners = p.owner_array()
    n = len(owners)
    rng = stream(cfg.seed, "mixing")
    move_u = rng.random(n)
    dest_u = rng.random(n)
    cum = np.cumsum(ring_kernel(k, cfg.sigma), axis=1)
    new_owners = owners.copy()
    moving = move_u < cfg.level
    for c in range(k):
        mask = moving & (owners == c)
        if mask.any():
            new_owners[mask] = np.searchsorted(cum[c], dest_u[mask], side="right")
    assignments = [np.flatnonzero(new_owners == c) for c in range(k)]
    return Partition(assignments, k, provenance)


def partition_combined(ds, n_clients: int, cfg: MixingConfig, seed: int) -> Partition:
    """Half the records partitioned by protein on the first K/2 clients,
    half by drug on the rest, then Gaussian mixing over the full ring."""
    if n_clients < 2 or n_clients % 2 != 0:
        raise PartitionError("combined partitioning needs an even n_clients >= 2")
    n = len(ds)
    half = n_clients // 2
    perm = stream(seed, "combined", "halves").permutation(n)
    n_a = (n + 1) // 2
    a_idx = np.sort(perm[:n_a])
    b_idx = np.sort(perm[n_a:])
    source = ds.source if hasattr(ds, "source") else ds
    a_assign = _entity_greedy(a_idx, ds.protein_idx[a_idx], source.proteins, half)
    b_assign = _entity_greedy(b_idx, ds.drug_idx[b_idx], source.drugs, half)
    base = Partition(
        a_assign + b_assign,
        n_clients,
        {
            "strategy": "combined",
            "n_clients": n_clients,
            "seed": seed,
            "n_records": n,
        },
    )
    return apply_gaussian_mixing(base, cfg)


def partition_quantity_skew(
    ds, n_clients: int, dominant_share: float, sigma_q: float, seed: int
) -> Partition:
    """Client 0 holds floor(dominant_share*N) records; the rest are split
    among clients 1..K-1 with one-sided Gaussian weights peaking at
    client 1, rounded by largest remainder."""
    if n_clients < 2:
        raise PartitionError("quantity skew needs n_clients >= 2")
    if not 0.0 < dominant_share < 1.0:
        raise PartitionError("dominant_share must be in (0, 1)")
    if sigma_q <= 0:
        raise PartitionError("sigma_q must be positive")
    n = len(ds)
    perm = stream(seed, "quantity").permutation(n)
    n0 = int(math.floor(dominant_share * n))
    rest = n - n0
    j = np.arange(1, n_clients)
    weights = np.exp(-((j - 1).astype(np.float64) ** 2) / (2.0 * sigma_q**2))
    counts = largest_remainder(weights, rest)
    assignments = [np.sort(perm[:n0])]
    offset = n0
    for c in counts:
        assignments.append(np.sort(perm[offset : offset + int(c)]))
        offset += int(c)
    return Partition(
        assignments,
        n_clients,
        {
            "strategy": "quantity",
            "n_clients": n_clients,
            "dominant_share": dominant_share,
            "sigma_q": sigma_q,
            "seed": seed,
            "n_records": n,
        },
    )


def partition_addition(ds, plan: AdditionPlan, seed: int) -> Partition:
    """Dominant client plus extra data spread equally over added clients;
    unused records are withheld and noted in provenance."""
    n = len(ds)
    perm = stream(seed, "addition").permutation(n)
    n0 = int(math.floor(plan.dominant_share * n))
    n_extra = int(math.floor(plan.extra_share * n))
    assignments = [np.sort(perm[:n0])]
    offset = n0
    if plan.n_extra_clients > 0:
        counts = largest_remainder(np.ones(plan.n_extra_clients), n_extra)
        for c in counts:
            assignments.append(np.sort(perm[offset : offset + int(c)]))
            offset += int(c)
    return Partition(
        assignments,
        1 + plan.n_extra_clients,
        {
            "strategy": "addition",
            "dominant_share": plan.dominant_share,
            "extra_share": plan.extra_share,
            "n_extra_clients": plan.n_extra_clients,
            "seed": seed,
            "n_records": n,
            "n_used": offset,
            "n_withheld": n - offset,
        },
    )


def save_partition(p: Partition, csv_path, json_path=None) -> None:
    """Write the `record_index,client_id` manifest plus its JSON
    provenance sidecar."""
    json_path = json_path or str(csv_path) + ".json"
    rows = sorted(
        (int(rec), c) for c, idx in enumerate(p.assignments) for rec in idx
    )
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["record_index", "client_id"])
        writer.writerows(rows)
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(
            {"n_clients": p.n_clients, "provenance": p.provenance},
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")


def load_partition(csv_path, json_path=None) -> Partition:
    """Rebuild a Partition from its manifest and sidecar."""
    json_path = json_path or str(csv_path) + ".json"
    with open(json_path, encoding="utf-8") as fh:
        meta = json.load(fh)
    buckets: list[list[int]] = [[] for _ in range(meta["n_clients"])]
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["record_index", "client_id"]:
            raise PartitionError(f"bad manifest header: {header}")
        for rec, client in reader:
            buckets[int(client)].append(int(rec))
    return Partition(
        [np.asarray(b, dtype=np.int64) for b in buckets],
        meta["n_clients"],
        meta["provenance"],
    )
