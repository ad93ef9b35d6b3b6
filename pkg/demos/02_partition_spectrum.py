"""Walk the partitioning spectrum from IID to fully non-IID.

Each strategy splits the same dataset across clients; the interesting
axis is how entity-skewed the shards are. Gaussian ring mixing then
interpolates: level 0 keeps the entity partition intact, level 1 moves
every record to a neighbour drawn from a ring kernel.
"""

import numpy as np

from fedbench import (
    MixingConfig,
    apply_gaussian_mixing,
    generate_synthetic,
    partition_entity,
    partition_iid,
    partition_quantity_skew,
)

ds = generate_synthetic(60, 24, 4000, 4, 0.1, seed=7)
view = ds.view()
K = 6


def protein_spread(partition):
    """Average number of clients each protein's records land on."""
    owner = partition.owner_array()
    spread = [
        len(set(owner[ds.protein_idx == e].tolist()))
        for e in range(ds.n_proteins)
        if (ds.protein_idx == e).any()
    ]
    return float(np.mean(spread))


iid = partition_iid(view, K, seed=1)
entity = partition_entity(view, K, "protein", seed=1)
print(f"iid:     sizes {iid.sizes()},  proteins touch {protein_spread(iid):.2f} clients on average")
print(f"entity:  sizes {entity.sizes()},  proteins touch {protein_spread(entity):.2f} clients on average")

print("\nmixing the entity partition back toward IID:")
for level in (0.0, 0.25, 0.5, 1.0):
    mixed = apply_gaussian_mixing(entity, MixingConfig(level, sigma=K / 4, seed=3))
    moved = (entity.owner_array() != mixed.owner_array()).mean()
    print(f"  level {level:4.2f}: {moved:5.1%} of records moved, spread {protein_spread(mixed):.2f}")

print("\nquantity skew (one dominant client):")
q = partition_quantity_skew(view, K, dominant_share=0.6, sigma_q=1.0, seed=5)
print(f"  sizes {q.sizes()}")
