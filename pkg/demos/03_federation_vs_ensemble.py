"""Compare federated training against a bagging-ensemble baseline.

Both pipelines see the identical partition of the identical train set.
The federation runs FedAvg rounds; the baseline trains one independent
model per client shard and averages predictions. The printed table is
the same shape run_comparison() emits to compare.csv.
"""

from fedbench import (
    ModelConfig,
    TrainConfig,
    evaluate_ensemble,
    generate_synthetic,
    partition_entity,
    partition_iid,
    pct_difference,
    run_federation,
    split_train_test,
    train_bagging,
)

ds = generate_synthetic(80, 30, 6000, 6, 0.1, seed=17)
split = split_train_test(ds, 0.2, seed=17)
mcfg = ModelConfig("two_tower_mlp", 6, ds.n_drugs, ds.n_proteins, hidden_dim=12)
rounds = 10

print(f"{'dist':8} {'K':>3} {'ensemble':>9} {'federated':>10} {'% diff':>8}")
for dist in ("iid", "noniid"):
    for k in (2, 8):
        if dist == "iid":
            partition = partition_iid(split.train, k, seed=23)
        else:
            partition = partition_entity(split.train, k, "protein", seed=23)
        tcfg = TrainConfig(epochs=1, learning_rate=0.05, batch_size=128, seed=29)
        fed = run_federation(split, partition, mcfg, tcfg, rounds, seed=31)
        fed_mse = fed.history[-1][1]
        # each member gets the same epoch budget as the federation total
        ens = train_bagging(split, partition, mcfg, tcfg, total_epochs=rounds, seed=31)
        ens_mse = evaluate_ensemble(ens, split.test)
        print(
            f"{dist:8} {k:>3} {ens_mse:>9.4f} {fed_mse:>10.4f}"
            f" {pct_difference(fed_mse, ens_mse):>+7.2f}%"
        )
