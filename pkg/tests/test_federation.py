import math

import numpy as np
import pytest

from fedbench.data import generate_synthetic, split_train_test
from fedbench.federation import (
    ClientUpdate,
    FederationError,
    fedavg_aggregate,
    local_seed,
    local_update,
    run_federation,
    write_history,
)
from fedbench.model import (
    ModelConfig,
    ParameterVector,
    TrainConfig,
    init_model,
    sgd_train,
)
from fedbench.partition import partition_iid
from fedbench.rng import stream


def scalar_update(value, n, client_id):
    return ClientUpdate(
        ParameterVector(np.array([float(value)]), [("w", (1,))]), n, client_id
    )


def setup_problem(n_records=120, seed=5):
    ds = generate_synthetic(10, 6, n_records, 4, 0.1, seed=seed)
    split = split_train_test(ds, 0.25, seed=seed)
    mcfg = ModelConfig("two_tower_mlp", 4, ds.n_drugs, ds.n_proteins, hidden_dim=8)
    tcfg = TrainConfig(epochs=2, learning_rate=0.05, batch_size=16, seed=31)
    return ds, split, mcfg, tcfg


class TestLocalUpdate:
    def test_zero_learning_rate_returns_global(self):
        ds, split, mcfg, tcfg = setup_problem()
        g = init_model(mcfg, 1)
        tcfg = TrainConfig(2, 0.0, 16, 31)
        upd = local_update(g, split.train, mcfg, tcfg, round_idx=0, client_id=0)
        assert np.array_equal(upd.params.values, g.values)
        assert upd.n_samples == len(split.train)

    def test_empty_client(self):
        ds, split, mcfg, tcfg = setup_problem()
        g = init_model(mcfg, 1)
        upd = local_update(g, split.train.take([]), mcfg, tcfg, 0, 3)
        assert upd.n_samples == 0
        assert np.array_equal(upd.params.values, g.values)

    def test_matches_direct_sgd_with_keyed_stream(self):
        ds, split, mcfg, tcfg = setup_problem()
        g = init_model(mcfg, 1)
        upd = local_update(g, split.train, mcfg, tcfg, round_idx=2, client_id=0)
        from dataclasses import replace

        oracle = sgd_train(
            g, mcfg, replace(tcfg, seed=local_seed(tcfg.seed, 2, 0)), split.train
        )
        assert np.array_equal(upd.params.values, oracle.values)


class TestAggregate:
    def test_single_update_identity(self):
        mcfg = ModelConfig("linear", 3, 4, 4)
        pv = init_model(mcfg, 7)
        out = fedavg_aggregate([ClientUpdate(pv, 10, 0)])
        assert np.array_equal(out.values, pv.values)

    def test_symmetry(self):
        w = stream(1, "sym").standard_normal(6)
        a = ClientUpdate(ParameterVector(w.copy(), [("w", (6,))]), 5, 0)
        b = ClientUpdate(ParameterVector(-w, [("w", (6,))]), 5, 1)
        out = fedavg_aggregate([a, b])
        assert (out.values == 0.0).all()

    def test_weighted_mean_exact(self):
        updates = [scalar_update(1, 1, 0), scalar_update(4, 2, 1), scalar_update(7, 3, 2)]
        out = fedavg_aggregate(updates)
        assert out.values[0] == 5.0

    def test_zero_sample_excluded(self):
        updates = [scalar_update(100, 0, 0), scalar_update(3, 4, 1)]
        out = fedavg_aggregate(updates)
        assert out.values[0] == 3.0

    def test_all_zero_samples_rejected(self):
        with pytest.raises(FederationError):
            fedavg_aggregate([scalar_update(1, 0, 0)])

    def test_layout_mismatch_rejected(self):
        a = ClientUpdate(ParameterVector(np.zeros(2), [("w", (2,))]), 1, 0)
        b = ClientUpdate(ParameterVector(np.zeros(3), [("w", (3,))]), 1, 1)
        with pytest.raises(FederationError):
            fedavg_aggregate([a, b])

    def test_fixed_point_exact(self):
        g = stream(2, "fp").standard_normal(9)
        updates = [
            ClientUpdate(ParameterVector(g.copy(), [("w", (9,))]), n, c)
            for c, n in enumerate([3, 7, 11])
        ]
        out = fedavg_aggregate(updates)
        assert np.array_equal(out.values, g)

    def test_convex_hull_containment(self):
        rng = stream(3, "hull")
        for _ in range(25):
            k = int(rng.integers(2, 6))
            vals = rng.standard_normal((k, 8))
            sizes = rng.integers(1, 50, size=k)
            updates = [
                ClientUpdate(ParameterVector(vals[c].copy(), [("w", (8,))]), int(sizes[c]), c)
                for c in range(k)
            ]
            out = fedavg_aggregate(updates).values
            lo, hi = vals.min(axis=0), vals.max(axis=0)
            # allow one ulp of slack for the anchored floating-point sum
            assert (out >= np.nextafter(lo, -np.inf)).all()
            assert (out <= np.nextafter(hi, np.inf)).all()

    def test_order_independent(self):
        updates = [scalar_update(v, n, c) for c, (v, n) in enumerate([(1, 3), (2, 5), (9, 2)])]
        a = fedavg_aggregate(updates)
        b = fedavg_aggregate(list(reversed(updates)))
        assert np.array_equal(a.values, b.values)


class TestRunFederation:
    def test_zero_rounds(self):
        ds, split, mcfg, tcfg = setup_problem()
        p = partition_iid(split.train, 3, seed=2)
        res = run_federation(split, p, mcfg, tcfg, rounds=0, seed=8)
        assert res.history == []
        assert np.array_equal(res.final_params.values, init_model(mcfg, 8).values)

    def test_single_client_equals_centralized(self):
        ds, split, mcfg, tcfg = setup_problem()
        p = partition_iid(split.train, 1, seed=2)
        rounds = 4
        res = run_federation(split, p, mcfg, tcfg, rounds=rounds, seed=8)
        from dataclasses import replace

        params = init_model(mcfg, 8)
        for r in range(rounds):
            params = sgd_train(
                params, mcfg, replace(tcfg, seed=local_seed(tcfg.seed, r, 0)), split.train
            )
        assert np.array_equal(res.final_params.values, params.values)

    def test_identical_clients_aggregate_to_any_member(self):
        ds, split, mcfg, tcfg = setup_problem()
        g = init_model(mcfg, 8)
        # three clients holding identical copies of the full train set
        # and identical local streams: the average must equal any member
        updates = [
            ClientUpdate(
                local_update(g, split.train, mcfg, tcfg, 0, 0).params,
                len(split.train),
                c,
            )
            for c in range(3)
        ]
        agg = fedavg_aggregate(updates)
        assert np.array_equal(agg.values, updates[0].params.values)

    def test_worker_count_does_not_change_result(self):
        ds, split, mcfg, tcfg = setup_problem()
        p = partition_iid(split.train, 4, seed=2)
        a = run_federation(split, p, mcfg, tcfg, rounds=3, seed=8, workers=1)
        b = run_federation(split, p, mcfg, tcfg, rounds=3, seed=8, workers=4)
        assert np.array_equal(a.final_params.values, b.final_params.values)
        assert a.history == b.history

    def test_history_finite_and_per_round(self):
        ds, split, mcfg, tcfg = setup_problem()
        p = partition_iid(split.train, 2, seed=2)
        res = run_federation(split, p, mcfg, tcfg, rounds=5, seed=8)
        assert [r for r, _ in res.history] == list(range(5))
        assert all(math.isfinite(m) for _, m in res.history)

    def test_history_csv(self, tmp_path):
        path = tmp_path / "history.csv"
        write_history([(0, 0.5), (1, 0.25)], path)
        assert path.read_text() == "round,global_mse\n0,0.5\n1,0.25\n"
