import numpy as np
import pytest

from fedbench.data import generate_synthetic
from fedbench.model import (
    LAYER_NORM_EPS,
    ModelConfig,
    ModelError,
    ParameterVector,
    TrainConfig,
    evaluate_mse,
    gradient,
    init_model,
    layout_for,
    load_params,
    predict,
    predict_batch,
    save_params,
    sgd_train,
)
from fedbench.rng import stream


def linear_cfg(n_drugs=3, n_proteins=2, dim=2):
    return ModelConfig("linear", dim, n_drugs, n_proteins)


def mlp_cfg(n_drugs=5, n_proteins=4, dim=3, hidden=6):
    return ModelConfig("two_tower_mlp", dim, n_drugs, n_proteins, hidden_dim=hidden)


def finite_difference_gradient(params, cfg, batch, step=1e-6):
    """Central finite differences of the batch-mean squared error."""

    def loss(values):
        pv = ParameterVector(values, list(params.layout))
        d = np.array([b[0] for b in batch])
        p = np.array([b[1] for b in batch])
        y = np.array([b[2] for b in batch])
        yhat = predict_batch(pv, cfg, d, p)
        return float(np.mean((yhat - y) ** 2))

    grad = np.zeros_like(params.values)
    for i in range(params.values.size):
        plus = params.values.copy()
        minus = params.values.copy()
        plus[i] += step
        minus[i] -= step
        grad[i] = (loss(plus) - loss(minus)) / (2 * step)
    return grad


def random_batch(rng, cfg, size):
    return [
        (
            int(rng.integers(cfg.n_drugs)),
            int(rng.integers(cfg.n_proteins)),
            float(rng.normal()),
        )
        for _ in range(size)
    ]


class TestInit:
    def test_deterministic(self):
        cfg = mlp_cfg()
        a = init_model(cfg, seed=3)
        b = init_model(cfg, seed=3)
        assert np.array_equal(a.values, b.values)

    def test_gain_is_one_biases_zero(self):
        t = init_model(mlp_cfg(), seed=1).tensors()
        assert (t["norm_gain"] == 1.0).all()
        assert (t["norm_bias"] == 0.0).all()
        assert (t["hidden_bias"] == 0.0).all()
        assert (t["output_bias"] == 0.0).all()

    def test_linear_parameter_count(self):
        # closed form: n_drugs*dim + n_proteins*dim + 1 bias
        cfg = ModelConfig("linear", 4, 3, 2)
        pv = init_model(cfg, seed=0)
        assert pv.values.size == 3 * 4 + 2 * 4 + 1 == 21

    def test_layout_round_trip(self):
        pv = init_model(mlp_cfg(), seed=5)
        rebuilt = np.concatenate(
            [pv.tensors()[name].ravel() for name, _ in pv.layout]
        )
        assert np.array_equal(rebuilt, pv.values)


class TestPredict:
    def test_all_zero_linear(self):
        cfg = linear_cfg()
        pv = ParameterVector(np.zeros(3 * 2 + 2 * 2 + 1), layout_for(cfg))
        assert predict(pv, cfg, 0, 0) == 0.0

    def test_linear_arithmetic(self):
        cfg = linear_cfg(n_drugs=1, n_proteins=1, dim=2)
        pv = ParameterVector(np.array([1.0, 2.0, 3.0, 4.0, 0.5]), layout_for(cfg))
        assert predict(pv, cfg, 0, 0) == 1 * 3 + 2 * 4 + 0.5

    def test_mlp_zero_gain_ignores_input(self):
        cfg = mlp_cfg()
        pv = init_model(cfg, seed=9)
        t = pv.tensors()
        t["norm_gain"][...] = 0.0
        t["norm_bias"][...] = stream(1, "bias").standard_normal(cfg.hidden_dim)
        first = predict(pv, cfg, 0, 0)
        for d, p in [(1, 2), (4, 3), (2, 0)]:
            assert predict(pv, cfg, d, p) == first

    def test_index_out_of_range(self):
        cfg = linear_cfg()
        pv = init_model(cfg, seed=1)
        with pytest.raises(ModelError, match="out of range"):
            predict(pv, cfg, cfg.n_drugs, 0)

    def test_layer_norm_shift_invariance(self):
        # shifting every pre-normalization unit by a constant leaves the
        # normalized activations (and hence the output) unchanged
        cfg = mlp_cfg()
        pv = init_model(cfg, seed=4)
        shifted = pv.copy()
        shifted.tensors()["hidden_bias"][...] += 3.7
        for d, p in [(0, 0), (3, 2), (1, 3)]:
            a = predict(pv, cfg, d, p)
            b = predict(shifted, cfg, d, p)
            assert abs(a - b) <= 1e-6 * max(abs(a), 1.0)


class TestGradient:
    def test_zero_at_perfect_fit(self):
        cfg = linear_cfg()
        pv = ParameterVector(np.zeros(3 * 2 + 2 * 2 + 1), layout_for(cfg))
        g = gradient(pv, cfg, [(0, 0, 0.0), (1, 1, 0.0)])
        assert (g.values == 0.0).all()

    def test_linear_hand_derived(self):
        cfg = linear_cfg(n_drugs=1, n_proteins=1, dim=2)
        u, v, b = np.array([1.0, 2.0]), np.array([3.0, 0.5]), 0.1
        pv = ParameterVector(np.concatenate([u, v, [b]]), layout_for(cfg))
        y = 2.0
        yhat = u @ v + b
        r = 2 * (yhat - y)
        g = gradient(pv, cfg, [(0, 0, y)]).tensors()
        assert np.allclose(g["drug_embedding"][0], r * v, rtol=1e-15)
        assert np.allclose(g["protein_embedding"][0], r * u, rtol=1e-15)
        assert g["bias"][0] == r

    def test_empty_batch(self):
        cfg = linear_cfg()
        with pytest.raises(ModelError):
            gradient(init_model(cfg, 0), cfg, [])

    @pytest.mark.parametrize("kind", ["linear", "two_tower_mlp"])
    def test_matches_finite_differences(self, kind):
        cfg = linear_cfg(5, 4, 3) if kind == "linear" else mlp_cfg()
        rng = stream(123, "fd", kind)
        for draw in range(20):
            pv = init_model(cfg, seed=draw)
            pv.values += 0.1 * rng.standard_normal(pv.values.size)
            batch = random_batch(rng, cfg, size=int(rng.integers(1, 6)))
            analytic = gradient(pv, cfg, batch).values
            fd = finite_difference_gradient(pv, cfg, batch)
            denom = max(np.linalg.norm(fd), np.linalg.norm(analytic), 1e-12)
            assert np.linalg.norm(analytic - fd) / denom < 1e-4


class TestSgdTrain:
    def test_single_step_hand_computed(self):
        cfg = linear_cfg(n_drugs=1, n_proteins=1, dim=2)
        u, v, b = np.array([1.0, 2.0]), np.array([3.0, 0.5]), 0.1
        pv = ParameterVector(np.concatenate([u, v, [b]]), layout_for(cfg))
        ds = generate_synthetic(1, 1, 1, 2, 0.0, seed=1)
        y = ds.labels[0]
        lr = 0.01
        tcfg = TrainConfig(epochs=1, learning_rate=lr, batch_size=1, seed=7)
        out = sgd_train(pv, cfg, tcfg, ds.view()).tensors()
        r = 2 * (u @ v + b - y)
        assert np.allclose(out["drug_embedding"][0], u - lr * r * v, rtol=1e-15)
        assert np.allclose(out["protein_embedding"][0], v - lr * r * u, rtol=1e-15)
        assert np.isclose(out["bias"][0], b - lr * r, rtol=1e-15)

    def test_zero_learning_rate(self):
        cfg = mlp_cfg()
        ds = generate_synthetic(5, 4, 50, 3, 0.1, seed=2)
        pv = init_model(cfg, seed=1)
        out = sgd_train(pv, cfg, TrainConfig(3, 0.0, 16, 5), ds.view())
        assert np.array_equal(out.values, pv.values)

    def test_deterministic(self):
        cfg = mlp_cfg()
        ds = generate_synthetic(5, 4, 80, 3, 0.1, seed=2)
        tcfg = TrainConfig(2, 0.05, 16, 5)
        a = sgd_train(init_model(cfg, 1), cfg, tcfg, ds.view())
        b = sgd_train(init_model(cfg, 1), cfg, tcfg, ds.view())
        assert np.array_equal(a.values, b.values)

    def test_empty_data(self):
        cfg = linear_cfg()
        ds = generate_synthetic(3, 2, 0, 2, 0.0, seed=1)
        with pytest.raises(ModelError):
            sgd_train(init_model(cfg, 0), cfg, TrainConfig(1, 0.1, 4, 0), ds.view())

    @pytest.mark.parametrize("seed", range(5))
    def test_loss_descends_on_noise_free_data(self, seed):
        cfg = linear_cfg(10, 8, 4)
        ds = generate_synthetic(10, 8, 400, 4, 0.0, seed=seed)
        pv = init_model(cfg, seed=seed)
        before = evaluate_mse(pv, cfg, ds.view())
        tcfg = TrainConfig(epochs=5, learning_rate=0.02, batch_size=32, seed=seed)
        after = evaluate_mse(sgd_train(pv, cfg, tcfg, ds.view()), cfg, ds.view())
        assert after <= before


class TestEvaluate:
    def test_perfect_predictor(self):
        cfg = linear_cfg(1, 1, 2)
        pv = ParameterVector(np.array([1.0, 0.0, 2.0, 0.0, 0.0]), layout_for(cfg))
        ds = generate_synthetic(1, 1, 0, 2, 0.0, seed=1)

        class View:
            drug_idx = np.array([0])
            protein_idx = np.array([0])
            labels = np.array([2.0])

            def __len__(self):
                return 1

        assert evaluate_mse(pv, cfg, View()) == 0.0

    def test_zero_predictor_on_unit_labels(self):
        cfg = linear_cfg(2, 1, 2)
        pv = ParameterVector(np.zeros(2 * 2 + 2 + 1), layout_for(cfg))

        class View:
            drug_idx = np.array([0, 1])
            protein_idx = np.array([0, 0])
            labels = np.array([1.0, -1.0])

            def __len__(self):
                return 2

        assert evaluate_mse(pv, cfg, View()) == 1.0

    def test_constant_predictor_matches_summation_oracle(self):
        c = 0.37
        cfg = linear_cfg(4, 3, 2)
        pv = ParameterVector(np.zeros(4 * 2 + 3 * 2 + 1), layout_for(cfg))
        pv.tensors()["bias"][0] = c
        ds = generate_synthetic(4, 3, 60, 2, 0.5, seed=9)
        oracle = sum((c - y) ** 2 for y in ds.labels) / len(ds)
        assert abs(evaluate_mse(pv, cfg, ds.view()) - oracle) < 1e-12

    def test_empty_data(self):
        cfg = linear_cfg()
        ds = generate_synthetic(3, 2, 0, 2, 0.0, seed=1)
        with pytest.raises(ModelError):
            evaluate_mse(init_model(cfg, 0), cfg, ds.view())


class TestCheckpoint:
    @pytest.mark.parametrize("kind", ["linear", "two_tower_mlp"])
    def test_bit_exact_round_trip(self, tmp_path, kind):
        cfg = linear_cfg() if kind == "linear" else mlp_cfg()
        pv = init_model(cfg, seed=13)
        path = tmp_path / "model.params"
        save_params(pv, path)
        again = load_params(path)
        assert again.layout == pv.layout
        assert np.array_equal(again.values, pv.values)

    def test_layout_mismatch_rejected(self):
        with pytest.raises(ModelError):
            ParameterVector(np.zeros(5), [("x", (2, 3))])
