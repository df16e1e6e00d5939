import math

import numpy as np
import pytest

from respclass.core import DataError, NumericError
from respclass.learners.mlp import (TrainConfig, fit_mlp, hidden_layers, init_params, objective,
                                   train_resp_disc, train_resp_gen)
from respclass.learners.models import MlpScorer
from respclass.surrogate import SurrogateData, generative_examples, to_surrogate
from respclass.synthetic import ScenarioSpec, generate

from oracles import numeric_grad


def rel_err(a, b):
    a = np.concatenate([x.ravel() for x in a])
    b = np.concatenate([x.ravel() for x in b])
    return np.linalg.norm(a - b) / max(np.linalg.norm(a), np.linalg.norm(b), 1e-300)


class TestGradient:
    @pytest.mark.parametrize("head", ["disc", "gen"])
    @pytest.mark.parametrize("arch", ["linear", "net"])
    @pytest.mark.parametrize("seed", [0, 1, 2])
    @pytest.mark.parametrize("lam", [0.0, 0.01])
    def test_backprop_vs_central_differences(self, head, arch, seed, lam):
        rng = np.random.default_rng(seed)
        d = 3
        X = rng.normal(size=(25, d))
        z = rng.choice([-1.0, 1.0], size=25)
        c = rng.uniform(0.5, 3, size=25)
        Ws, bs = init_params([d, *hidden_layers(arch, d), 1], rng)
        bs = [b + rng.normal(scale=0.1, size=b.shape) for b in bs]
        _, gW, gb = objective(Ws, bs, X, z, c, head, lam, 0.7)
        num = numeric_grad(lambda: objective(Ws, bs, X, z, c, head, lam, 0.7, with_grad=False), Ws + bs)
        assert rel_err(gW + gb, num) <= 1e-5


class TestForward:
    def test_zero_weights(self):
        X = np.random.default_rng(0).normal(size=(10, 2))
        sizes = [2, 4, 2, 1]
        Ws = [np.zeros((a, b)) for a, b in zip(sizes[:-1], sizes[1:])]
        bs = [np.zeros(b) for b in sizes[1:]]
        assert np.all(MlpScorer(Ws, bs, "identity").score(X) == 0)
        assert np.all(MlpScorer(Ws, bs, "sigmoid").score(X) == 0.5)

    def test_layer_sizes(self):
        assert hidden_layers("net", 5) == [10, 5] and hidden_layers("linear", 5) == []
        with pytest.raises(ValueError):
            hidden_layers("deep", 2)


class TestDisc:
    def test_logistic_sanity(self):
        x = np.linspace(-2, 2, 200).reshape(-1, 1)
        ex = SurrogateData(x, np.where(x[:, 0] >= 0, 1, -1), np.ones(200))
        m = train_resp_disc(ex, [], TrainConfig(epochs=50, lr=0.05))
        assert m.weights[0][0, 0] > 0 and m.train_loss < math.log(2)

    def test_single_class_diverges_without_penalty(self):
        X = np.random.default_rng(0).normal(size=(50, 1))
        ex = SurrogateData(X, np.ones(50, dtype=int), np.ones(50))
        short = train_resp_disc(ex, [], TrainConfig(epochs=20, lr=0.1)).score(np.zeros((1, 1)))[0]
        long = train_resp_disc(ex, [], TrainConfig(epochs=200, lr=0.1)).score(np.zeros((1, 1)))[0]
        assert long > short > 0

    def test_single_class_bounded_with_penalty(self):
        X = np.random.default_rng(0).normal(size=(50, 1))
        ex = SurrogateData(X, np.ones(50, dtype=int), np.ones(50))
        a = train_resp_disc(ex, [], TrainConfig(epochs=300, lr=0.1, lam=0.5)).score(np.ones((1, 1)))[0]
        b = train_resp_disc(ex, [], TrainConfig(epochs=600, lr=0.1, lam=0.5)).score(np.ones((1, 1)))[0]
        assert 0 < a and abs(a - b) < 0.05

    def test_deterministic(self):
        ds, _ = generate(ScenarioSpec("linear", 2, 300, seed=1))
        ex = to_surrogate(ds, 0.5)
        a = train_resp_disc(ex, [4, 2], TrainConfig(epochs=5, seed=3))
        b = train_resp_disc(ex, [4, 2], TrainConfig(epochs=5, seed=3))
        for wa, wb in zip(a.weights, b.weights):
            np.testing.assert_array_equal(wa, wb)

    def test_full_batch_option(self):
        ds, _ = generate(ScenarioSpec("linear", 2, 100, seed=1))
        m = train_resp_disc(to_surrogate(ds, 0.5), [], TrainConfig(epochs=3, batch_size=None))
        assert np.isfinite(m.train_loss)

    def test_nonfinite_aborts(self):
        X = np.array([[np.nan], [1.0]])
        with pytest.raises(NumericError):
            fit_mlp(X, np.array([1.0, -1.0]), np.ones(2), [], "disc", TrainConfig(epochs=1))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(epochs=0)
        with pytest.raises(ValueError):
            TrainConfig(lr=0)


class TestGen:
    def test_all_positive(self):
        X = np.random.default_rng(1).normal(size=(100, 1))
        ex = SurrogateData(X, np.ones(100, dtype=int), np.full(100, 2.0))
        m = train_resp_gen(ex, [], TrainConfig(epochs=200, lr=0.1))
        assert np.all(m.score(X) > 0.9)

    def test_all_negative(self):
        X = np.random.default_rng(1).normal(size=(100, 1))
        ex = SurrogateData(X, -np.ones(100, dtype=int), np.full(100, 2.0))
        m = train_resp_gen(ex, [], TrainConfig(epochs=200, lr=0.1))
        assert np.all(m.score(X) < 0.1)
        assert m.train_loss == pytest.approx(math.log(2), abs=0.02)

    def test_crosses_half_at_origin(self):
        ds, _ = generate(ScenarioSpec("linear", 1, 4000, seed=2))
        m = train_resp_gen(generative_examples(ds), [], TrainConfig())
        w, b = m.weights[0][0, 0], m.biases[0][0]
        assert w > 0 and abs(-b / w) < 0.3

    def test_rejects_zero_weights(self):
        ex = SurrogateData(np.zeros((2, 1)), [1, -1], [0, 0])
        with pytest.raises(DataError):
            train_resp_gen(ex)
