import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from respclass.core import Constant, DataError, Dataset, GroundTruth
from respclass.evaluation import (ReplicationSummary, accuracy_vs_bayes, estimate_losses,
                                  exact_l_prime, exact_policy_value, losses_from_predictions,
                                  policy_value, true_losses)
from respclass.learners.models import ConstantClassifier, FunctionClassifier
from respclass.synthetic import ScenarioSpec, bayes_label, generate

from conftest import make_dataset

SIGN_X1 = FunctionClassifier(lambda X: np.where(X[:, 0] > 0, 1, -1), 2)


class TestEstimateLosses:
    def test_single_row_by_hand(self):
        ds = Dataset(np.zeros((1, 1)), [1], [1])
        rep = estimate_losses(ConstantClassifier(1, 1), ds, 0.5)
        assert rep.l_prime_hat == -1.0
        assert rep.l_theta_hat == 0.0

    def test_always_positive_at_zero_theta(self):
        ds = make_dataset(300, 2, 1)
        rep = estimate_losses(ConstantClassifier(1, 2), ds, 0.0)
        assert rep.fn_hat == 0.0 and rep.l_theta_hat == 0.0

    @given(st.integers(0, 2**31 - 1), st.floats(0, 1), st.sampled_from([None, "random", 0.3]))
    @settings(max_examples=60, deadline=None)
    def test_decomposition(self, seed, theta, e):
        ds = make_dataset(50, 2, seed, e=e)
        f = np.random.default_rng(seed).choice([-1, 1], size=50)
        rep = losses_from_predictions(f, ds.y * ds.t / ds.q, theta)
        assert abs(rep.l_theta_hat - (theta * rep.fp_hat + (1 - theta) * rep.fn_hat)) <= 1e-12

    def test_unbiased_small(self):
        vals = [estimate_losses(SIGN_X1, generate(ScenarioSpec("linear", 2, 1000, seed=s))[0], 0.5).l_theta_hat
                for s in range(60)]
        se = np.std(vals, ddof=1) / np.sqrt(len(vals))
        assert abs(np.mean(vals) - 0.075) <= 3 * se

    def test_empty(self):
        with pytest.raises(DataError, match="empty dataset"):
            estimate_losses(ConstantClassifier(1, 1), Dataset(np.zeros((0, 1)), [], []), 0.5)

    def test_unclipped(self):
        # one row can push the estimate outside [0, 1]
        ds = Dataset(np.zeros((1, 1)), [1], [-1], Constant(0.1))
        rep = estimate_losses(ConstantClassifier(1, 1), ds, 0.5)
        assert rep.fp_hat > 1


class TestAccuracy:
    spec = ScenarioSpec("linear", 2)

    def test_self_and_complement(self):
        X = np.random.default_rng(0).normal(size=(500, 2))
        bayes = FunctionClassifier(lambda Z: bayes_label(Z, self.spec), 2)
        anti = FunctionClassifier(lambda Z: -bayes_label(Z, self.spec), 2)
        assert accuracy_vs_bayes(bayes, X, self.spec) == 1.0
        assert accuracy_vs_bayes(anti, X, self.spec) == 0.0

    def test_constant_half(self):
        X = np.random.default_rng(1).normal(size=(40000, 2))
        assert accuracy_vs_bayes(ConstantClassifier(1, 2), X, self.spec) == pytest.approx(0.5, abs=0.01)


class TestPolicyValue:
    def test_all_responders(self):
        rng = np.random.default_rng(2)
        t = rng.choice([-1, 1], size=20000)
        ds = Dataset(rng.normal(size=(20000, 1)), t, t)
        assert policy_value(ConstantClassifier(1, 1), ds, 0.0) == pytest.approx(1.0, abs=0.03)

    def test_never_treat_has_no_cost_term(self):
        ds = make_dataset(100, 1, 3)
        v = policy_value(ConstantClassifier(-1, 1), ds, 0.7)
        assert v == pytest.approx(np.mean((ds.t == -1) * ds.y / ds.q))

    @pytest.mark.parametrize("e", [0.3, 0.5, 0.7])
    def test_identity_exact(self, e):
        _, gt = generate(ScenarioSpec("linear", 2, 1000, seed=4))
        rng = np.random.default_rng(5)
        for _ in range(5):
            w = rng.normal(size=2)
            clf = FunctionClassifier(lambda X, w=w: np.where(X @ w >= 0, 1, -1), 2)
            theta = float(rng.uniform())
            lhs = exact_l_prime(clf, gt, e, theta) + 2 * exact_policy_value(clf, gt, e, theta)
            rhs = float(np.mean(gt.y_plus + gt.y_minus)) - 2 * theta
            assert abs(lhs - rhs) <= 1e-12

    def test_identity_sampled(self):
        ds, gt = generate(ScenarioSpec("linear", 2, 100000, seed=6))
        lp = estimate_losses(SIGN_X1, ds, 0.5).l_prime_hat
        u = policy_value(SIGN_X1, ds, 0.5)
        assert lp + 2 * u == pytest.approx(np.mean(gt.y_plus + gt.y_minus) - 1.0, abs=0.05)


class TestTrueLosses:
    def test_sign_x1(self):
        _, gt = generate(ScenarioSpec("linear", 2, 100000, seed=7))
        loss, fp, fn = true_losses(SIGN_X1, gt, 0.5)
        assert loss == pytest.approx(0.075, abs=0.005)
        assert fp == pytest.approx(0.075, abs=0.005) and fn == pytest.approx(0.075, abs=0.005)

    def test_perfect_classifier(self):
        gt = GroundTruth(np.array([[1.0], [-1.0]]), np.array([1, 1]), np.array([-1, 1]), np.array([1, -1]),
                         np.array([1, 1]))
        clf = FunctionClassifier(lambda X: np.where(X[:, 0] > 0, 1, -1), 1)
        assert true_losses(clf, gt, 0.5) == (0.0, 0.0, 0.0)


class TestSummary:
    def test_singleton(self):
        s = ReplicationSummary.from_values("accuracy", [0.8])
        assert s.mean == s.percentile_10 == s.percentile_90 == 0.8

    def test_linear_percentiles(self):
        s = ReplicationSummary.from_values("accuracy", [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0])
        assert (s.percentile_10, s.percentile_90) == (1.0, 9.0)
        s = ReplicationSummary.from_values("accuracy", [0.0, 1.0])
        assert s.percentile_10 == pytest.approx(0.1)

    def test_failures_excluded(self):
        s = ReplicationSummary.from_values("accuracy", [0.5, float("nan"), 0.7], n_failed=1)
        assert s.mean == pytest.approx(0.6) and s.n_failed == 1 and len(s.values) == 2
