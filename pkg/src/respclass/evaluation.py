"""Unbiased loss and policy-value estimates, oracle accuracy, replication summaries."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from .core import DataError, Dataset, GroundTruth, as_theta
from .surrogate import signed_outcome
from .synthetic import ScenarioSpec, bayes_label


@dataclass(frozen=True)
class EvalReport:
    """Estimated losses of a classifier.

    Estimates are unbiased but unclipped, so finite-sample values can fall
    outside [0, 1].
    """

    l_theta_hat: float
    l_prime_hat: float
    fp_hat: float
    fn_hat: float
    n: int
    theta: float

    def as_row(self) -> dict:
        return {"n": self.n, "theta": self.theta, "l_theta_hat": self.l_theta_hat,
                "l_prime_hat": self.l_prime_hat, "fp_hat": self.fp_hat, "fn_hat": self.fn_hat}


def _predictions(classifier, X):
    f = np.asarray(classifier.predict(X), dtype=float)
    if f.shape != (X.shape[0],):
        raise DataError("classifier returned the wrong number of predictions")
    return f


def estimate_losses(classifier, ds: Dataset, theta) -> EvalReport:
    theta = as_theta(theta)
    if ds.n == 0:
        raise DataError("empty dataset")
    s = signed_outcome(ds)
    f = _predictions(classifier, ds.X)
    return losses_from_predictions(f, s, theta)


def losses_from_predictions(f, s, theta) -> EvalReport:
    """Loss estimates from predictions ``f`` and signals ``s = y t / Q``."""
    f = np.asarray(f, dtype=float)
    s = np.asarray(s, dtype=float)
    l_prime = float(np.mean(f * (2.0 * theta - s)))
    l_theta = 0.25 * l_prime + 0.25 * float(np.mean(2.0 * theta + (1.0 - 2.0 * theta) * s))
    fn = 0.25 * float(np.mean((1.0 - f) * s))
    fp = 0.25 * float(np.mean((1.0 + f) * (2.0 - s)))
    return EvalReport(l_theta, l_prime, fp, fn, int(f.size), float(theta))


def l_prime_score(classifier, ds: Dataset, theta) -> float:
    """Empirical ``L'_theta``; the cross-validation score."""
    return estimate_losses(classifier, ds, theta).l_prime_hat


def policy_value(classifier, ds: Dataset, theta) -> float:
    """IPW estimate of ``E[Y(f(X))] - 2 theta P(f(X) = +1)``."""
    theta = as_theta(theta)
    if ds.n == 0:
        raise DataError("empty dataset")
    f = _predictions(classifier, ds.X)
    follow = (ds.t == f).astype(float)
    return float(np.mean(follow * ds.y / ds.q) - 2.0 * theta * np.mean(f > 0))


# ---------------------------------------------------------------------------
# exact expectations over the treatment coin, from full potential outcomes

def _t_expectation(gt: GroundTruth, e, g):
    """``E_T[g(t, y(t), Q)]`` with ``P(T=+1) = e``, summed over both arms."""
    e = np.broadcast_to(np.asarray(e, dtype=float), (len(gt),))
    return e * g(1, gt.y_plus.astype(float), e) + (1 - e) * g(-1, gt.y_minus.astype(float), 1 - e)


def exact_l_prime(classifier, gt: GroundTruth, e, theta) -> float:
    """Mean over units of ``E_T[f (2 theta - Y T / Q)]``."""
    theta = as_theta(theta)
    f = _predictions(classifier, gt.X)
    per = _t_expectation(gt, e, lambda t, y, q: f * (2.0 * theta - y * t / q))
    return float(np.mean(per))


def exact_policy_value(classifier, gt: GroundTruth, e, theta) -> float:
    """Mean over units of ``E_T[1{T=f} Y / Q] - 2 theta 1{f=+1}``."""
    theta = as_theta(theta)
    f = _predictions(classifier, gt.X)
    per = _t_expectation(gt, e, lambda t, y, q: (f == t) * y / q)
    return float(np.mean(per - 2.0 * theta * (f > 0)))


def true_losses(classifier, gt: GroundTruth, theta) -> tuple:
    """Realised ``(L_theta, FP, FN)`` against the latent responder labels."""
    theta = as_theta(theta)
    f = _predictions(classifier, gt.X)
    fp = float(np.mean((f > 0) & (gt.r < 0)))
    fn = float(np.mean((f < 0) & (gt.r > 0)))
    return theta * fp + (1 - theta) * fn, fp, fn


def accuracy_vs_bayes(classifier, X, spec: ScenarioSpec, theta=0.5) -> float:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    target = bayes_label(X, spec, theta)
    return float(np.mean(_predictions(classifier, X) == target))


# ---------------------------------------------------------------------------
# aggregation

@dataclass
class ReplicationSummary:
    metric: str
    mean: float
    percentile_10: float
    percentile_90: float
    values: List[float] = field(default_factory=list)
    n_failed: int = 0
    label: dict = field(default_factory=dict)

    @classmethod
    def from_values(cls, metric: str, values: Sequence[float], n_failed: int = 0, **label):
        v = np.asarray([x for x in values if np.isfinite(x)], dtype=float)
        if v.size == 0:
            nan = float("nan")
            return cls(metric, nan, nan, nan, [], n_failed, label)
        p10, p90 = np.percentile(v, [10, 90], method="linear")
        return cls(metric, float(v.mean()), float(p10), float(p90), v.tolist(), n_failed, label)
