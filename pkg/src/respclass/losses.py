"""Pointwise losses and weighted empirical risk.

All functions accept scalars or arrays and broadcast.  Probability-valued
inputs are clamped to ``[EPS, 1 - EPS]``.
"""
from __future__ import annotations

import enum
import math

import numpy as np

from .core import DataError

EPS = 1e-12
LOG2 = math.log(2.0)


class LossKind(enum.Enum):
    HINGE = "hinge"
    LOGISTIC_SURROGATE = "logistic"
    GENERATIVE_NLL = "nll"
    WCE = "wce"
    ADJUSTED_NLL = "nll_adj"
    ZERO_ONE = "zero_one"


def _clamp(rho):
    return np.clip(rho, EPS, 1.0 - EPS)


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


def softplus(x):
    """``log(1 + exp(x))`` without overflow."""
    x = np.asarray(x, dtype=float)
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def hinge(score, z):
    return _out(np.maximum(0.0, 1.0 - np.multiply(z, score)))


def logistic_surrogate(score, z):
    """``log(1 + e^h) - (1 + z) h / 2``, the logistic loss on label ``z``."""
    h = np.asarray(score, dtype=float)
    pos = (1.0 + np.asarray(z, dtype=float)) / 2.0
    # for h > 0: softplus(h) - pos h = softplus(-h) + h (1 - pos)
    v = np.where(h > 0, softplus(-h) + h * (1.0 - pos), softplus(h) - pos * h)
    return _out(v)


def generative_nll(rho, z):
    """``-log P(Z = z | X)`` with ``P(Z = z | X) = (1 + z rho) / 2``."""
    rho = _clamp(np.asarray(rho, dtype=float))
    z = np.asarray(z, dtype=float)
    v = np.where(z > 0, LOG2 - np.log1p(rho), LOG2 - np.log1p(-rho))
    return _out(v)


def wce(rho, z):
    """Weighted cross-entropy at the 3:1 weighting, scaled by 1/3."""
    rho = _clamp(np.asarray(rho, dtype=float))
    z = np.asarray(z, dtype=float)
    v = -((1.0 - z) / 2.0) * np.log1p(-rho) - (1.0 / 3.0) * ((1.0 + z) / 2.0) * np.log(rho)
    return _out(v)


def adjusted_nll(rho, z):
    """Generative NLL with the constant ``log 2`` removed from the ``z = -1`` branch."""
    z = np.asarray(z, dtype=float)
    rho = _clamp(np.asarray(rho, dtype=float))
    v = np.where(z > 0, LOG2 - np.log1p(rho), -np.log1p(-rho))
    return _out(v)


def zero_one(pred, z):
    """Misclassification indicator in {0, 1} (affine remap of the ±1 convention)."""
    return _out((np.asarray(pred) != np.asarray(z)).astype(float))


_POINTWISE = {
    LossKind.HINGE: hinge,
    LossKind.LOGISTIC_SURROGATE: logistic_surrogate,
    LossKind.GENERATIVE_NLL: generative_nll,
    LossKind.WCE: wce,
    LossKind.ADJUSTED_NLL: adjusted_nll,
    LossKind.ZERO_ONE: zero_one,
}


def pointwise(kind: LossKind):
    return _POINTWISE[LossKind(kind)]


def weighted_empirical_risk(examples, values, kind: LossKind) -> float:
    """``(1/n) sum_i w_i loss(value_i, z_i)``.

    ``values`` are scores for the score-based losses, probabilities for the
    likelihood losses and ±1 predictions for ``ZERO_ONE``.
    """
    values = np.asarray(values, dtype=float).ravel()
    if values.size != len(examples):
        raise DataError(f"{values.size} values for {len(examples)} examples")
    if values.size == 0:
        raise DataError("no examples")
    return float(np.mean(examples.w * pointwise(kind)(values, examples.z)))
