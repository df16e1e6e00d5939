"""Weighted corrupted-label view of experimental data."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DataError, Dataset, _frozen, as_theta


@dataclass(frozen=True)
class SurrogateData:
    """Examples ``(x_i, z_i, w_i)``; ``z`` in {-1, +1}, ``w >= 0``.

    The ``w`` slot holds the surrogate weight ``|YT/Q - 2 theta|`` when built
    by :func:`to_surrogate` and the pseudo-population weight ``1/Q`` when
    built by :func:`generative_examples`.
    """

    X: np.ndarray
    z: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        z = np.asarray(self.z).astype(np.int8).ravel()
        w = np.asarray(self.w, dtype=float).ravel()
        if not (X.shape[0] == z.size == w.size):
            raise DataError("X, z and w lengths differ")
        if np.any(w < 0):
            raise DataError("weights must be nonnegative")
        if not np.all(np.isin(z, (-1, 1))):
            raise DataError("surrogate labels must be ±1")
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "z", _frozen(z))
        object.__setattr__(self, "w", _frozen(w))

    def __len__(self):
        return self.z.size

    def subset(self, idx) -> "SurrogateData":
        return SurrogateData(self.X[idx], self.z[idx], self.w[idx])


def signed_outcome(ds: Dataset) -> np.ndarray:
    """``s_i = y_i t_i / Q_i``, the per-row unbiased effect signal."""
    return ds.y * ds.t / ds.q


def to_surrogate(ds: Dataset, theta) -> SurrogateData:
    theta = as_theta(theta)
    s = signed_outcome(ds) - 2.0 * theta
    # s == 2 theta carries zero weight, so z=+1 there is inert
    z = np.where(s >= 0.0, 1, -1)
    return SurrogateData(ds.X, z, np.abs(s))


def pseudo_population(ds: Dataset) -> np.ndarray:
    """Weights ``1/Q`` under which treatment is a fair coin in every stratum."""
    return 1.0 / ds.q


def generative_examples(ds: Dataset) -> SurrogateData:
    """Pairs ``(x, z = y t)`` with pseudo-population weights, for the likelihood learners."""
    return SurrogateData(ds.X, ds.y * ds.t, pseudo_population(ds))


def balanced_theta(ds: Dataset) -> float:
    """Theta at which always-positive and always-negative have equal estimated loss.

    With ``Q = 1/2`` this is the sample mean of ``Z = YT``.  The result is
    clamped to [0, 1].
    """
    if ds.n == 0:
        raise DataError("empty dataset")
    raw = float(np.mean(signed_outcome(ds) / 2.0))
    return min(1.0, max(0.0, raw))
