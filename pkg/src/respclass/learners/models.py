"""Scorers (real-valued functions of x) and the ±1 classifiers built from them."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..core import DataError, as_theta


def _check_dim(X, d):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] != d:
        raise DataError(f"feature dimension {X.shape[1]} does not match model dimension {d}")
    return X


def sign(v) -> np.ndarray:
    """Elementwise sign with ``sign(0) = +1``."""
    return np.where(np.asarray(v) >= 0, 1, -1).astype(np.int8)


# ---------------------------------------------------------------------------
# kernels

@dataclass(frozen=True)
class KernelSpec:
    kind: str = "linear"
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("linear", "rbf"):
            raise ValueError(f"unknown kernel {self.kind!r}")
        if self.kind == "rbf" and not self.gamma > 0:
            raise ValueError("rbf gamma must be positive")

    @classmethod
    def rbf_from_lengthscale(cls, lengthscale: float) -> "KernelSpec":
        return cls("rbf", 1.0 / (2.0 * lengthscale**2))

    @property
    def code(self) -> int:
        return 0 if self.kind == "linear" else 1

    def matrix(self, A, B) -> np.ndarray:
        A = np.asarray(A, dtype=float)
        B = np.asarray(B, dtype=float)
        if self.kind == "linear":
            return A @ B.T
        sq = (np.einsum("ij,ij->i", A, A)[:, None] + np.einsum("ij,ij->i", B, B)[None, :]
              - 2.0 * A @ B.T)
        return np.exp(-self.gamma * np.maximum(sq, 0.0))


def Linear() -> KernelSpec:
    return KernelSpec("linear")


def Rbf(gamma: float) -> KernelSpec:
    return KernelSpec("rbf", gamma)


# ---------------------------------------------------------------------------
# scorers

@dataclass
class LinearScorer:
    weights: np.ndarray
    bias: float = 0.0

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        self.bias = float(self.bias)

    @property
    def d(self) -> int:
        return self.weights.size

    def score(self, X) -> np.ndarray:
        return _check_dim(X, self.d) @ self.weights + self.bias


@dataclass
class KernelScorer:
    """``h(x) = sum_i c_i k(sv_i, x) + b`` with signed dual coefficients ``c_i``."""

    support_vectors: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    kernel: KernelSpec
    # solver diagnostics; not serialized
    converged: bool = True
    n_iter: int = 0
    kkt_gap: float = 0.0
    dual_objective: float = float("nan")

    def __post_init__(self):
        self.support_vectors = np.atleast_2d(np.asarray(self.support_vectors, dtype=float))
        self.dual_coefs = np.asarray(self.dual_coefs, dtype=float).ravel()
        if self.support_vectors.shape[0] != self.dual_coefs.size:
            raise ValueError("one dual coefficient per support vector required")

    @property
    def d(self) -> int:
        return self.support_vectors.shape[1]

    def score(self, X, chunk: int = 4096) -> np.ndarray:
        X = _check_dim(X, self.d)
        out = np.empty(X.shape[0])
        for s in range(0, X.shape[0], chunk):
            K = self.kernel.matrix(X[s:s + chunk], self.support_vectors)
            out[s:s + chunk] = K @ self.dual_coefs + self.bias
        return out

    def to_linear(self) -> LinearScorer:
        if self.kernel.kind != "linear":
            raise ValueError("only a linear-kernel scorer has a primal weight vector")
        return LinearScorer(self.dual_coefs @ self.support_vectors, self.bias)


def elu(x):
    return np.where(x > 0, x, np.expm1(np.minimum(x, 0.0)))


def sigmoid(x):
    x = np.asarray(x, dtype=float)
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


@dataclass
class MlpScorer:
    """Feed-forward net with ELU interior layers and a scalar output.

    ``head`` is ``"identity"`` (a score) or ``"sigmoid"`` (a probability).
    """

    weights: List[np.ndarray]
    biases: List[np.ndarray]
    head: str = "identity"

    def __post_init__(self):
        if self.head not in ("identity", "sigmoid"):
            raise ValueError(f"unknown head {self.head!r}")
        self.weights = [np.asarray(W, dtype=float) for W in self.weights]
        self.biases = [np.asarray(b, dtype=float).ravel() for b in self.biases]
        for k, (W, b) in enumerate(zip(self.weights, self.biases)):
            if W.shape[1] != b.size:
                raise ValueError(f"layer {k}: weight/bias shapes disagree")
            if k and self.weights[k - 1].shape[1] != W.shape[0]:
                raise ValueError(f"layer {k}: input dimension mismatch")
        if self.weights[-1].shape[1] != 1:
            raise ValueError("output layer must have one unit")

    @property
    def layer_sizes(self) -> List[int]:
        return [self.weights[0].shape[0]] + [W.shape[1] for W in self.weights]

    @property
    def d(self) -> int:
        return self.weights[0].shape[0]

    def logit(self, X) -> np.ndarray:
        a = _check_dim(X, self.d)
        last = len(self.weights) - 1
        for k, (W, b) in enumerate(zip(self.weights, self.biases)):
            a = a @ W + b
            if k < last:
                a = elu(a)
        return a[:, 0]

    def score(self, X) -> np.ndarray:
        s = self.logit(X)
        return sigmoid(s) if self.head == "sigmoid" else s


@dataclass
class ConstantScorer:
    value: float
    d: int

    def score(self, X) -> np.ndarray:
        return np.full(_check_dim(X, self.d).shape[0], float(self.value))


# ---------------------------------------------------------------------------
# classifiers

@dataclass
class ScoreThreshold:
    """``sign(h(x))``."""

    scorer: object

    @property
    def d(self):
        return self.scorer.d

    def decision(self, X):
        return self.scorer.score(X)

    def predict(self, X):
        return sign(self.decision(X))


@dataclass
class ProbThreshold:
    """``sign(rho(x) - theta)`` for a probability model of responder status."""

    model: object
    theta: float = 0.5

    def __post_init__(self):
        self.theta = as_theta(self.theta)

    @property
    def d(self):
        return self.model.d

    def decision(self, X):
        return self.model.score(X) - self.theta

    def predict(self, X):
        return sign(self.decision(X))


@dataclass
class CatePlugin:
    """``sign(tau(x) - 2 theta)`` with ``tau = 2 (p_treated - p_control)``."""

    treated: object
    control: object
    theta: float = 0.5

    def __post_init__(self):
        self.theta = as_theta(self.theta)

    @property
    def d(self):
        return self.treated.d

    def tau(self, X):
        return 2.0 * (self.treated.score(X) - self.control.score(X))

    def decision(self, X):
        return self.tau(X) - 2.0 * self.theta

    def predict(self, X):
        return sign(self.decision(X))


@dataclass
class ConstantClassifier:
    value: int
    d: int

    def __post_init__(self):
        if self.value not in (-1, 1):
            raise ValueError("constant prediction must be ±1")

    def decision(self, X):
        return np.full(_check_dim(X, self.d).shape[0], float(self.value))

    def predict(self, X):
        return sign(self.decision(X))


@dataclass
class FunctionClassifier:
    """Wraps a callable ``X -> decision values``; for oracles and tests."""

    fn: object
    d: Optional[int] = None

    def decision(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.d is not None:
            X = _check_dim(X, self.d)
        return np.asarray(self.fn(X), dtype=float)

    def predict(self, X):
        return sign(self.decision(X))


def predict(classifier, X) -> np.ndarray:
    return classifier.predict(X)
