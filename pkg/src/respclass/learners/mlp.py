"""Sample-weighted feed-forward learners trained by Adam.

Two objectives share one backprop path:

* ``disc`` -- weighted logistic surrogate on the raw output (RespLR/RespNet-disc,
  and plain logistic regression when all weights are one);
* ``gen``  -- weighted responder likelihood ``-log((1 + z sigmoid(s)) / 2)``
  (RespLR/RespNet-gen).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from ..core import DataError, NumericError
from ..losses import LOG2, softplus
from ..surrogate import SurrogateData
from .models import MlpScorer, sigmoid


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: Optional[int] = 32  # None = full batch
    seed: int = 0
    lam: float = 0.0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if not self.lr > 0:
            raise ValueError("step size must be positive")
        if self.lam < 0:
            raise ValueError("regularization strength must be nonnegative")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch size must be positive")


def hidden_layers(arch: str, d: int) -> List[int]:
    """``"linear"`` -> no hidden layers; ``"net"`` -> ``[2d, d]``."""
    if arch in ("linear", "lr"):
        return []
    if arch in ("net", "mlp"):
        return [2 * d, d]
    raise ValueError(f"unknown architecture {arch!r}")


def init_params(layer_sizes: Sequence[int], rng: np.random.Generator):
    Ws, bs = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        lim = math.sqrt(6.0 / (fan_in + fan_out))
        Ws.append(rng.uniform(-lim, lim, size=(fan_in, fan_out)))
        bs.append(np.zeros(fan_out))
    return Ws, bs


# ---------------------------------------------------------------------------
# loss heads on the output logit s: value and d/ds

def _disc(s, z):
    pos = (1.0 + z) / 2.0
    val = softplus(s) - pos * s
    return val, sigmoid(s) - pos


def _gen(s, z):
    p = sigmoid(s)
    # z=+1: log2 - log(1 + p);  z=-1: log2 - log(1 - p) = log2 + softplus(s)
    val = LOG2 + np.where(z > 0, -np.log1p(p), softplus(s))
    grad = np.where(z > 0, -p * (1.0 - p) / (1.0 + p), p)
    return val, grad


HEADS = {"disc": _disc, "gen": _gen}


def objective(Ws, bs, X, z, c, head: str, lam: float = 0.0, scale: float = 1.0, with_grad=True):
    """``scale * mean(c * loss) + lam * (sum ||W||^2 + sum ||b||^2)`` and its gradient.

    Biases are penalized too, so a single-class problem has a finite optimum
    whenever ``lam > 0``.
    """
    acts = [X]
    pre = []
    a = X
    last = len(Ws) - 1
    for k, (W, b) in enumerate(zip(Ws, bs)):
        h = a @ W + b
        pre.append(h)
        a = np.where(h > 0, h, np.expm1(np.minimum(h, 0.0))) if k < last else h
        acts.append(a)
    s = a[:, 0]
    val, dval = HEADS[head](s, z)
    n = X.shape[0]
    penalty = sum(float(np.sum(W * W)) for W in Ws) + sum(float(np.sum(b * b)) for b in bs)
    loss = scale * float(np.sum(c * val)) / n + lam * penalty
    if not with_grad:
        return loss
    delta = (scale * c * dval / n)[:, None]
    gW = [None] * len(Ws)
    gb = [None] * len(Ws)
    for k in range(last, -1, -1):
        gW[k] = acts[k].T @ delta + 2.0 * lam * Ws[k]
        gb[k] = delta.sum(axis=0) + 2.0 * lam * bs[k]
        if k:
            h = pre[k - 1]
            delta = (delta @ Ws[k].T) * np.where(h > 0, 1.0, np.exp(np.minimum(h, 0.0)))
    return loss, gW, gb


def fit_mlp(X, z, c, hidden: Sequence[int], head: str, cfg: TrainConfig, scale: float = 1.0):
    """Adam on shuffled minibatches; returns ``(weights, biases, final full-data loss)``."""
    X = np.asarray(X, dtype=float)
    z = np.asarray(z, dtype=float)
    c = np.asarray(c, dtype=float)
    n, d = X.shape
    if n == 0:
        raise DataError("no training examples")
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    Ws, bs = init_params([d, *hidden, 1], rng)
    params = Ws + bs
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    bsz = n if cfg.batch_size is None else min(cfg.batch_size, n)
    b1, b2, lr, eps = cfg.beta1, cfg.beta2, cfg.lr, cfg.eps
    step = 0
    L = len(Ws)
    for _ in range(cfg.epochs):
        order = rng.permutation(n) if bsz < n else np.arange(n)
        for start in range(0, n, bsz):
            idx = order[start:start + bsz]
            loss, gW, gb = objective(Ws, bs, X[idx], z[idx], c[idx], head, cfg.lam, scale)
            if not math.isfinite(loss):
                raise NumericError(f"non-finite training loss at Adam step {step}")
            step += 1
            a1 = lr * math.sqrt(1.0 - b2**step) / (1.0 - b1**step)
            for k, g in enumerate(gW + gb):
                m[k] *= b1
                m[k] += (1.0 - b1) * g
                v[k] *= b2
                v[k] += (1.0 - b2) * g * g
                params[k] -= a1 * m[k] / (np.sqrt(v[k]) + eps)
        Ws, bs = params[:L], params[L:]
    final = objective(Ws, bs, X, z, c, head, cfg.lam, scale, with_grad=False)
    if not math.isfinite(final):
        raise NumericError("non-finite final training loss")
    return Ws, bs, final


def train_resp_disc(examples: SurrogateData, hidden: Sequence[int] = (), cfg: TrainConfig = TrainConfig()):
    """Minimize ``(1/n) sum w_i logistic(h(x_i), z_i) + lam ||params||^2``; identity head."""
    Ws, bs, loss = fit_mlp(examples.X, examples.z, examples.w, hidden, "disc", cfg)
    model = MlpScorer(Ws, bs, head="identity")
    model.train_loss = loss
    return model


def train_resp_gen(examples: SurrogateData, hidden: Sequence[int] = (), cfg: TrainConfig = TrainConfig()):
    """Weighted maximum likelihood for ``rho``; sigmoid head.

    ``examples`` carry ``z = y t`` and pseudo-population weights (see
    :func:`respclass.surrogate.generative_examples`); the weighted mean is
    normalised by the average weight.
    """
    w = examples.w
    if not np.any(w > 0):
        raise DataError("all pseudo-population weights are zero")
    Ws, bs, loss = fit_mlp(examples.X, examples.z, w, hidden, "gen", cfg, scale=1.0 / float(np.mean(w)))
    model = MlpScorer(Ws, bs, head="sigmoid")
    model.train_loss = loss
    return model
