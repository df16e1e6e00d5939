"""T-learner plug-in baseline: one logistic regression per treatment arm."""
from __future__ import annotations

import numpy as np

from ..core import Dataset
from .mlp import TrainConfig, fit_mlp
from .models import CatePlugin, ConstantScorer, MlpScorer


def _arm_model(X, y, d, cfg):
    n = y.size
    pos = int(np.sum(y > 0))
    if n == 0 or pos in (0, n):
        # Laplace-smoothed base rate
        return ConstantScorer((pos + 1.0) / (n + 2.0), d)
    Ws, bs, _ = fit_mlp(X, y, np.ones(n), [], "disc", cfg)
    return MlpScorer(Ws, bs, head="sigmoid")


def train_tlearner_lr(ds: Dataset, theta=0.5, cfg: TrainConfig = TrainConfig()) -> CatePlugin:
    """Fit ``P(Y=+1 | x, T=t)`` per arm and threshold ``2 (p+ - p-)`` at ``2 theta``."""
    treated = ds.t > 0
    m_plus = _arm_model(ds.X[treated], ds.y[treated], ds.d, cfg)
    m_minus = _arm_model(ds.X[~treated], ds.y[~treated], ds.d, cfg)
    return CatePlugin(m_plus, m_minus, theta)

