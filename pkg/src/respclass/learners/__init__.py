"""Responder classifiers and the name-based registry used by the CLI and benchmarks."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from ..core import DataError, Dataset, as_theta
from ..surrogate import generative_examples, to_surrogate
from .cv import CVResult, cross_validate
from .mlp import TrainConfig, hidden_layers, train_resp_disc, train_resp_gen
from .models import (CatePlugin, ConstantClassifier, KernelScorer, KernelSpec, LinearScorer,
                     MlpScorer, ProbThreshold, ScoreThreshold, predict)
from .svm import DEFAULT_C_GRID, DEFAULT_GAMMA_GRID, train_respsvm
from .tlearner import train_tlearner_lr

log = logging.getLogger(__name__)

LEARNERS = (
    "respsvm-linear", "respsvm-rbf",
    "resplr-disc", "resplr-gen", "respnet-disc", "respnet-gen",
    "tlearner-lr", "constant-pos", "constant-neg",
)


@dataclass
class FitResult:
    classifier: object
    learner: str
    theta: float
    params: dict = field(default_factory=dict)
    cv: Optional[CVResult] = None
    train_loss: Optional[float] = None


def _arch(name: str) -> str:
    return "linear" if name.startswith("resplr") else "net"


def _svm_classifier(ds: Dataset, theta: float, kernel: KernelSpec, C: float, tol: float):
    ex = to_surrogate(ds, theta)
    try:
        return ScoreThreshold(train_respsvm(ex, kernel, C, tol=tol))
    except DataError:
        # one surrogate label carries all the weight: predict it everywhere
        pos = float(ex.w[ex.z > 0].sum())
        neg = float(ex.w[ex.z < 0].sum())
        return ConstantClassifier(1 if pos >= neg else -1, ds.d)


def svm_grid(kernel: str, d: int, Cs: Sequence[float] = DEFAULT_C_GRID,
             gammas: Sequence[float] = DEFAULT_GAMMA_GRID) -> list:
    """Grid ordered from strongest to weakest regularization (C first, then gamma)."""
    if kernel == "linear":
        return [{"C": c} for c in sorted(Cs)]
    return [{"C": c, "gamma": g / d} for c in sorted(Cs) for g in sorted(gammas)]


def fit_learner(name: str, ds: Dataset, theta=0.5, *, cv: int = 5, C: Optional[float] = None,
                gamma: Optional[float] = None, Cs: Sequence[float] = DEFAULT_C_GRID,
                gammas: Sequence[float] = DEFAULT_GAMMA_GRID, tol: float = 1e-3,
                cfg: TrainConfig = TrainConfig(), seed: int = 0) -> FitResult:
    """Train learner ``name`` on ``ds`` for false-positive weight ``theta``.

    SVM learners choose ``C`` (and ``gamma``) by ``cv``-fold CV unless both
    are given explicitly; ``cv=0`` with missing values uses ``C=1`` and
    ``gamma=1/d``.
    """
    theta = as_theta(theta)
    name = name.lower()
    if name not in LEARNERS:
        raise ValueError(f"unknown learner {name!r}; choose from {', '.join(LEARNERS)}")
    cfg = replace(cfg, seed=seed)
    if name.startswith("respsvm"):
        kind = name.split("-")[1]
        fixed = C is not None and (kind == "linear" or gamma is not None)
        if fixed or cv == 0:
            params = {"C": 1.0 if C is None else C}
            if kind == "rbf":
                params["gamma"] = 1.0 / ds.d if gamma is None else gamma
            cvres = None
        else:
            def fit(train, C, gamma=None):
                return _svm_classifier(train, theta, KernelSpec(kind, gamma or 1.0), C, tol)

            grid = svm_grid(kind, ds.d, [C] if C is not None else Cs,
                            [gamma * ds.d] if gamma is not None else gammas)
            cvres = cross_validate(ds, fit, grid, theta, k=cv, seed=seed)
            params = cvres.best
            log.info("cv selected %s", params)
        clf = _svm_classifier(ds, theta, KernelSpec(kind, params.get("gamma", 1.0)), params["C"], tol)
        return FitResult(clf, name, theta, params, cvres)
    if name in ("resplr-disc", "respnet-disc"):
        model = train_resp_disc(to_surrogate(ds, theta), hidden_layers(_arch(name), ds.d), cfg)
        return FitResult(ScoreThreshold(model), name, theta, {}, None, model.train_loss)
    if name in ("resplr-gen", "respnet-gen"):
        model = train_resp_gen(generative_examples(ds), hidden_layers(_arch(name), ds.d), cfg)
        return FitResult(ProbThreshold(model, theta), name, theta, {}, None, model.train_loss)
    if name == "tlearner-lr":
        return FitResult(train_tlearner_lr(ds, theta, cfg), name, theta)
    return FitResult(ConstantClassifier(1 if name == "constant-pos" else -1, ds.d), name, theta)


__all__ = [
    "LEARNERS", "FitResult", "fit_learner", "svm_grid", "cross_validate", "CVResult",
    "TrainConfig", "train_resp_disc", "train_resp_gen", "train_respsvm", "train_tlearner_lr",
    "KernelSpec", "KernelScorer", "LinearScorer", "MlpScorer", "ScoreThreshold", "ProbThreshold",
    "CatePlugin", "ConstantClassifier", "predict",
]
