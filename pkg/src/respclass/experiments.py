"""Seeded replication harness for the synthetic scenarios.

Each ``(learner, n, replication)`` cell trains on a fresh draw and is scored
against the Bayes labels of an independent test draw.  All learners share the
training draw of a given ``(n, replication)``.  Seeds come from
``SeedSequence(seed, spawn_key=...)`` so a cell's result does not depend on
which worker ran it or in what order.
"""
from __future__ import annotations

import logging
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import write_rows
from .evaluation import ReplicationSummary, accuracy_vs_bayes, true_losses
from .learners import LEARNERS, fit_learner
from .learners.mlp import TrainConfig
from .synthetic import Scenario, ScenarioSpec, generate

log = logging.getLogger(__name__)

_DATA, _TEST, _FIT = 0, 1, 2


@dataclass(frozen=True)
class ExperimentSpec:
    scenario: str
    d: int
    learners: Tuple[str, ...]
    n_grid: Tuple[int, ...]
    replications: int
    seed: int = 0
    n_test: int = 10000
    theta: float = 0.5
    cv: int = 5
    cfg: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        object.__setattr__(self, "learners", tuple(s.lower() for s in self.learners))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        Scenario(self.scenario)
        if not self.learners or not self.n_grid:
            raise ValueError("need at least one learner and one sample size")
        for name in self.learners:
            if name not in LEARNERS:
                raise ValueError(f"unknown learner {name!r}; choose from {', '.join(LEARNERS)}")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if min(self.n_grid) < 2 or self.n_test < 1:
            raise ValueError("sample sizes must be positive")
        # fail early on an invalid dimension
        ScenarioSpec(self.scenario, self.d, 1)


@dataclass(frozen=True)
class ReplicationRecord:
    learner: str
    n: int
    replication: int
    accuracy: float
    true_loss: float
    params: str = ""
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def cell_seed(seed: int, n: int, rep: int, role: int) -> int:
    ss = np.random.SeedSequence(seed, spawn_key=(n, rep, role))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_cell(spec: ExperimentSpec, learner: str, n: int, rep: int) -> ReplicationRecord:
    """Train and score a single cell; failures are captured, not raised."""
    try:
        ds, _ = generate(ScenarioSpec(spec.scenario, spec.d, n, cell_seed(spec.seed, n, rep, _DATA)))
        test = ScenarioSpec(spec.scenario, spec.d, spec.n_test, cell_seed(spec.seed, n, rep, _TEST))
        _, gt = generate(test)
        fit_seed = cell_seed(spec.seed, n, rep, _FIT) % (2**31)
        res = fit_learner(learner, ds, spec.theta, cv=spec.cv, cfg=spec.cfg, seed=fit_seed)
        acc = accuracy_vs_bayes(res.classifier, gt.X, test, spec.theta)
        loss = true_losses(res.classifier, gt, spec.theta)[0]
        params = " ".join(f"{k}={v:g}" for k, v in sorted(res.params.items()))
        return ReplicationRecord(learner, n, rep, acc, loss, params)
    except Exception as exc:  # recorded per replication; the run continues
        log.warning("%s n=%d rep=%d failed: %s", learner, n, rep, exc)
        log.debug("%s", traceback.format_exc())
        return ReplicationRecord(learner, n, rep, float("nan"), float("nan"), "",
                                 f"{type(exc).__name__}: {exc}")


def _run_cell_args(args):
    return run_cell(*args)


def worker_count(requested: Optional[int] = None) -> int:
    cap = os.environ.get("RESPCLASS_THREADS")
    n = requested or os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def run_experiment(spec: ExperimentSpec, workers: Optional[int] = None) -> List[ReplicationRecord]:
    """All cells ordered by (learner, n, replication)."""
    cells = [(spec, learner, n, rep) for learner in spec.learners for n in spec.n_grid
             for rep in range(spec.replications)]
    workers = min(worker_count(workers), len(cells))
    if workers <= 1:
        return [run_cell(*c) for c in cells]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves input order regardless of completion order
        return list(pool.map(_run_cell_args, cells))


def summarize(records: Sequence[ReplicationRecord], metric: str = "accuracy") -> List[ReplicationSummary]:
    groups = {}
    for r in records:
        groups.setdefault((r.learner, r.n), []).append(r)
    out = []
    for (learner, n), recs in groups.items():
        vals = [getattr(r, metric) for r in recs if r.ok]
        failed = sum(not r.ok for r in recs)
        out.append(ReplicationSummary.from_values(metric, vals, failed, learner=learner, n=n))
    return out


def run_replications(spec: ExperimentSpec, workers: Optional[int] = None) -> List[ReplicationSummary]:
    """Accuracy summaries (mean, 10th and 90th percentile) per (learner, n)."""
    return summarize(run_experiment(spec, workers))


REPLICATION_HEADER = ["learner", "n", "replication", "accuracy", "true_loss", "params", "status"]
AGGREGATE_HEADER = ["learner", "n", "metric", "mean", "p10", "p90", "n_ok", "n_failed"]


def write_replications(path, records: Sequence[ReplicationRecord]) -> None:
    write_rows(path, REPLICATION_HEADER,
               ([r.learner, r.n, r.replication, r.accuracy, r.true_loss, r.params,
                 "ok" if r.ok else f"failed: {r.error}"] for r in records))


def write_aggregate(path, summaries: Sequence[ReplicationSummary]) -> None:
    write_rows(path, AGGREGATE_HEADER,
               ([s.label["learner"], s.label["n"], s.metric, s.mean, s.percentile_10, s.percentile_90,
                 len(s.values), s.n_failed] for s in summaries))


# Scaled-down version of the published grid: same scenarios and learners, 20 replications.
DESK_PRESET = {
    "scenario": "linear",
    "d": 2,
    "learner": ["respsvm-linear", "respsvm-rbf", "resplr-disc", "resplr-gen", "respnet-disc",
                "respnet-gen"],
    "n": [1000, 2000, 4000],
    "replications": 20,
    "seed": 0,
}

