"""K-fold cross-validation scored by the empirical ``L'_theta``."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Sequence

import numpy as np

from ..core import DataError, Dataset, as_theta
from ..evaluation import l_prime_score


@dataclass
class CVResult:
    best: dict
    # one entry per grid point: (params, mean score, per-fold scores)
    table: List[tuple] = field(default_factory=list)

    def format_table(self) -> str:
        lines = []
        for params, mean, folds in self.table:
            p = " ".join(f"{k}={v:g}" for k, v in params.items())
            mark = " *" if params == self.best else ""
            lines.append(f"{p}  L'={mean:+.5f}  folds=[{', '.join(f'{s:+.4f}' for s in folds)}]{mark}")
        return "\n".join(lines)


def fold_assignment(n: int, k: int, seed: int) -> List[np.ndarray]:
    rng = np.random.Generator(np.random.Philox(seed))
    return np.array_split(rng.permutation(n), k)


def cross_validate(ds: Dataset, fit: Callable[..., object], grid: Sequence[dict], theta, k: int = 5,
                   seed: int = 0) -> CVResult:
    """Select the grid point with the lowest mean held-out ``L'_theta``.

    ``fit(train_ds, **params)`` returns a classifier.  ``grid`` must be
    ordered from strongest to weakest regularization; ties go to the earlier
    entry.
    """
    theta = as_theta(theta)
    if not grid:
        raise ValueError("empty hyperparameter grid")
    if ds.n < k:
        raise DataError(f"{ds.n} rows cannot be split into {k} folds")
    folds = fold_assignment(ds.n, k, seed)
    table = []
    best, best_score = None, np.inf
    for params in grid:
        scores = []
        for f in range(k):
            test = folds[f]
            train = np.concatenate([folds[g] for g in range(k) if g != f])
            clf = fit(ds.subset(train), **params)
            scores.append(l_prime_score(clf, ds.subset(test), theta))
        mean = float(np.mean(scores))
        table.append((dict(params), mean, scores))
        if mean < best_score:
            best, best_score = dict(params), mean
    return CVResult(best, table)
