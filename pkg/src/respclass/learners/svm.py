"""RespSVM: sample-weighted soft-margin kernel SVM on surrogate labels."""
from __future__ import annotations

import logging
import warnings
from typing import Optional

import numpy as np

from .. import _backend
from ..core import DataError
from ..surrogate import SurrogateData
from .models import KernelScorer, KernelSpec

log = logging.getLogger(__name__)

DEFAULT_C_GRID = (0.1, 1.0, 10.0, 100.0)
DEFAULT_GAMMA_GRID = (0.01, 0.1, 1.0, 10.0)  # divided by d


class ConvergenceWarning(UserWarning):
    pass


def _bias(y, G, alpha, ub):
    """Offset from the KKT conditions: mean over free variables, else mid-interval."""
    yG = y * G
    at_ub = alpha >= ub
    at_lb = alpha <= 0
    free = ~(at_ub | at_lb)
    if free.any():
        rho = yG[free].mean()
    else:
        upper_set = (at_ub & (y < 0)) | (at_lb & (y > 0))
        lower_set = (at_ub & (y > 0)) | (at_lb & (y < 0))
        ub_v = yG[upper_set].min() if upper_set.any() else np.inf
        lb_v = yG[lower_set].max() if lower_set.any() else -np.inf
        if np.isfinite(ub_v) and np.isfinite(lb_v):
            rho = (ub_v + lb_v) / 2.0
        else:
            rho = ub_v if np.isfinite(ub_v) else lb_v
    return -float(rho)


def train_respsvm(examples: SurrogateData, kernel: KernelSpec, c: float = 1.0, tol: float = 1e-3,
                  max_iter: Optional[int] = None, cache_mb: float = 256.0,
                  second_order: bool = True, shrinking: bool = True, backend: Optional[str] = None) -> KernelScorer:
    """Solve the weighted SVM dual with box ``0 <= alpha_i <= c * w_i``.

    Zero-weight examples are dropped.  Raises ``DataError`` when either label
    has no positively weighted example.  If ``max_iter`` updates pass without
    reaching ``tol`` the last (best) iterate is returned with
    ``converged=False`` and a :class:`ConvergenceWarning`.
    """
    if not c > 0:
        raise ValueError("C must be positive")
    keep = examples.w > 0
    X = examples.X[keep]
    z = examples.z[keep].astype(float)
    if not ((z > 0).any() and (z < 0).any()):
        raise DataError("single-class input: both surrogate labels need positive weight")
    ub = c * examples.w[keep]
    n = X.shape[0]
    if max_iter is None:
        max_iter = max(10_000_000, 100 * n)
    cache_rows = max(2, int(cache_mb * 2**20 // (8 * n)))
    solver = _backend.get(backend)
    alpha, G, n_iter, gap, converged, _ = solver.solve(
        X, z, ub, kernel.code, float(kernel.gamma), float(tol), int(max_iter), cache_rows,
        second_order, shrinking)
    if not converged:
        warnings.warn(f"SMO stopped after {n_iter} updates with KKT gap {gap:.3g} > tol {tol:g}",
                      ConvergenceWarning, stacklevel=2)
    bias = _bias(z, G, alpha, ub)
    dual = float(alpha.sum() - 0.5 * alpha @ (G + 1.0))
    sv = alpha > 0
    log.debug("smo: n=%d iters=%d gap=%.3g sv=%d", n, n_iter, gap, int(sv.sum()))
    return KernelScorer(X[sv], alpha[sv] * z[sv], bias, kernel,
                        converged=bool(converged), n_iter=int(n_iter), kkt_gap=float(gap),
                        dual_objective=dual)


def dual_objective(alpha, X, z, kernel: KernelSpec) -> float:
    """``sum(alpha) - 1/2 sum_ij alpha_i alpha_j z_i z_j k(x_i, x_j)``."""
    v = alpha * z
    return float(alpha.sum() - 0.5 * v @ kernel.matrix(X, X) @ v)


def kkt_violation(alpha, X, z, ub, kernel: KernelSpec) -> float:
    """Largest violating-pair gap ``m(alpha) - M(alpha)``; <= 0 at an exact optimum."""
    G = (z[:, None] * z[None, :] * kernel.matrix(X, X)) @ alpha - 1.0
    up = np.where(z > 0, alpha < ub, alpha > 0)
    low = np.where(z > 0, alpha > 0, alpha < ub)
    mg = -z * G
    if not up.any() or not low.any():
        return -np.inf
    return float(mg[up].max() - mg[low].min())
