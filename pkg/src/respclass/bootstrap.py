"""Studentized bootstrap intervals for the linear generative responder model.

The model is ``P(Z = +1 | x) = (1 + sigmoid(b + w.x)) / 2`` with ``Z = YT``
and pseudo-population weights ``1/Q``.  Every bootstrap refit is a weighted
maximum-likelihood problem in ``d + 1`` parameters, solved by Newton's method
(Fisher scoring where the observed information is not positive definite) on
many resamples at once; resamples enter only through row counts.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .core import DataError, Dataset, NumericError
from .surrogate import pseudo_population

LOG2 = float(np.log(2.0))
MAX_RETRIES = 10


@dataclass(frozen=True)
class CoefficientCi:
    index: int
    name: str
    estimate: float
    lower: float
    upper: float
    level: float = 0.95

    @property
    def significant(self) -> bool:
        """Interval excludes zero."""
        return self.lower > 0.0 or self.upper < 0.0

    @property
    def ordered(self) -> bool:
        return self.lower <= self.estimate <= self.upper


@dataclass
class BootstrapResult:
    intervals: List[CoefficientCi]
    n_skipped_outer: int
    n_skipped_inner: int
    se: np.ndarray


def _sigmoid(a):
    return 0.5 * (1.0 + np.tanh(0.5 * a))


def _loglik(eta, npos, W):
    """Weighted log-likelihood; the first ``npos`` columns hold ``z = +1``."""
    lp = np.log1p(_sigmoid(eta[..., :npos]))
    sp = np.logaddexp(0.0, eta[..., npos:])
    return (np.sum(W[..., :npos] * lp, axis=-1) - np.sum(W[..., npos:] * sp, axis=-1)
            - LOG2 * np.sum(W, axis=-1))


def fit_generative_lr(X1: np.ndarray, z: np.ndarray, W: np.ndarray, ridge: float = 1e-8,
                      max_iter: int = 100, tol: float = 1e-10, beta0=None) -> np.ndarray:
    """Weighted MLE for a batch of weight vectors.

    Parameters
    ----------
    X1 : (n, p) design matrix including the intercept column.
    z : (n,) labels in {-1, +1}.
    W : (B, n) nonnegative row weights, one row per fit.
    beta0 : optional (B, p) or (p,) starting point; zeros by default.

    Returns
    -------
    (B, p) coefficient array.  Rows that fail to converge are NaN.
    """
    W = np.atleast_2d(np.asarray(W, dtype=float))
    # positives first so each class is a contiguous column slice
    order = np.argsort(-np.asarray(z), kind="stable")
    X1, W = X1[order], W[:, order]
    npos = int(np.sum(np.asarray(z) > 0))
    B, p = W.shape[0], X1.shape[1]
    outer = (X1[:, :, None] * X1[:, None, :]).reshape(X1.shape[0], p * p)
    beta = np.zeros((B, p)) if beta0 is None else np.array(np.broadcast_to(beta0, (B, p)), dtype=float)
    eta = beta @ X1.T
    ll = _loglik(eta, npos, W)
    done = np.zeros(B, dtype=bool)
    eye = ridge * np.eye(p)
    for _ in range(max_iter):
        act = ~done
        if not act.any():
            break
        b, w, e = beta[act], W[act], eta[act]
        sig = _sigmoid(e)
        g = 0.5 * sig * (1.0 - sig)
        # d/d eta log P(z): g / P(+1) for z = +1, -g / P(-1) = -sig for z = -1
        score = np.empty_like(e)
        score[:, :npos] = g[:, :npos] / (0.5 * (1.0 + sig[:, :npos]))
        score[:, npos:] = -sig[:, npos:]
        # observed information (-d2/d eta2 log P(z)); not concave in eta for z = +1 and sig > sqrt(2) - 1
        obs = np.empty_like(e)
        sp = sig[:, :npos]
        obs[:, :npos] = -sp * (1.0 - sp) * (1.0 - 2.0 * sp - sp * sp) / (1.0 + sp) ** 2
        obs[:, npos:] = sig[:, npos:] * (1.0 - sig[:, npos:])
        grad = (w * score) @ X1 - ridge * b
        H = ((w * obs) @ outer).reshape(-1, p, p) + eye
        # Newton where the observed information is positive definite, Fisher scoring elsewhere
        indef = np.linalg.eigvalsh(H)[:, 0] <= 1e-10 * np.abs(H).max(axis=(1, 2))
        if indef.any():
            # Fisher information g^2 / (P(+1) P(-1))
            info = g[indef] ** 2 / (0.25 * (1.0 + sig[indef]) * (1.0 - sig[indef]) + 1e-300)
            H[indef] = ((w[indef] * info) @ outer).reshape(-1, p, p) + eye
        step = np.linalg.solve(H, grad[..., None])[..., 0]
        ll0 = ll[act] - 0.5 * ridge * np.sum(b * b, axis=1)
        # step-halving until the penalized likelihood does not decrease
        t = np.ones(b.shape[0])
        nb, ne, nll = b, e, ll[act]
        for _h in range(30):
            nb = b + t[:, None] * step
            ne = nb @ X1.T
            nll = _loglik(ne, npos, w)
            bad = nll - 0.5 * ridge * np.sum(nb * nb, axis=1) < ll0 - 1e-12 * np.abs(ll0)
            if not bad.any():
                break
            t = np.where(bad, 0.5 * t, t)
        idx = np.flatnonzero(act)
        beta[idx], eta[idx], ll[idx] = nb, ne, nll
        conv = np.max(np.abs(t[:, None] * step), axis=1) < tol * (1.0 + np.max(np.abs(nb), axis=1))
        done[idx[conv]] = True
    beta[~done] = np.nan
    beta[~np.all(np.isfinite(beta), axis=1)] = np.nan
    return beta


def _design(X):
    return np.hstack([np.ones((X.shape[0], 1)), X])


def _draw(rng, base_counts, z, size):
    """Resample rows with replacement; retry a draw whose positive-weight rows hold one class."""
    n = base_counts.size
    pool = np.repeat(np.arange(n), base_counts)
    counts = np.zeros((size, n))
    ok = np.zeros(size, dtype=bool)
    for j in range(size):
        for _ in range(MAX_RETRIES):
            c = np.bincount(pool[rng.integers(0, pool.size, pool.size)], minlength=n)
            zs = z[c > 0]
            if zs.min() != zs.max():
                counts[j], ok[j] = c, True
                break
    return counts, ok


def bootstrap_ci(ds: Dataset, outer_b: int = 200, inner_b: int = 50, level: float = 0.95,
                 seed: int = 0, names: Optional[List[str]] = None, ridge: float = 1e-8,
                 chunk: int = 2000, tol: float = 1e-7) -> BootstrapResult:
    """Studentized (bootstrap-t) intervals for intercept and feature coefficients.

    Outer resample ``b`` refits the model to get ``beta*_b`` and runs
    ``inner_b`` resamples of that resample for ``se*_b``.  With
    ``t*_b = (beta*_b - beta_hat) / se*_b`` and ``se`` the spread of the outer
    estimates, the interval is
    ``[beta_hat - q(1 - a/2) se, beta_hat - q(a/2) se]``.
    Each outer resample draws from its own child seed, so results do not
    depend on evaluation order.
    """
    if outer_b < 1:
        raise ValueError("outer bootstrap size must be positive")
    if inner_b < 2:
        raise ValueError("Studentization requires inner bootstrap")
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    if ds.n < 2:
        raise DataError("bootstrap needs at least two rows")
    z = (ds.y * ds.t).astype(float)
    if z.min() == z.max():
        raise DataError("all rows share one value of y*t; the model is not identifiable")
    X1 = _design(ds.X)
    qw = pseudo_population(ds)
    p = X1.shape[1]
    names = names or ["intercept"] + [f"x{j + 1}" for j in range(ds.d)]
    if len(names) != p:
        raise ValueError("names must cover the intercept and every feature")

    beta_hat = fit_generative_lr(X1, z, qw[None, :], ridge)[0]
    if not np.all(np.isfinite(beta_hat)):
        raise NumericError("full-data fit did not converge")

    ones = np.ones(ds.n, dtype=np.int64)
    children = np.random.SeedSequence(seed).spawn(outer_b)
    outer_counts = np.zeros((outer_b, ds.n))
    outer_ok = np.zeros(outer_b, dtype=bool)
    inner = []
    for b, child in enumerate(children):
        rng = np.random.Generator(np.random.Philox(child))
        c, ok = _draw(rng, ones, z, 1)
        outer_counts[b], outer_ok[b] = c[0], ok[0]
        inner.append(_draw(rng, c[0].astype(np.int64), z, inner_b) if ok[0] else None)

    def fit_rows(C, start):
        out = np.empty((C.shape[0], p))
        for s in range(0, C.shape[0], chunk):
            out[s:s + chunk] = fit_generative_lr(X1, z, C[s:s + chunk] * qw, ridge, tol=tol,
                                                 beta0=start[s:s + chunk])
        return out

    # warm starts: outer fits from the full-data fit, inner fits from their outer fit
    beta_star = np.full((outer_b, p), np.nan)
    beta_star[outer_ok] = fit_rows(outer_counts[outer_ok], np.tile(beta_hat, (int(outer_ok.sum()), 1)))
    idx = [b for b in range(outer_b) if inner[b] is not None]
    inner_counts = np.concatenate([inner[b][0][inner[b][1]] for b in idx]) if idx else np.zeros((0, ds.n))
    starts = [np.tile(np.nan_to_num(beta_star[b]), (int(inner[b][1].sum()), 1)) for b in idx]
    inner_beta = fit_rows(inner_counts, np.concatenate(starts) if starts else np.zeros((0, p)))
    se_star = np.full((outer_b, p), np.nan)
    n_skipped_inner, pos = 0, 0
    for b in idx:
        k = int(inner[b][1].sum())
        n_skipped_inner += inner_b - k
        vals = inner_beta[pos:pos + k]
        pos += k
        vals = vals[np.all(np.isfinite(vals), axis=1)]
        n_skipped_inner += k - vals.shape[0]
        if vals.shape[0] >= 2:
            se_star[b] = vals.std(axis=0, ddof=1)

    good = np.all(np.isfinite(beta_star), axis=1) & np.all(np.isfinite(se_star) & (se_star > 0), axis=1)
    n_skipped_outer = int(outer_b - good.sum())
    if good.sum() < 2:
        raise NumericError("too few usable bootstrap resamples")
    se = beta_star[good].std(axis=0, ddof=1)
    tstar = (beta_star[good] - beta_hat) / se_star[good]
    a = 1.0 - level
    q_lo, q_hi = np.percentile(tstar, [100 * a / 2, 100 * (1 - a / 2)], axis=0, method="linear")
    lower, upper = beta_hat - q_hi * se, beta_hat - q_lo * se
    cis = [CoefficientCi(j, names[j], float(beta_hat[j]), float(lower[j]), float(upper[j]), level)
           for j in range(p)]
    return BootstrapResult(cis, n_skipped_outer, n_skipped_inner, se)
