"""Synthetic linear and spherical responder scenarios with full ground truth."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import Constant, Dataset, GroundTruth, as_theta


class Scenario(str, enum.Enum):
    LINEAR = "linear"
    SPHERICAL = "spherical"


@dataclass(frozen=True)
class ScenarioSpec:
    kind: Scenario
    d: int
    n: int = 1000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", Scenario(self.kind))
        if self.d < 1:
            raise ValueError("d must be at least 1")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.kind is Scenario.SPHERICAL and self.d % 2:
            raise ValueError("spherical requires even d")


# ---------------------------------------------------------------------------
# distribution functions

_BETA44_TERMS = [(k, math.comb(7, k)) for k in range(4, 8)]


def beta44_cdf(u):
    """CDF of Beta(4, 4): ``sum_{k=4}^{7} C(7,k) u^k (1-u)^(7-k)``."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    v = 1.0 - u
    out = sum(c * u**k * v ** (7 - k) for k, c in _BETA44_TERMS)
    return float(out) if out.ndim == 0 else out


def _gammainc_series(a, x, tol, max_iter):
    term = np.full_like(x, 1.0 / a)
    total = term.copy()
    ap = a
    for _ in range(max_iter):
        ap += 1.0
        term = term * x / ap
        total += term
        if np.all(np.abs(term) <= np.abs(total) * tol):
            break
    with np.errstate(divide="ignore"):
        return total * np.exp(-x + a * np.log(x) - math.lgamma(a))


def _gammaincc_cf(a, x, tol, max_iter):
    # modified Lentz evaluation of the continued fraction for Q(a, x)
    tiny = 1e-300
    b = x + 1.0 - a
    c = np.full_like(x, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, max_iter + 1):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = b + an / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = d * c
        h = h * delta
        if np.all(np.abs(delta - 1.0) <= tol):
            break
    return np.exp(-x + a * np.log(x) - math.lgamma(a)) * h


def gammainc_lower(a: float, x, tol: float = 1e-15, max_iter: int = 10000):
    """Regularized lower incomplete gamma ``P(a, x)`` for ``x >= 0``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(x)
    pos = x > 0
    series = pos & (x < a + 1.0)
    frac = pos & ~series
    if series.any():
        out[series] = _gammainc_series(a, x[series], tol, max_iter)
    if frac.any():
        out[frac] = 1.0 - _gammaincc_cf(a, x[frac], tol, max_iter)
    return np.clip(out, 0.0, 1.0)


def chisq_cdf(s, d: int):
    """CDF of the chi-squared distribution with ``d`` degrees of freedom."""
    scalar = np.ndim(s) == 0
    s = np.maximum(np.asarray(s, dtype=float), 0.0)
    h = s / 2.0
    if d % 2 == 0:
        term = np.ones_like(h)
        acc = np.ones_like(h)
        for k in range(1, d // 2):
            term = term * h / k
            acc = acc + term
        out = np.clip(1.0 - np.exp(-h) * acc, 0.0, 1.0)
        out = np.where(np.isinf(h), 1.0, out)
    else:
        out = gammainc_lower(d / 2.0, np.atleast_1d(h)).reshape(np.shape(h))
    return float(out) if scalar else out


# ---------------------------------------------------------------------------
# scenario functions

def _radial(X, d):
    return beta44_cdf(chisq_cdf(np.sum(X * X, axis=1), d))


def _xor_indicator(X):
    halves = (X[:, 0::2] + X[:, 1::2]) > 0
    return (np.sum(halves, axis=1) % 2) == 1


def rho_alpha(X, spec: ScenarioSpec):
    """Responder probability ``rho`` and type-2 probability ``alpha`` per row.

    Accepts a single feature vector or an ``(n, d)`` array.
    """
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != spec.d:
        raise ValueError(f"feature dimension {X.shape[1]} does not match scenario d={spec.d}")
    if spec.kind is Scenario.LINEAR:
        rho = 0.15 + 0.7 * (X[:, 0] > 0)
        alpha = 1.0 - _radial(X, spec.d)
    else:
        if spec.d % 2:
            raise ValueError("spherical requires even d")
        rho = _radial(X, spec.d)
        alpha = 0.15 + 0.7 * _xor_indicator(X)
    if single:
        return float(rho[0]), float(alpha[0])
    return rho, alpha


def bayes_label(X, spec: ScenarioSpec, theta=0.5):
    """``sign(rho(x) - theta)`` with ``sign(0) = +1``."""
    theta = as_theta(theta)
    rho, _ = rho_alpha(X, spec)
    lab = np.where(np.asarray(rho) >= theta, 1, -1).astype(np.int8)
    return int(lab) if lab.ndim == 0 else lab


# ---------------------------------------------------------------------------
# sampling

def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox stream; identical draws on every platform."""
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))


def box_muller(rng: np.random.Generator, size: int) -> np.ndarray:
    m = (size + 1) // 2
    u1 = 1.0 - rng.random(m)  # (0, 1]
    u2 = rng.random(m)
    r = np.sqrt(-2.0 * np.log(u1))
    out = np.empty(2 * m)
    out[0::2] = r * np.cos(2.0 * math.pi * u2)
    out[1::2] = r * np.sin(2.0 * math.pi * u2)
    return out[:size]


def _pm1(u, p):
    return np.where(u < p, 1, -1).astype(np.int8)


def generate(spec: ScenarioSpec):
    """Draw ``spec.n`` units; returns ``(Dataset, GroundTruth)``.

    Treatment is a fair coin so the dataset carries ``Constant(0.5)``.
    """
    n, d = spec.n, spec.d
    rng = make_rng(spec.seed)
    X = box_muller(rng, n * d).reshape(n, d)
    t = _pm1(rng.random(n), 0.5)
    rho, alpha = rho_alpha(X, spec)
    r = _pm1(rng.random(n), rho)
    a = _pm1(rng.random(n), alpha)
    y = np.where(r == 1, t, a)
    y_plus = np.where(r == 1, 1, a)
    y_minus = np.where(r == 1, -1, a)
    ds = Dataset(X, t, y, Constant(0.5))
    return ds, GroundTruth(X, y_plus, y_minus, r, a)
