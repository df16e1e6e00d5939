"""Pure-Python/NumPy SMO solver; fallback for the compiled ``_smo`` module.

Solves ``min 1/2 a'Qa - 1'a  s.t.  0 <= a_i <= ub_i,  y'a = 0`` with
``Q_ij = y_i y_j k(x_i, x_j)``.  Both backends share the working-set rule
(first maximal index wins ties) and the two-variable update.
"""
from collections import OrderedDict

import numpy as np

LINEAR = 0
RBF = 1
TAU = 1e-12


class RowCache:
    """LRU cache of kernel rows ``k(x_i, .)``."""

    def __init__(self, X, kind, gamma, capacity):
        self.X = X
        self.kind = kind
        self.gamma = gamma
        self.capacity = max(2, int(capacity))
        self._rows = OrderedDict()
        self.misses = 0

    def diag(self):
        if self.kind == LINEAR:
            return np.einsum("ij,ij->i", self.X, self.X)
        return np.ones(self.X.shape[0])

    def row(self, i):
        r = self._rows.get(i)
        if r is not None:
            self._rows.move_to_end(i)
            return r
        self.misses += 1
        if self.kind == LINEAR:
            r = self.X @ self.X[i]
        else:
            diff = self.X - self.X[i]
            r = np.exp(-self.gamma * np.einsum("ij,ij->i", diff, diff))
        if len(self._rows) >= self.capacity:
            self._rows.popitem(last=False)
        self._rows[i] = r
        return r


def _masks(y, alpha, ub):
    up = np.where(y > 0, alpha < ub, alpha > 0)
    low = np.where(y > 0, alpha > 0, alpha < ub)
    return up, low


def _select(act, y, G, alpha, ub, QD, cache, second_order):
    ya, Ga, aa, ca = y[act], G[act], alpha[act], ub[act]
    up, low = _masks(ya, aa, ca)
    if not up.any() or not low.any():
        return -1, -1, -np.inf
    mg = -ya * Ga
    cand = np.where(up, mg, -np.inf)
    ii = int(np.argmax(cand))
    gmax = cand[ii]
    lowvals = np.where(low, mg, np.inf)
    jj = int(np.argmin(lowvals))
    gap = gmax - lowvals[jj]
    i = int(act[ii])
    if gap < 0 or not second_order:
        return i, int(act[jj]), gap
    Ki = cache.row(i)[act]
    b = gmax - mg
    ok = low & (b > 0)
    if not ok.any():
        return i, int(act[jj]), gap
    quad = QD[i] + QD[act] - 2.0 * Ki
    quad = np.where(quad > 0, quad, TAU)
    score = np.where(ok, -(b * b) / quad, np.inf)
    return i, int(act[int(np.argmin(score))]), gap


def _shrinkable(y, G, alpha, ub, g1, g2):
    at_ub = alpha >= ub
    at_lb = alpha <= 0
    return ((at_ub & np.where(y > 0, -G > g1, -G > g2))
            | (~at_ub & at_lb & np.where(y > 0, G > g2, G > g1)))


def _reconstruct(active, y, G, alpha, cache):
    v = y * alpha
    for k in np.flatnonzero(~active):
        G[k] = y[k] * (cache.row(int(k)) @ v) - 1.0


def solve(X, y, ub, kind, gamma, tol, max_iter, cache_rows, second_order=True, shrinking=True):
    """Run SMO; returns ``(alpha, grad, n_iter, kkt_gap, converged, cache_misses)``."""
    X = np.ascontiguousarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    ub = np.ascontiguousarray(ub, dtype=float)
    n = X.shape[0]
    cache = RowCache(X, kind, gamma, min(cache_rows, n))
    QD = cache.diag()
    alpha = np.zeros(n)
    G = -np.ones(n)
    active = np.ones(n, dtype=bool)
    act = np.arange(n)
    interval = min(n, 1000)
    counter = interval
    unshrunk = False
    skip_shrink = False
    it = 0
    converged = False
    gap = np.inf
    while True:
        if shrinking and not skip_shrink:
            counter -= 1
            if counter == 0:
                counter = interval
                ya, Ga = y[act], G[act]
                up, low = _masks(ya, alpha[act], ub[act])
                mg = -ya * Ga
                g1 = mg[up].max() if up.any() else -np.inf
                g2 = (-mg[low]).max() if low.any() else -np.inf
                if not unshrunk and g1 + g2 <= tol * 10:
                    unshrunk = True
                    _reconstruct(active, y, G, alpha, cache)
                    active[:] = True
                    act = np.arange(n)
                drop = _shrinkable(y[act], G[act], alpha[act], ub[act], g1, g2)
                active[act[drop]] = False
                act = act[~drop]
        skip_shrink = False
        i, j, gap = _select(act, y, G, alpha, ub, QD, cache, second_order)
        if i < 0 or gap < tol:
            if act.size < n:
                _reconstruct(active, y, G, alpha, cache)
                active[:] = True
                act = np.arange(n)
                counter = 1
                skip_shrink = True
                continue
            converged = True
            break
        if it >= max_iter:
            break
        it += 1
        Ki = cache.row(i)
        Kj = cache.row(j)
        Ci, Cj = ub[i], ub[j]
        ai_old, aj_old = alpha[i], alpha[j]
        ai, aj = ai_old, aj_old
        if y[i] != y[j]:
            quad = QD[i] + QD[j] + 2.0 * (-Ki[j])
            if quad <= 0:
                quad = TAU
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj = 0.0
                    ai = diff
            else:
                if ai < 0:
                    ai = 0.0
                    aj = -diff
            if diff > Ci - Cj:
                if ai > Ci:
                    ai = Ci
                    aj = Ci - diff
            else:
                if aj > Cj:
                    aj = Cj
                    ai = Cj + diff
        else:
            quad = QD[i] + QD[j] - 2.0 * Ki[j]
            if quad <= 0:
                quad = TAU
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ai -= delta
            aj += delta
            if total > Ci:
                if ai > Ci:
                    ai = Ci
                    aj = total - Ci
            else:
                if aj < 0:
                    aj = 0.0
                    ai = total
            if total > Cj:
                if aj > Cj:
                    aj = Cj
                    ai = total - Cj
            else:
                if ai < 0:
                    ai = 0.0
                    aj = total
        alpha[i] = ai
        alpha[j] = aj
        dai = (ai - ai_old) * y[i]
        daj = (aj - aj_old) * y[j]
        G[act] += y[act] * (Ki[act] * dai + Kj[act] * daj)
    if act.size < n:
        _reconstruct(active, y, G, alpha, cache)
    return alpha, G, it, float(gap), converged, cache.misses
