# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled SMO solver; same contract as ``respclass._smo_py.solve``."""
import numpy as np

from libc.math cimport exp, INFINITY

cdef double TAU = 1e-12


cdef struct Cache:
    double *X
    double *rows
    int *slot_of
    int *owner
    long *stamp
    long clock
    long misses
    int n
    int d
    int cap
    int kind
    double gamma


cdef double *fetch(Cache *c, int i) noexcept nogil:
    cdef int s = c.slot_of[i]
    cdef int k, m, victim
    cdef long oldest
    cdef double acc, diff
    cdef double *row
    cdef double *xi
    cdef double *xk
    c.clock += 1
    if s >= 0:
        c.stamp[s] = c.clock
        return c.rows + <long>s * c.n
    c.misses += 1
    victim = 0
    oldest = c.stamp[0]
    for k in range(1, c.cap):
        if c.stamp[k] < oldest:
            oldest = c.stamp[k]
            victim = k
    if c.owner[victim] >= 0:
        c.slot_of[c.owner[victim]] = -1
    c.owner[victim] = i
    c.slot_of[i] = victim
    c.stamp[victim] = c.clock
    row = c.rows + <long>victim * c.n
    xi = c.X + <long>i * c.d
    for k in range(c.n):
        xk = c.X + <long>k * c.d
        acc = 0.0
        if c.kind == 0:
            for m in range(c.d):
                acc += xk[m] * xi[m]
            row[k] = acc
        else:
            for m in range(c.d):
                diff = xk[m] - xi[m]
                acc += diff * diff
            row[k] = exp(-c.gamma * acc)
    return row


cdef bint be_shrunk(int k, double *yv, double *G, double *alpha, double *C,
                    double gmax1, double gmax2) noexcept nogil:
    if alpha[k] >= C[k]:
        if yv[k] > 0:
            return -G[k] > gmax1
        return -G[k] > gmax2
    if alpha[k] <= 0:
        if yv[k] > 0:
            return G[k] > gmax2
        return G[k] > gmax1
    return False


cdef void reconstruct(Cache *c, int *act, int na, double *yv, double *G, double *alpha,
                      signed char *is_active) noexcept nogil:
    # refresh stale gradients of shrunk variables: G_k = y_k sum_j K_kj y_j a_j - 1
    cdef int k, m
    cdef double acc
    cdef double *Kk
    for k in range(c.n):
        if is_active[k]:
            continue
        Kk = fetch(c, k)
        acc = 0.0
        for m in range(c.n):
            if alpha[m] != 0.0:
                acc += Kk[m] * yv[m] * alpha[m]
        G[k] = yv[k] * acc - 1.0


def solve(X, y, ub, int kind, double gamma, double tol, long max_iter,
          long cache_rows, bint second_order=True, bint shrinking=True):
    """Run SMO; returns ``(alpha, grad, n_iter, kkt_gap, converged, cache_misses)``."""
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[::1] C = np.ascontiguousarray(ub, dtype=np.float64)
    cdef int n = Xv.shape[0]
    cdef int d = Xv.shape[1]
    cdef int cap = <int>max(2, min(cache_rows, n))
    alpha_a = np.zeros(n)
    G_a = -np.ones(n)
    QD_a = np.empty(n)
    rows_a = np.empty((cap, n))
    slot_a = np.full(n, -1, dtype=np.intc)
    owner_a = np.full(cap, -1, dtype=np.intc)
    stamp_a = np.zeros(cap, dtype=np.int_)
    act_a = np.arange(n, dtype=np.intc)
    isact_a = np.ones(n, dtype=np.int8)
    cdef double[::1] alpha = alpha_a
    cdef double[::1] G = G_a
    cdef double[::1] QD = QD_a
    cdef double[:, ::1] rows = rows_a
    cdef int[::1] slot_of = slot_a
    cdef int[::1] owner = owner_a
    cdef long[::1] stamp = stamp_a
    cdef int[::1] act = act_a
    cdef signed char[::1] is_active = isact_a

    cdef Cache c
    c.X = &Xv[0, 0]
    c.rows = &rows[0, 0]
    c.slot_of = &slot_of[0]
    c.owner = &owner[0]
    c.stamp = &stamp[0]
    c.clock = 0
    c.misses = 0
    c.n = n
    c.d = d
    c.cap = cap
    c.kind = kind
    c.gamma = gamma

    cdef int i, j, k, m, a, na = n
    cdef int interval = n if n < 1000 else 1000
    cdef int counter = interval
    cdef bint unshrunk = False
    cdef bint skip_shrink = False
    cdef long it = 0
    cdef bint converged = False
    cdef double gap = INFINITY
    cdef double gmax, gmin, mg, b, quad, best, sc, g1, g2
    cdef double Ci, Cj, ai, aj, ai_old, aj_old, delta, diff, total, dai, daj, acc
    cdef double *Ki
    cdef double *Kj
    cdef bint up, low

    with nogil:
        for k in range(n):
            if kind == 0:
                acc = 0.0
                for m in range(d):
                    acc += Xv[k, m] * Xv[k, m]
                QD[k] = acc
            else:
                QD[k] = 1.0
        while True:
            if shrinking and not skip_shrink:
                counter -= 1
                if counter == 0:
                    counter = interval
                    g1 = -INFINITY
                    g2 = -INFINITY
                    for a in range(na):
                        k = act[a]
                        mg = -yv[k] * G[k]
                        if yv[k] > 0:
                            up = alpha[k] < C[k]
                            low = alpha[k] > 0
                        else:
                            up = alpha[k] > 0
                            low = alpha[k] < C[k]
                        if up and mg > g1:
                            g1 = mg
                        if low and -mg > g2:
                            g2 = -mg
                    if not unshrunk and g1 + g2 <= tol * 10:
                        unshrunk = True
                        reconstruct(&c, &act[0], na, &yv[0], &G[0], &alpha[0], &is_active[0])
                        for k in range(n):
                            act[k] = k
                            is_active[k] = 1
                        na = n
                    m = 0
                    for a in range(na):
                        k = act[a]
                        if be_shrunk(k, &yv[0], &G[0], &alpha[0], &C[0], g1, g2):
                            is_active[k] = 0
                        else:
                            act[m] = k
                            m += 1
                    na = m
            skip_shrink = False
            # working-set selection over the active set
            i = -1
            j = -1
            gmax = -INFINITY
            gmin = INFINITY
            for a in range(na):
                k = act[a]
                mg = -yv[k] * G[k]
                if yv[k] > 0:
                    up = alpha[k] < C[k]
                    low = alpha[k] > 0
                else:
                    up = alpha[k] > 0
                    low = alpha[k] < C[k]
                if up and mg > gmax:
                    gmax = mg
                    i = k
                if low and mg < gmin:
                    gmin = mg
                    j = k
            if i < 0 or j < 0:
                gap = -INFINITY
            else:
                gap = gmax - gmin
            if i < 0 or j < 0 or gap < tol:
                if na < n:
                    reconstruct(&c, &act[0], na, &yv[0], &G[0], &alpha[0], &is_active[0])
                    for k in range(n):
                        act[k] = k
                        is_active[k] = 1
                    na = n
                    counter = 1
                    skip_shrink = True
                    continue
                converged = True
                break
            if it >= max_iter:
                break
            if second_order:
                Ki = fetch(&c, i)
                best = INFINITY
                m = -1
                for a in range(na):
                    k = act[a]
                    if yv[k] > 0:
                        low = alpha[k] > 0
                    else:
                        low = alpha[k] < C[k]
                    if not low:
                        continue
                    b = gmax + yv[k] * G[k]
                    if b <= 0:
                        continue
                    quad = QD[i] + QD[k] - 2.0 * Ki[k]
                    if quad <= 0:
                        quad = TAU
                    sc = -(b * b) / quad
                    if sc < best:
                        best = sc
                        m = k
                if m >= 0:
                    j = m
            it += 1
            Ki = fetch(&c, i)
            Kj = fetch(&c, j)
            Ci = C[i]
            Cj = C[j]
            ai_old = alpha[i]
            aj_old = alpha[j]
            ai = ai_old
            aj = aj_old
            if yv[i] != yv[j]:
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
            dai = (ai - ai_old) * yv[i]
            daj = (aj - aj_old) * yv[j]
            for a in range(na):
                k = act[a]
                G[k] += yv[k] * (Ki[k] * dai + Kj[k] * daj)
        if na < n:
            reconstruct(&c, &act[0], na, &yv[0], &G[0], &alpha[0], &is_active[0])

    return alpha_a, G_a, it, float(gap), bool(converged), c.misses
