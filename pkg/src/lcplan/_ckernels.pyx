# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Arithmetic order mirrors ``_pykernels`` exactly."""
from libc.math cimport log, pow, sqrt, fabs

import numpy as np

DEF GRADIENT_SMALL = 0
DEF STEP_SMALL = 1
DEF MAX_ITERATIONS = 2
DEF TAU = 1e-6


cdef double _eval(const double[:] p, const double[:] ns, const double[:] logns,
                  const double[:] ys, double[:] res, double[:, :] jac) noexcept nogil:
    cdef Py_ssize_t i
    cdef double t, s = 0.0
    for i in range(ns.shape[0]):
        t = pow(ns[i], -p[2])
        res[i] = ys[i] - (p[0] - p[1] * t)
        jac[i, 0] = 1.0
        jac[i, 1] = -t
        jac[i, 2] = p[1] * t * logns[i]
    for i in range(ns.shape[0]):
        s += res[i] * res[i]
    return 0.5 * s


cdef void _normal(const double[:] res, const double[:, :] jac,
                  double a[3][3], double g[3]) noexcept nogil:
    cdef Py_ssize_t k
    cdef int i, j
    for i in range(3):
        g[i] = 0.0
        for j in range(3):
            a[i][j] = 0.0
    for k in range(res.shape[0]):
        for i in range(3):
            g[i] += jac[k, i] * res[k]
            for j in range(3):
                a[i][j] += jac[k, i] * jac[k, j]


cdef bint _solve_spd(double a[3][3], double b[3], int k, double x[3]) noexcept nogil:
    cdef double l[3][3]
    cdef double z[3]
    cdef double s
    cdef int i, j, m
    for i in range(k):
        for j in range(i + 1):
            s = a[i][j]
            for m in range(j):
                s -= l[i][m] * l[j][m]
            if i == j:
                if s <= 0.0:
                    return False
                l[i][i] = sqrt(s)
            else:
                l[i][j] = s / l[j][j]
    for i in range(k):
        s = b[i]
        for m in range(i):
            s -= l[i][m] * z[m]
        z[i] = s / l[i][i]
    for i in range(k - 1, -1, -1):
        s = z[i]
        for m in range(i + 1, k):
            s -= l[m][i] * x[m]
        x[i] = s / l[i][i]
    return True


def fit_power_law(ns_in, ys_in, p0, lower_in, upper_in, int max_iter, double gtol, double xtol):
    """Bounded least squares for ``y ~ alpha - beta * n**-gamma``.

    Returns ``(alpha, beta, gamma, iterations, termination_code)``.
    """
    cdef double[:] ns = np.array(ns_in, dtype=np.float64)
    cdef double[:] ys = np.array(ys_in, dtype=np.float64)
    cdef Py_ssize_t m = ns.shape[0]
    cdef double[:] logns = np.empty(m)
    cdef double[:] res = np.empty(m)
    cdef double[:] res_new = np.empty(m)
    cdef double[:, :] jac = np.empty((m, 3))
    cdef double[:, :] jac_new = np.empty((m, 3))
    cdef double[:] p = np.empty(3)
    cdef double[:] p_new = np.empty(3)
    cdef double lower[3]
    cdef double upper[3]
    cdef double a[3][3]
    cdef double sub[3][3]
    cdef double g[3]
    cdef double rhs[3]
    cdef double hf[3]
    cdef double h[3]
    cdef int free[3]
    cdef int i, j, ii, jj, k, code, it
    cdef double f, f_new, mu, nu, gmax, hnorm, pnorm, pred, ah, rho, t, v
    cdef bint blocked

    for i in range(m):
        logns[i] = log(ns[i])
    for i in range(3):
        lower[i] = lower_in[i]
        upper[i] = upper_in[i]
        p[i] = min(max(<double>p0[i], lower[i]), upper[i])

    with nogil:
        f = _eval(p, ns, logns, ys, res, jac)
        _normal(res, jac, a, g)
        mu = TAU * max(a[0][0], max(a[1][1], a[2][2]))
        nu = 2.0
        code = MAX_ITERATIONS
        it = 0
        while it < max_iter:
            it += 1
            k = 0
            gmax = 0.0
            for i in range(3):
                blocked = (p[i] <= lower[i] and g[i] < 0.0) or (p[i] >= upper[i] and g[i] > 0.0)
                if not blocked:
                    free[k] = i
                    k += 1
                    if a[i][i] > 0.0:
                        t = fabs(g[i]) / sqrt(a[i][i])
                        if t > gmax:
                            gmax = t
            if f == 0.0 or gmax <= gtol * sqrt(2.0 * f):
                code = GRADIENT_SMALL
                break

            for ii in range(3):
                rhs[ii] = 0.0
                for jj in range(3):
                    sub[ii][jj] = 0.0
            for ii in range(k):
                rhs[ii] = g[free[ii]]
                for jj in range(k):
                    sub[ii][jj] = a[free[ii]][free[jj]]
                sub[ii][ii] += mu
            if not _solve_spd(sub, rhs, k, hf):
                mu *= nu
                nu *= 2.0
                continue

            for i in range(3):
                p_new[i] = p[i]
            for ii in range(k):
                i = free[ii]
                p_new[i] = min(max(p[i] + hf[ii], lower[i]), upper[i])
            for i in range(3):
                h[i] = p_new[i] - p[i]
            hnorm = sqrt(h[0] * h[0] + h[1] * h[1] + h[2] * h[2])
            pnorm = sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2])
            if hnorm <= xtol * (pnorm + xtol):
                code = STEP_SMALL
                break

            f_new = _eval(p_new, ns, logns, ys, res_new, jac_new)
            pred = 0.0
            for i in range(3):
                ah = 0.0
                for j in range(3):
                    ah += a[i][j] * h[j]
                pred += h[i] * (g[i] - 0.5 * ah)
            if pred > 0.0:
                rho = (f - f_new) / pred
            else:
                rho = -1.0
            if rho > 0.0:
                for i in range(3):
                    p[i] = p_new[i]
                f = f_new
                _normal(res_new, jac_new, a, g)
                t = 2.0 * rho - 1.0
                v = 1.0 - t * t * t
                mu *= max(1.0 / 3.0, v)
                nu = 2.0
            else:
                mu *= nu
                nu *= 2.0
    return p[0], p[1], p[2], it, code


def mann_whitney_twice_u(sorted_scores, sorted_labels):
    """Twice the Mann-Whitney U of the positives, tie groups half-credited.

    Inputs must already be sorted ascending by score. Returns
    ``(twice_u, n_pos, n_neg)`` as Python ints.
    """
    cdef const double[:] s = np.ascontiguousarray(sorted_scores, dtype=np.float64)
    cdef const long long[:] lab = np.ascontiguousarray(sorted_labels, dtype=np.int64)
    cdef Py_ssize_t n = s.shape[0]
    cdef Py_ssize_t start = 0, end, i
    cdef long long group_pos, n_pos = 0, rank_sum = 0
    with nogil:
        while start < n:
            end = start + 1
            while end < n and s[end] == s[start]:
                end += 1
            group_pos = 0
            for i in range(start, end):
                group_pos += lab[i]
            # doubled mid-rank (1-based) of the tie group
            rank_sum += group_pos * (start + end + 1)
            n_pos += group_pos
            start = end
    return int(rank_sum - n_pos * (n_pos + 1)), int(n_pos), int(n - n_pos)
