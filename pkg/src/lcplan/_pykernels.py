"""Pure-Python kernels; the reference the compiled ``_ckernels`` mirrors.

Both modules expose the same two functions with identical arithmetic
order, so results agree to the last bit on platforms sharing one libm.
"""
import math

import numpy as np

# termination codes shared with the compiled kernels
GRADIENT_SMALL = 0
STEP_SMALL = 1
MAX_ITERATIONS = 2

_TAU = 1e-6


def _model_and_jac(p, ns, logns, ys):
    """Residuals y - m(n) and rows of dm/dp at ``p``."""
    alpha, beta, gamma = p
    res = []
    jac = []
    for n, ln, y in zip(ns, logns, ys):
        t = n ** (-gamma)
        res.append(y - (alpha - beta * t))
        jac.append((1.0, -t, beta * t * ln))
    return res, jac


def _half_sse(res):
    s = 0.0
    for r in res:
        s += r * r
    return 0.5 * s


def _normal_equations(res, jac):
    a = [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]
    g = [0.0, 0.0, 0.0]
    for r, row in zip(res, jac):
        for i in range(3):
            g[i] += row[i] * r
            for j in range(3):
                a[i][j] += row[i] * row[j]
    return a, g


def _solve_spd(a, b, k):
    """Cholesky solve of the leading ``k`` x ``k`` system, in place on copies."""
    l = [[0.0] * 3 for _ in range(3)]
    for i in range(k):
        for j in range(i + 1):
            s = a[i][j]
            for m in range(j):
                s -= l[i][m] * l[j][m]
            if i == j:
                if s <= 0.0:
                    return None
                l[i][i] = math.sqrt(s)
            else:
                l[i][j] = s / l[j][j]
    z = [0.0, 0.0, 0.0]
    for i in range(k):
        s = b[i]
        for m in range(i):
            s -= l[i][m] * z[m]
        z[i] = s / l[i][i]
    x = [0.0, 0.0, 0.0]
    for i in range(k - 1, -1, -1):
        s = z[i]
        for m in range(i + 1, k):
            s -= l[m][i] * x[m]
        x[i] = s / l[i][i]
    return x


def fit_power_law(ns, ys, p0, lower, upper, max_iter, gtol, xtol):
    """Bounded least squares for ``y ~ alpha - beta * n**-gamma``.

    Returns ``(alpha, beta, gamma, iterations, termination_code)``.
    """
    ns = [float(n) for n in ns]
    ys = [float(y) for y in ys]
    logns = [math.log(n) for n in ns]
    p = [min(max(p0[i], lower[i]), upper[i]) for i in range(3)]

    res, jac = _model_and_jac(p, ns, logns, ys)
    f = _half_sse(res)
    a, g = _normal_equations(res, jac)
    mu = _TAU * max(a[0][0], a[1][1], a[2][2])
    nu = 2.0
    code = MAX_ITERATIONS
    it = 0
    while it < max_iter:
        it += 1
        # g is minus the gradient of f; block coordinates pinned at a bound.
        # Stationarity is the cosine between r and each free Jacobian column.
        free = []
        gmax = 0.0
        for i in range(3):
            blocked = (p[i] <= lower[i] and g[i] < 0.0) or (p[i] >= upper[i] and g[i] > 0.0)
            if not blocked:
                free.append(i)
                if a[i][i] > 0.0:
                    c = abs(g[i]) / math.sqrt(a[i][i])
                    if c > gmax:
                        gmax = c
        if f == 0.0 or gmax <= gtol * math.sqrt(2.0 * f):
            code = GRADIENT_SMALL
            break

        k = len(free)
        sub = [[0.0] * 3 for _ in range(3)]
        rhs = [0.0, 0.0, 0.0]
        for ii in range(k):
            rhs[ii] = g[free[ii]]
            for jj in range(k):
                sub[ii][jj] = a[free[ii]][free[jj]]
            sub[ii][ii] += mu
        hf = _solve_spd(sub, rhs, k)
        if hf is None:
            mu *= nu
            nu *= 2.0
            continue

        p_new = list(p)
        for ii in range(k):
            i = free[ii]
            p_new[i] = min(max(p[i] + hf[ii], lower[i]), upper[i])
        h = [p_new[i] - p[i] for i in range(3)]
        hnorm = math.sqrt(h[0] * h[0] + h[1] * h[1] + h[2] * h[2])
        pnorm = math.sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2])
        if hnorm <= xtol * (pnorm + xtol):
            code = STEP_SMALL
            break

        res_new, jac_new = _model_and_jac(p_new, ns, logns, ys)
        f_new = _half_sse(res_new)
        pred = 0.0
        for i in range(3):
            ah = 0.0
            for j in range(3):
                ah += a[i][j] * h[j]
            pred += h[i] * (g[i] - 0.5 * ah)
        rho = (f - f_new) / pred if pred > 0.0 else -1.0
        if rho > 0.0:
            p = p_new
            f = f_new
            a, g = _normal_equations(res_new, jac_new)
            t = 2.0 * rho - 1.0
            mu *= max(1.0 / 3.0, 1.0 - t * t * t)
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
    s = np.asarray(sorted_scores, dtype=np.float64)
    lab = np.asarray(sorted_labels, dtype=np.int64)
    n = s.shape[0]
    starts = np.flatnonzero(np.r_[True, s[1:] != s[:-1]])
    lengths = np.diff(np.r_[starts, n])
    # doubled mid-rank (1-based) of each tie group
    doubled = np.repeat(2 * starts + lengths + 1, lengths)
    n_pos = int(lab.sum())
    n_neg = n - n_pos
    rank_sum = int((doubled * lab).sum())
    return rank_sum - n_pos * (n_pos + 1), n_pos, n_neg
