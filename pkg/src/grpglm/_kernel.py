"""Compiled inner loop of the proximal-gradient solver.

One fit is a tight numba loop: monotone backtracking proximal-gradient
steps with spectral (Barzilai-Borwein) trial step sizes and optional
momentum that restarts whenever it would increase the objective. Family
and penalty are passed as small integer codes so a single kernel serves
every combination.

The public KKT certificate in :mod:`grpglm.solver` is computed in plain
numpy, independent of this kernel.
"""

from __future__ import annotations

import numpy as np
from numba import njit

FAM_POISSON = 0
FAM_BERNOULLI = 1
FAM_GAUSSIAN = 2

PEN_GROUP = 0
PEN_LASSO = 1
PEN_ENET = 2

THETA_MAX = 700.0

STATUS_CONVERGED = 0
STATUS_MAX_ITER = 1
STATUS_LINESEARCH = 2
STATUS_BLOWUP = 3


@njit(cache=True)
def _risk(fam, t, y):
    n = t.shape[0]
    acc = 0.0
    if fam == FAM_POISSON:
        for i in range(n):
            if t[i] > THETA_MAX or t[i] < -THETA_MAX:
                return np.inf
            acc += -y[i] * t[i] + np.exp(t[i])
    elif fam == FAM_BERNOULLI:
        for i in range(n):
            ti = t[i]
            m = ti if ti > 0.0 else 0.0
            acc += -y[i] * ti + m + np.log1p(np.exp(-abs(ti)))
    else:
        for i in range(n):
            acc += -y[i] * t[i] + 0.5 * t[i] * t[i]
    return acc / n


@njit(cache=True)
def _mean_residual(fam, t, y, out):
    n = t.shape[0]
    if fam == FAM_POISSON:
        for i in range(n):
            out[i] = np.exp(t[i]) - y[i]
    elif fam == FAM_BERNOULLI:
        for i in range(n):
            ti = t[i]
            if ti >= 0.0:
                s = 1.0 / (1.0 + np.exp(-ti))
            else:
                e = np.exp(ti)
                s = e / (1.0 + e)
            out[i] = s - y[i]
    else:
        for i in range(n):
            out[i] = t[i] - y[i]


@njit(cache=True)
def _penalty(pen, x, r, t2, offsets, sizes, sqrtd):
    if pen == PEN_GROUP:
        acc = 0.0
        for j in range(offsets.shape[0]):
            s = 0.0
            for i in range(offsets[j], offsets[j] + sizes[j]):
                s += x[i] * x[i]
            acc += sqrtd[j] * np.sqrt(s)
        return 2.0 * r * acc
    acc = 0.0
    for i in range(x.shape[0]):
        acc += abs(x[i])
    val = 2.0 * r * acc
    if pen == PEN_ENET:
        sq = 0.0
        for i in range(x.shape[0]):
            sq += x[i] * x[i]
        val += t2 * sq
    return val


@njit(cache=True)
def _prox(pen, z, step, r, t2, offsets, sizes, sqrtd, out):
    p = z.shape[0]
    if pen == PEN_GROUP:
        for j in range(offsets.shape[0]):
            lo = offsets[j]
            hi = lo + sizes[j]
            s = 0.0
            for i in range(lo, hi):
                s += z[i] * z[i]
            nrm = np.sqrt(s)
            tau = 2.0 * step * r * sqrtd[j]
            if nrm > tau:
                f = 1.0 - tau / nrm
                for i in range(lo, hi):
                    out[i] = z[i] * f
            else:
                for i in range(lo, hi):
                    out[i] = 0.0
    else:
        tau = 2.0 * step * r
        scale = 1.0
        if pen == PEN_ENET and t2 > 0.0:
            scale = 1.0 / (1.0 + 2.0 * step * t2)
        for i in range(p):
            a = abs(z[i])
            if a > tau:
                out[i] = z[i] * (1.0 - tau / a) * scale
            else:
                out[i] = 0.0


@njit(cache=True)
def _kkt(pen, g, x, r, t2, offsets, sizes, sqrtd):
    worst = 0.0
    if pen == PEN_GROUP:
        for j in range(offsets.shape[0]):
            lo = offsets[j]
            hi = lo + sizes[j]
            s = 0.0
            for i in range(lo, hi):
                s += x[i] * x[i]
            nrm = np.sqrt(s)
            if nrm > 0.0:
                c = 2.0 * r * sqrtd[j] / nrm
                acc = 0.0
                for i in range(lo, hi):
                    v = g[i] + c * x[i]
                    acc += v * v
                res = np.sqrt(acc)
            else:
                acc = 0.0
                for i in range(lo, hi):
                    acc += g[i] * g[i]
                res = np.sqrt(acc) - 2.0 * r * sqrtd[j]
                if res < 0.0:
                    res = 0.0
            if res > worst:
                worst = res
    else:
        for i in range(x.shape[0]):
            gi = g[i]
            if pen == PEN_ENET:
                gi += 2.0 * t2 * x[i]
            if x[i] != 0.0:
                sign = 1.0 if x[i] > 0.0 else -1.0
                res = abs(gi + 2.0 * r * sign)
            else:
                res = abs(gi) - 2.0 * r
                if res < 0.0:
                    res = 0.0
            if res > worst:
                worst = res
    return worst


@njit(cache=True)
def _backtrack(fam, pen, X, y, yv, f_y, g_y, step, shrink, r, t2,
               offsets, sizes, sqrtd, u, tu):
    """Shrink step until the quadratic upper-bound condition holds at the
    prox-gradient point. Fills u and tu; returns (f_u, step, ok)."""
    p = yv.shape[0]
    z = np.empty(p)
    slack = 1e-12 * (1.0 + abs(f_y))
    for _ in range(200):
        for i in range(p):
            z[i] = yv[i] - step * g_y[i]
        _prox(pen, z, step, r, t2, offsets, sizes, sqrtd, u)
        tmp = np.dot(X, u)
        for i in range(tu.shape[0]):
            tu[i] = tmp[i]
        f_u = _risk(fam, tu, y)
        if np.isfinite(f_u):
            lin = 0.0
            sq = 0.0
            for i in range(p):
                d = u[i] - yv[i]
                lin += g_y[i] * d
                sq += d * d
            if f_u <= f_y + lin + sq / (2.0 * step) + slack:
                return f_u, step, True
        step *= shrink
        if step < 1e-30:
            break
    return np.inf, step, False


@njit(cache=True)
def solve_kernel(X, y, offsets, sizes, sqrtd, fam, pen, r, t2, x0,
                 tol, max_iter, step0, shrink, accel):
    """Returns (x, trace, n_trace, iterations, status, final_step)."""
    n, p = X.shape
    x = x0.copy()
    tx = np.dot(X, x)
    f_x = _risk(fam, tx, y)
    trace = np.empty(max_iter + 1)
    if not np.isfinite(f_x):
        trace[0] = np.inf
        return x, trace, 1, 0, STATUS_BLOWUP, step0

    resid = np.empty(n)
    _mean_residual(fam, tx, y, resid)
    g_x = np.dot(resid, X)
    for i in range(p):
        g_x[i] /= n

    obj = f_x + _penalty(pen, x, r, t2, offsets, sizes, sqrtd)
    obj0 = obj
    trace[0] = obj
    n_trace = 1

    step = step0
    x_prev = x.copy()
    t_prev = 1.0
    u = np.empty(p)
    tu = np.empty(n)
    yv = np.empty(p)
    g_y = np.empty(p)
    status = STATUS_MAX_ITER
    iterations = 0

    for it in range(1, max_iter + 1):
        if _kkt(pen, g_x, x, r, t2, offsets, sizes, sqrtd) <= tol:
            status = STATUS_CONVERGED
            break
        iterations = it

        use_momentum = False
        f_yv = f_x
        t_cur = 1.0
        if accel and it > 1:
            t_cur = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_prev * t_prev))
            mom = (t_prev - 1.0) / t_cur
            for i in range(p):
                yv[i] = x[i] + mom * (x[i] - x_prev[i])
            ty = np.dot(X, yv)
            f_yv = _risk(fam, ty, y)
            if np.isfinite(f_yv):
                _mean_residual(fam, ty, y, resid)
                g_y = np.dot(resid, X)
                for i in range(p):
                    g_y[i] /= n
                use_momentum = True

        if use_momentum:
            f_u, step, ok = _backtrack(fam, pen, X, y, yv, f_yv, g_y,
                                       step, shrink, r, t2, offsets, sizes,
                                       sqrtd, u, tu)
        else:
            t_cur = 1.0
            f_u, step, ok = _backtrack(fam, pen, X, y, x, f_x, g_x,
                                       step, shrink, r, t2, offsets, sizes,
                                       sqrtd, u, tu)
        if not ok:
            status = STATUS_LINESEARCH
            break
        obj_u = f_u + _penalty(pen, u, r, t2, offsets, sizes, sqrtd)
        obj_slack = 1e-12 * (1.0 + abs(obj))

        if use_momentum and obj_u > obj + obj_slack:
            # overshoot: restart momentum, step from x itself
            t_cur = 1.0
            f_u, step, ok = _backtrack(fam, pen, X, y, x, f_x, g_x,
                                       step, shrink, r, t2, offsets, sizes,
                                       sqrtd, u, tu)
            if not ok:
                status = STATUS_LINESEARCH
                break
            obj_u = f_u + _penalty(pen, u, r, t2, offsets, sizes, sqrtd)
        if obj_u > obj + obj_slack:
            # numerical stall: keep the iterate, retry with a smaller step
            trace[n_trace] = obj
            n_trace += 1
            t_prev = 1.0
            step *= shrink
            if step < 1e-30:
                status = STATUS_LINESEARCH
                break
            continue
        if obj_u > obj:
            obj_u = obj

        # gradient at the accepted point, reused next iteration
        _mean_residual(fam, tu, y, resid)
        g_u = np.dot(resid, X)
        for i in range(p):
            g_u[i] /= n

        # spectral (BB1) trial step for the next iteration
        num = 0.0
        den = 0.0
        for i in range(p):
            dx = u[i] - x[i]
            dgi = g_u[i] - g_x[i]
            num += dx * dx
            den += dx * dgi
        if den > 0.0 and num > 0.0:
            bb = num / den
            if bb < 1e-12:
                bb = 1e-12
            elif bb > 1e12:
                bb = 1e12
            next_step = bb
        else:
            next_step = step * 2.0

        for i in range(p):
            x_prev[i] = x[i]
            x[i] = u[i]
            g_x[i] = g_u[i]
        for i in range(n):
            tx[i] = tu[i]
        f_x = f_u
        obj = obj_u
        t_prev = t_cur
        step = next_step
        trace[n_trace] = obj
        n_trace += 1

        if obj > 1e6 * (1.0 + abs(obj0)):
            status = STATUS_BLOWUP
            break

    return x, trace, n_trace, iterations, status, step
