"""Slow, loop-based reference implementations used only by the tests.

They are written from the defining formulas without reusing package code.
"""
from __future__ import annotations

import math

import numpy as np


def histogram_mi(y, lag, bins):
    y = [float(v) for v in y]
    lo, hi = min(y), max(y)
    idx = [min(bins - 1, max(0, int(math.floor((v - lo) / (hi - lo) * bins)))) for v in y]
    pairs = list(zip(idx[lag:], idx[:len(idx) - lag]))
    n = len(pairs)
    joint, pa, pb = {}, {}, {}
    for a, b in pairs:
        joint[(a, b)] = joint.get((a, b), 0) + 1
        pa[a] = pa.get(a, 0) + 1
        pb[b] = pb.get(b, 0) + 1
    total = 0.0
    for (a, b), c in joint.items():
        p = c / n
        total += p * math.log2(p / ((pa[a] / n) * (pb[b] / n)))
    return total


def fnn_percent(y, tau, dim, rtol=15.0, tiny=0.0):
    y = list(map(float, y))
    start = dim * tau
    pts = [[y[n - j * tau] for j in range(dim)] for n in range(start, len(y))]
    extra = [y[n - dim * tau] for n in range(start, len(y))]
    false = 0
    for i, p in enumerate(pts):
        best, bj = math.inf, -1
        for j, q in enumerate(pts):
            if i == j:
                continue
            d2 = sum((a - b) ** 2 for a, b in zip(p, q))
            if d2 < best:
                best, bj = d2, j
        d = math.sqrt(best)
        gap = abs(extra[i] - extra[bj])
        false += (gap > rtol * d) if d > tiny else (gap > tiny)
    return 100.0 * false / len(pts)


def dwt_symmetric_level(x, dec_lo, dec_hi):
    """One analysis level: half-point symmetric padding, full convolution, odd samples."""
    F = len(dec_lo)
    xp = np.pad(np.asarray(x, float), F - 1, mode="symmetric")
    lo = np.convolve(xp, dec_lo, mode="valid")[1::2]
    hi = np.convolve(xp, dec_hi, mode="valid")[1::2]
    n_out = (len(x) + F - 1) // 2
    return lo[:n_out], hi[:n_out]


def kernel(kind, a, x, z):
    if kind == "rbf":
        return math.exp(-sum((p - q) ** 2 for p, q in zip(x, z)) / (2 * a * a))
    prod = 1.0
    for p, q in zip(x, z):
        u = (p - q) / a
        prod *= (1 - u * u) * math.exp(-u * u / 2)
    return prod


def lssvm_dense(X, y, kind, a, gamma):
    n = len(X)
    A = np.zeros((n + 1, n + 1))
    for i in range(n):
        A[0, i + 1] = A[i + 1, 0] = 1.0
        for j in range(n):
            A[i + 1, j + 1] = kernel(kind, a, X[i], X[j]) + (1.0 / gamma if i == j else 0.0)
    rhs = np.concatenate([[0.0], y])
    sol = np.linalg.solve(A, rhs)
    return sol[1:], sol[0], A, rhs


def performance_loop(y, f, y0, thr=0.005):
    l = len(y)
    eps = [y[i] - f[i] for i in range(l)]
    mse = sum(e * e for e in eps) / l
    mae = sum(abs(e) for e in eps) / l
    q = [abs(eps[i]) / abs(y[i]) for i in range(l)]
    qbar = sum(q) / l
    hits = 0
    for i in range(l):
        prev = y0 if i == 0 else y[i - 1]
        hits += (y[i] - prev) * (f[i] - prev) >= 0
    feas = sum(1 for e in eps if abs(e) <= thr)
    ebar = sum(eps) / l
    ybar = sum(y) / l
    s1 = math.sqrt(sum((e - ebar) ** 2 for e in eps) / l)
    s2 = math.sqrt(sum((v - ybar) ** 2 for v in y) / l)
    p = sum(1 for e in eps if abs(e - ebar) < 0.6745 * s2) / l
    u2 = (sum(e * e for e in eps) / l) / (sum(v * v for v in f) / l)
    return dict(accuracy=(1 - qbar) * 100, feasibility=feas / l * 100, consistency=hits / l * 100,
                mae=mae, rmse=math.sqrt(mse), mse=mse, mape=qbar * 100, c_ratio=s1 / s2,
                small_error_p=p, theil_u2=u2, mean_abs_rel_error=qbar)


def topsis_loop(X, w, benefit):
    m, k = len(X), len(X[0])
    norms = [math.sqrt(sum(X[i][j] ** 2 for i in range(m))) for j in range(k)]
    V = [[X[i][j] / norms[j] * w[j] for j in range(k)] for i in range(m)]
    best = [max(V[i][j] for i in range(m)) if benefit[j] else min(V[i][j] for i in range(m))
            for j in range(k)]
    worst = [min(V[i][j] for i in range(m)) if benefit[j] else max(V[i][j] for i in range(m))
             for j in range(k)]
    out = []
    for i in range(m):
        dp = math.sqrt(sum((V[i][j] - best[j]) ** 2 for j in range(k)))
        dn = math.sqrt(sum((V[i][j] - worst[j]) ** 2 for j in range(k)))
        out.append(dn / (dp + dn))
    return out, V, best, worst


def grey_coef_loop(D, rho):
    flat = [v for row in D for v in row]
    lo, hi = min(flat), max(flat)
    return [[(lo + rho * hi) / (v + rho * hi) for v in row] for row in D]


def simplex_grid_min(f, m, step):
    """Exhaustive minimum of f over the simplex grid with the given step (m <= 3)."""
    n = int(round(1 / step))
    best, arg = math.inf, None
    if m == 2:
        for i in range(n + 1):
            w = (i / n, 1 - i / n)
            v = f(w)
            if v < best:
                best, arg = v, w
    else:
        for i in range(n + 1):
            for j in range(n + 1 - i):
                w = (i / n, j / n, (n - i - j) / n)
                v = f(w)
                if v < best:
                    best, arg = v, w
    return arg, best


def conditional_entropy_loop(D, C):
    n = len(D)
    groups = {}
    for d, c in zip(D, C):
        groups.setdefault(tuple(c), []).append(d)
    h = 0.0
    for ds in groups.values():
        counts = {}
        for d in ds:
            counts[d] = counts.get(d, 0) + 1
        hd = -sum((c / len(ds)) * math.log(c / len(ds)) for c in counts.values())
        h += len(ds) / n * hd
    return h
