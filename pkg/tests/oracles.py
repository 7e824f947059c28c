"""Slow, independent reference implementations used as test oracles.

Nothing here imports from illumest; each function is written from the
definition in the most direct way available.
"""
import itertools
import math
from fractions import Fraction

import numpy as np


def luma_fraction(r, g, b):
    """Round-half-up BT.601 luma using exact rationals."""
    v = Fraction(299, 1000) * r + Fraction(587, 1000) * g + Fraction(114, 1000) * b
    return min(255, max(0, math.floor(v + Fraction(1, 2))))


def otsu_brute(values):
    """Scan all 256 thresholds, class split {<= t} | {> t}, exact arithmetic."""
    best_t, best = None, None
    n = len(values)
    for t in range(256):
        lo = [v for v in values if v <= t]
        hi = [v for v in values if v > t]
        if not lo or not hi:
            continue
        w0, w1 = Fraction(len(lo), n), Fraction(len(hi), n)
        mu0, mu1 = Fraction(sum(lo), len(lo)), Fraction(sum(hi), len(hi))
        score = w0 * w1 * (mu0 - mu1) ** 2
        if best is None or score > best:
            best_t, best = t, score
    return best_t


def w2sq_permutations(a, b):
    """min over all n! matchings of mean squared distance."""
    n = len(a)
    best = math.inf
    for perm in itertools.permutations(range(n)):
        cost = sum((a[i][0] - b[j][0]) ** 2 + (a[i][1] - b[j][1]) ** 2 for i, j in enumerate(perm))
        best = min(best, cost / n)
    return best


def hausdorff_loops(a, b):
    def directed(p, q):
        return max(min(math.dist(x, y) for y in q) for x in p)

    return max(directed(a, b), directed(b, a))


def mean_pair(points):
    rows = [p[0] for p in points]
    cols = [p[1] for p in points]
    return math.fsum(rows) / len(rows), math.fsum(cols) / len(cols)


def sobel_mean_loops(img):
    """Mean 3x3 Sobel response with replicated borders, explicit loops."""
    h, w = len(img), len(img[0])

    def px(r, c):
        return img[min(max(r, 0), h - 1)][min(max(c, 0), w - 1)]

    kr = [[-1, -2, -1], [0, 0, 0], [1, 2, 1]]
    kc = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]]
    sr = sc = 0
    for r in range(h):
        for c in range(w):
            for i in range(3):
                for j in range(3):
                    v = px(r + i - 1, c + j - 1)
                    sr += kr[i][j] * v
                    sc += kc[i][j] * v
    return sr / (h * w), sc / (h * w)


def entropic_ot_dense(x, a, y, b, eps, iters=20000):
    """Plain (non-log) Sinkhorn scaling on the dense Gibbs kernel.

    Only usable where exp(-|x - y|^2 / eps) does not underflow. Returns the
    dual value <a, f> + <b, g> with f = eps log(u / a), g = eps log(v / b).
    """
    x, y, a, b = (np.asarray(v, dtype=float) for v in (x, y, a, b))
    cost = ((x[:, None, :] - y[None, :, :]) ** 2).sum(axis=2)
    kern = np.exp(-cost / eps)
    u, v = np.ones(len(a)), np.ones(len(b))
    for _ in range(iters):
        u = a / (kern @ v)
        v = b / (kern.T @ u)
    f = eps * np.log(u / a)
    g = eps * np.log(v / b)
    return float(a @ f + b @ g)
