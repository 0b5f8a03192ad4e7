"""Independent reference computations used to check the fast paths.

Nothing here imports the code under test.
"""
import itertools
import math

import numpy as np


def sorted_magnitudes(r):
    """Ascending magnitudes via insertion sort (no numpy sorting)."""
    out = []
    for v in (abs(float(t)) for t in r):
        k = len(out)
        while k > 0 and out[k - 1] > v:
            k -= 1
        out.insert(k, v)
    return out


def brute_tau_o(r):
    """Direct O(n^2) evaluation of the reference-position argmin."""
    s = sorted_magnitudes(r)
    n = len(s)
    half = -(-n // 2)
    best_tau, best = None, None
    for tau in range(half + 1, n + 1):
        tp = tau - half
        acc = 0.0
        for v in s[:tp]:
            acc += v * v
        score = abs(s[tau - 1] * s[tau - 1] - acc / tp)
        if best is None or score < best:
            best_tau, best = tau, score
    return best_tau


def brute_heuristic_size(r):
    """Check every tau in [1, n] and keep the largest feasible one."""
    s = sorted_magnitudes(r)
    t_o = brute_tau_o(r)
    r_o = s[t_o - 1]
    feasible = [tau for tau in range(1, len(s) + 1) if s[tau - 1] <= 2.0 * tau * r_o / t_o]
    return max(feasible)


def median_objective(x, pts):
    return sum(math.dist(x, q) for q in pts)


def grid_median(points, coarse=41, rounds=60):
    """Geometric median by grid search over the bounding box with repeated zoom-in."""
    pts = [tuple(map(float, q)) for q in points]
    d = len(pts[0])
    lo = [min(q[i] for q in pts) for i in range(d)]
    hi = [max(q[i] for q in pts) for i in range(d)]
    width = [max(h - l, 1e-12) for l, h in zip(lo, hi)]
    axes = [np.linspace(l, h, coarse) for l, h in zip(lo, hi)]
    best = min(itertools.product(*axes), key=lambda x: median_objective(x, pts))
    step = [w / (coarse - 1) for w in width]
    for _ in range(rounds):
        offsets = [(-s, 0.0, s) for s in step]
        cand = [tuple(b + o for b, o in zip(best, off)) for off in itertools.product(*offsets)]
        best = min(cand, key=lambda x: median_objective(x, pts))
        step = [s * 0.6 for s in step]
    return np.array(best), median_objective(best, pts)


def eig2(a, b, c):
    """Eigenvalues of the symmetric matrix [[a, b], [b, c]] in closed form."""
    mid = 0.5 * (a + c)
    rad = math.hypot(0.5 * (a - c), b)
    return mid - rad, mid + rad


def ols(x, y):
    """Least squares via numpy's SVD-based solver (p x n design)."""
    return np.linalg.lstsq(np.asarray(x).T, np.asarray(y), rcond=None)[0]
