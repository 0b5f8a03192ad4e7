"""Pure numpy implementations of the hot kernels.

Must stay operation-for-operation identical to ``_kernels.pyx`` for
``threshold_sizes`` (sequential prefix sums, same comparison expressions) so
both backends return the same integers.
"""
import numpy as np

NAME = "python"


def threshold_sizes(sorted_r):
    """Return ``(tau_o, h)`` for ascending residual magnitudes ``sorted_r``.

    Both are 1-based counts. ``tau_o`` is the first minimiser of
    ``|s[tau]^2 - sum(s[:tau'] ** 2) / tau'|`` over ``tau`` in
    ``[ceil(n/2) + 1, n]`` with ``tau' = tau - ceil(n/2)``; ``h`` is the
    largest ``tau`` in ``[1, n]`` with ``s[tau] <= 2 tau s[tau_o] / tau_o``.
    """
    s = np.asarray(sorted_r, dtype=np.float64)
    n = s.shape[0]
    half = (n + 1) // 2
    sq = s * s
    prefix = np.cumsum(sq)
    taus = np.arange(half + 1, n + 1)
    tp = taus - half
    scores = np.abs(sq[taus - 1] - prefix[tp - 1] / tp)
    tau_o = int(taus[np.argmin(scores)])

    r_o = s[tau_o - 1]
    all_taus = np.arange(1, n + 1, dtype=np.float64)
    feasible = np.flatnonzero(s <= 2.0 * all_taus * r_o / tau_o)
    return tau_o, int(feasible[-1]) + 1


def weiszfeld(points, x0, max_iter, step_tol, sing_eps):
    """Weiszfeld iteration with the Vardi-Zhang fix at data points.

    Returns ``(x, iterations, at_point)`` where ``at_point`` is the index of
    an input point certified optimal by its subgradient test, or -1.
    """
    pts = np.asarray(points, dtype=np.float64)
    x = np.array(x0, dtype=np.float64, copy=True)
    for it in range(1, max_iter + 1):
        diff = pts - x
        dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        if (dist < sing_eps).any():
            # test optimality at the closest coincident input point
            j = int(np.argmin(dist))
            d_j = pts - pts[j]
            dd = np.sqrt(np.einsum("ij,ij->i", d_j, d_j))
            coincide = dd < sing_eps
            far = ~coincide
            if not far.any():
                return pts[j].copy(), it, j
            pull = (d_j[far] / dd[far, None]).sum(axis=0)
            if np.sqrt(pull @ pull) <= coincide.sum():
                return pts[j].copy(), it, j
            w = 1.0 / dd[far]
            t = (w[:, None] * pts[far]).sum(axis=0) / w.sum()
            shrink = coincide.sum() / np.sqrt(pull @ pull)
            x_new = (1.0 - shrink) * t + shrink * pts[j]
        else:
            w = 1.0 / dist
            x_new = (w[:, None] * pts).sum(axis=0) / w.sum()
        step = x_new - x
        x = x_new
        if np.sqrt(step @ step) < step_tol:
            return x, it, -1
    return x, max_iter, -1
