"""Independent reference computations used to freeze expected values.

Nothing here imports the code under test.
"""

import numpy as np


def young_log_bl_grid(lo=-3.0, hi=3.0, points=41, rounds=40, shrink=0.35):
    """Brute-force sup of log BL(B, p; a) for B = ([1 0], [0 1], [1 1]) and
    p = (2/3, 2/3, 2/3) over scalars a_j in [10^lo, 10^hi].

    The aggregate is the 2x2 matrix (2/3)[[a1 + a3, a3], [a3, a2 + a3]], whose
    determinant is written out by hand. A log-spaced grid is refined around
    the best point until the box collapses.
    """
    center = np.zeros(3)
    half = np.full(3, (hi - lo) / 2.0)
    center[:] = (hi + lo) / 2.0
    best = -np.inf
    for _ in range(rounds):
        axes = [np.linspace(c - h, c + h, points) for c, h in zip(center, half)]
        e1, e2, e3 = np.meshgrid(*axes, indexing="ij")
        a1, a2, a3 = 10.0**e1, 10.0**e2, 10.0**e3
        det = (4.0 / 9.0) * ((a1 + a3) * (a2 + a3) - a3 * a3)
        val = 0.5 * ((2.0 / 3.0) * (np.log(a1) + np.log(a2) + np.log(a3)) - np.log(det))
        idx = np.unravel_index(np.argmax(val), val.shape)
        best = max(best, float(val[idx]))
        center = np.array([axes[k][idx[k]] for k in range(3)])
        half = np.maximum(half * shrink, 1e-12)
    return best


def sqrt_2x2_from_eigs():
    """sqrt([[2, 1], [1, 2]]) from eigenpairs 3, (1, 1)/sqrt 2 and 1, (1, -1)/sqrt 2."""
    u = np.array([1.0, 1.0]) / np.sqrt(2.0)
    v = np.array([1.0, -1.0]) / np.sqrt(2.0)
    return np.sqrt(3.0) * np.outer(u, u) + 1.0 * np.outer(v, v)


def central_difference(f, x, q, h):
    return (f(x + h * q) - f(x - h * q)) / (2.0 * h)
