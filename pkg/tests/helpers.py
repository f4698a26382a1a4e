"""Shared builders and independent minimax oracles for the test bed.

The oracles here deliberately avoid the code paths of the library: the
discrete min-max value is recomputed by coefficient grid search and by
equioscillation enumeration, so the linear-programming implementation is
cross-checked against two unrelated computations.
"""

from itertools import combinations, product

import numpy as np

from angmres import FixedPointMap, IterationWindow, LinearOperator


def dense_map(a, b):
    """FixedPointMap over a dense operator."""
    return FixedPointMap(
        LinearOperator.from_dense(np.asarray(a, dtype=float)),
        np.asarray(b, dtype=float),
    )


def richardson_window(fpmap, u0, m, k):
    """Window holding u0 and its k Richardson successors (capacity m)."""
    window = IterationWindow(m)
    u = np.array(u0, dtype=float)
    r = fpmap.residual(u)
    window.append(u, r)
    for _ in range(k):
        u = u - r
        r = fpmap.residual(u)
        window.append(u, r)
    return window


def minimax_grid_oracle(points, degree, half_width=500.0, rounds=16, grid=97):
    """Coefficient box search for min_c max_i |q(t_i)|, q(1) = 1.

    q(t) = 1 + sum_j c_j (t-1)^j with j = 1..degree.  The objective is a
    max of absolute values of affine functions of c, hence convex, so a
    shrinking refinement box around the sampled argmin converges.  Only
    degrees 0..2 are needed by the callers.
    """
    pts = np.asarray(points, dtype=float)
    shift = pts - 1.0
    if degree == 0:
        return 1.0
    if degree == 1:
        lo, hi = -half_width, half_width
        best = np.inf
        for _ in range(5):
            c = np.linspace(lo, hi, 20001)
            vals = np.abs(1.0 + np.outer(c, shift)).max(axis=1)
            i = int(vals.argmin())
            best = float(vals[i])
            step = (hi - lo) / 20000.0
            lo, hi = c[i] - 4.0 * step, c[i] + 4.0 * step
        return best
    if degree != 2:
        raise ValueError("grid oracle covers degree <= 2 only")
    lo = np.array([-half_width, -half_width])
    hi = np.array([half_width, half_width])
    best = np.inf
    for _ in range(rounds):
        c1 = np.linspace(lo[0], hi[0], grid)
        c2 = np.linspace(lo[1], hi[1], grid)
        q = (
            1.0
            + c1[:, None, None] * shift[None, None, :]
            + c2[None, :, None] * (shift**2)[None, None, :]
        )
        vals = np.abs(q).max(axis=2)
        i1, i2 = np.unravel_index(int(vals.argmin()), vals.shape)
        best = float(vals[i1, i2])
        s1 = (hi[0] - lo[0]) / (grid - 1)
        s2 = (hi[1] - lo[1]) / (grid - 1)
        lo = np.array([c1[i1] - 8.0 * s1, c2[i2] - 8.0 * s2])
        hi = np.array([c1[i1] + 8.0 * s1, c2[i2] + 8.0 * s2])
    return best


def minimax_active_set_oracle(points, degree):
    """Equioscillation enumeration for the same min-max value.

    The optimum of the degree-d problem is attained on d+1 active points
    with alternating-sign structure (two-point or one-point optima would
    need parallel gradients (s, s^2, ...) at distinct shifts s, which
    cannot happen away from t = 1).  Every candidate active set and sign
    pattern yields a small linear system; feasible candidates bound the
    optimum from above and the best one attains it.
    """
    pts = np.unique(np.asarray(points, dtype=float))
    s = pts - 1.0
    if degree >= pts.size:
        return 0.0
    if degree == 0:
        return 1.0
    m = degree + 1
    best = np.inf
    for idx in combinations(range(pts.size), m):
        for signs in product((-1.0, 1.0), repeat=m):
            a = np.zeros((m, m))
            for row, (i, sg) in enumerate(zip(idx, signs)):
                for d in range(degree):
                    a[row, d] = s[i] ** (d + 1)
                a[row, degree] = -sg
            try:
                sol = np.linalg.solve(a, -np.ones(m))
            except np.linalg.LinAlgError:
                continue
            tau = sol[degree]
            if not np.isfinite(tau) or tau < 0.0:
                continue
            q = 1.0 + sum(sol[d] * s ** (d + 1) for d in range(degree))
            if np.abs(q).max() <= tau * (1.0 + 1e-9) + 1e-12:
                best = min(best, float(tau))
    return best
