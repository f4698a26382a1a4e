"""Windowed NGMRES acceleration of the Richardson iteration.

One accelerated step combines the newest fixed-point update with the
trailing window of iterates,

    u_{k+1} = q(u_k) + sum_i beta_i (q(u_k) - u_{k-i}),   i = 0..m_k,

where beta minimizes || r(q(u_k)) + sum_i beta_i (r(q(u_k)) - r(u_{k-i})) ||
and m_k = min(k, m).  Because r is affine, r(q(u_k)) = r_k - A r_k costs a
single extra operator application, and the least-squares minimum value is
exactly the new residual norm, so the residual history is monotone.

An equivalent change-of-variables form works on consecutive iterate
differences (gamma coefficients); both are provided, along with a
multisecant-form verifier used to cross-check steps on dense problems.
"""

import time
from collections import deque
from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .linops import DEFAULT_RANK_TOL, as_vector, solve_lsq_min_norm, two_norm
from .iterate import (
    ConvergenceHistory,
    IterationRecord,
    StepKind,
    Termination,
    problem_fingerprint,
)


class RankDeficientWindowError(ValueError):
    """Window difference matrix does not have full column rank."""


class IterationWindow:
    """Trailing (iterate, residual) pairs consumed by an accelerated step.

    capacity m keeps at most m+1 entries (the newest survives); None keeps
    every appended entry.  Entries are stored oldest first.
    """

    def __init__(self, capacity=None):
        if capacity is not None and capacity < 0:
            raise ValueError("window capacity must be >= 0 (or None for unbounded)")
        self.capacity = capacity
        maxlen = None if capacity is None else capacity + 1
        self._us = deque(maxlen=maxlen)
        self._rs = deque(maxlen=maxlen)

    def append(self, u, r):
        self._us.append(np.array(u, dtype=float, copy=True))
        self._rs.append(np.array(r, dtype=float, copy=True))

    def __len__(self):
        return len(self._us)

    @property
    def latest(self):
        if not self._us:
            raise ValueError("window is empty")
        return self._us[-1], self._rs[-1]

    def iterates(self):
        return list(self._us)

    def residuals(self):
        return list(self._rs)


@dataclass(frozen=True)
class NgmresStepReport:
    """Outcome of one accelerated step.

    predicted_residual_norm is the least-squares minimum value, which for
    this iteration equals the residual norm of new_iterate up to roundoff.
    """

    new_iterate: np.ndarray
    coefficients: np.ndarray
    predicted_residual_norm: float
    lsq_effective_rank: int


def ngmres_step(fpmap, window, rank_tol=DEFAULT_RANK_TOL):
    """One accelerated step from the newest window entry (beta form).

    Costs one operator application (for r_k - A r_k).  Handles
    rank-deficient windows through the pivot truncation of the
    least-squares kernel, so stagnating windows with duplicate entries
    stay well defined.
    """
    if len(window) == 0:
        raise ValueError("window must contain the current iterate")
    u_k, r_k = window.latest
    q_u = u_k - r_k
    mr = r_k - fpmap.op.apply(r_k)  # residual of q(u_k)
    w = len(window)
    if two_norm(mr) == 0.0:
        # q(u_k) is already exact; any correction could only hurt.
        return NgmresStepReport(q_u, np.zeros(w), 0.0, 0)

    us = window.iterates()
    rs = window.residuals()
    d = np.column_stack([mr - rs[-1 - i] for i in range(w)])
    sol = solve_lsq_min_norm(d, mr, rank_tol=rank_tol)
    beta = sol.coefficients
    p = np.column_stack([us[-1 - i] for i in range(w)])
    u_next = (1.0 + beta.sum()) * q_u - p @ beta
    return NgmresStepReport(u_next, beta, sol.residual_norm, sol.effective_rank)


def ngmres_step_gamma(fpmap, window, rank_tol=DEFAULT_RANK_TOL):
    """Difference-form accelerated step (gamma coefficients).

    Writes the same update as ngmres_step on the basis of consecutive
    iterate differences plus the fixed-point direction:

        u_{k+1} = u_k - r_k + S gamma,

    with S columns [u_{j+1} - u_j (oldest first), -r_k] and the
    least-squares system on the corresponding residual differences.  On a
    full-rank window the produced iterate matches the beta form.
    """
    if len(window) == 0:
        raise ValueError("window must contain the current iterate")
    u_k, r_k = window.latest
    mr = r_k - fpmap.op.apply(r_k)
    w = len(window)
    if two_norm(mr) == 0.0:
        return NgmresStepReport(u_k - r_k, np.zeros(w), 0.0, 0)

    us = window.iterates()
    rs = window.residuals()
    d_cols = [rs[j + 1] - rs[j] for j in range(w - 1)]
    d_cols.append(mr - r_k)
    s_cols = [us[j + 1] - us[j] for j in range(w - 1)]
    s_cols.append(-r_k)
    d = np.column_stack(d_cols)
    sol = solve_lsq_min_norm(d, mr, rank_tol=rank_tol)
    gamma = sol.coefficients
    u_next = u_k - r_k + np.column_stack(s_cols) @ gamma
    return NgmresStepReport(u_next, gamma, sol.residual_norm, sol.effective_rank)


def _run_windowed(fpmap, u0, capacity, period, cfg, rank_tol=DEFAULT_RANK_TOL):
    """Shared driver: accelerated step when period divides k, else Richardson.

    period=1 is plain NGMRES(m).  The window slides across the whole run;
    every produced iterate is appended with a freshly computed residual.
    """
    u = as_vector(u0, fpmap.n).copy()
    if not np.isfinite(u).all():
        raise ValueError("initial guess must be finite")
    r = fpmap.residual(u)
    rn = two_norm(r)
    fp = problem_fingerprint(fpmap, u)
    window = IterationWindow(capacity)
    window.append(u, r)
    records = [IterationRecord(0, rn, StepKind.FIXED_POINT)]
    iterates = [u.copy()]
    threshold = cfg.threshold(rn)
    if rn <= threshold:
        return ConvergenceHistory(records, u, Termination.CONVERGED, fp, iterates)

    term = Termination.MAX_ITER
    for k in range(1, cfg.max_iter + 1):
        t0 = time.perf_counter()
        if k % period == 0:
            report = ngmres_step(fpmap, window, rank_tol=rank_tol)
            u_next = report.new_iterate
            kind = StepKind.NGMRES
        else:
            u_next = u - r
            kind = StepKind.FIXED_POINT
        r_next = fpmap.residual(u_next)
        dt = time.perf_counter() - t0
        rn_next = two_norm(r_next)
        if not (np.isfinite(rn_next) and np.isfinite(u_next).all()):
            term = Termination.BREAKDOWN
            break
        if kind is StepKind.NGMRES and rn_next > rn:
            # The current iterate is feasible for the step's own
            # minimization (beta_0 = -1 reproduces u_k), so a computed
            # residual above ||r_k|| is pure LSQ roundoff on a stalled
            # window; holding the iterate realizes the descent lemma.
            u_next, r_next, rn_next = u.copy(), r.copy(), rn
        u, r, rn = u_next, r_next, rn_next
        window.append(u, r)
        records.append(IterationRecord(k, rn, kind, dt))
        iterates.append(u.copy())
        if rn <= threshold:
            term = Termination.CONVERGED
            break
    return ConvergenceHistory(records, u, term, fp, iterates)


def run_ngmres(fpmap, u0, m, cfg=RunConfig(), rank_tol=DEFAULT_RANK_TOL):
    """Accelerate every iteration with window capacity m (None = unbounded)."""
    return _run_windowed(fpmap, u0, m, 1, cfg, rank_tol=rank_tol)


def verify_multisecant(fpmap, window, report):
    """Relative discrepancy between a step's residual and the multisecant form.

    With S the window difference matrix and W = S (S^T A^T A S)^{-1} S^T A^T,
    the accelerated residual is (I - A W) M r_k.  Needs a dense operator and
    a full-rank window; duplicate iterates raise RankDeficientWindowError.
    """
    if len(window) == 0:
        raise ValueError("window must contain the current iterate")
    a = fpmap.op.to_dense()
    us = window.iterates()
    u_k, r_k = window.latest
    cols = [us[j + 1] - us[j] for j in range(len(us) - 1)]
    cols.append(-r_k)
    s = np.column_stack(cols)
    d = a @ s
    sv = np.linalg.svd(d, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] <= 1e-10 * sv[0]:
        raise RankDeficientWindowError(
            "window difference matrix is numerically rank deficient"
        )
    w_mat = s @ np.linalg.solve(d.T @ d, d.T)
    mr = r_k - a @ r_k
    predicted = mr - a @ (w_mat @ mr)
    actual = fpmap.residual(report.new_iterate)
    return two_norm(actual - predicted) / two_norm(r_k)
