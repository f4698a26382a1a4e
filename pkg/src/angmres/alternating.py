"""Alternating NGMRES driver plus periodicity and stagnation diagnostics.

The alternating scheme runs p-1 Richardson steps between accelerated
steps: iteration k is accelerated exactly when p divides k.  period=1
recovers plain NGMRES(m); unbounded depth with period p reproduces full
GMRES at the indices jp while the underlying Krylov space keeps growing.
"""

from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .linops import DEFAULT_RANK_TOL
from .ngmres import _run_windowed


class FingerprintMismatchError(ValueError):
    """Histories being compared come from different problems."""


@dataclass(frozen=True)
class AlternatingSchedule:
    """period p >= 1 between accelerated steps; depth m is the window
    capacity (None = unbounded)."""

    period: int
    depth: int | None = None

    def __post_init__(self):
        if self.period < 1:
            raise ValueError("period must be at least 1")
        if self.depth is not None and self.depth < 0:
            raise ValueError("depth must be >= 0 (or None for unbounded)")

    def is_accelerated_index(self, k):
        return k >= 1 and k % self.period == 0


def run_angmres(fpmap, u0, schedule, cfg=RunConfig(), rank_tol=DEFAULT_RANK_TOL):
    """Drive the alternating iteration under the given schedule."""
    return _run_windowed(
        fpmap, u0, schedule.depth, schedule.period, cfg, rank_tol=rank_tol
    )


@dataclass
class PeriodicEquivalenceReport:
    """Residual/iterate discrepancies at the multiples of the period.

    Relative discrepancies are floored: when both residual norms sit below
    `floor` the pair counts as matched (discrepancy 0), which keeps
    converged tails (where |a - b| is pure evaluation noise) from reading
    as mismatches.
    """

    period: int
    indices: np.ndarray
    residual_discrepancy: np.ndarray
    iterate_discrepancy: np.ndarray | None
    tol: float
    floor: float

    @property
    def max_residual_discrepancy(self):
        return float(self.residual_discrepancy.max()) if self.indices.size else 0.0

    @property
    def first_violation(self):
        bad = np.nonzero(self.residual_discrepancy > self.tol)[0]
        return int(self.indices[bad[0]]) if bad.size else None

    @property
    def ok(self):
        return self.first_violation is None


def check_periodic_equivalence(hist_a, hist_b, period, tol=1e-8, floor=None):
    """Compare two histories at indices period, 2*period, ...

    Histories carrying different problem fingerprints raise
    FingerprintMismatchError.  floor defaults to 1e-10 times the larger
    initial residual norm (the default convergence threshold), so residual
    norms that have both converged compare as equal.
    """
    fa, fb = hist_a.problem_fingerprint, hist_b.problem_fingerprint
    if fa is not None and fb is not None and fa != fb:
        raise FingerprintMismatchError(
            "histories have different problem fingerprints"
        )
    ra = hist_a.residual_norms()
    rb = hist_b.residual_norms()
    if floor is None:
        floor = 1e-10 * max(ra[0], rb[0])
    last = min(hist_a.last_index, hist_b.last_index)
    idx = np.arange(period, last + 1, period, dtype=int)
    res_disc = np.zeros(idx.size)
    for out, k in enumerate(idx):
        x, y = ra[k], rb[k]
        if max(x, y) > floor:
            res_disc[out] = abs(x - y) / max(x, y)

    it_disc = None
    if hist_a.iterates is not None and hist_b.iterates is not None:
        it_disc = np.zeros(idx.size)
        for out, k in enumerate(idx):
            ua, ub = hist_a.iterates[k], hist_b.iterates[k]
            na = np.linalg.norm(ua)
            nb = np.linalg.norm(ub)
            denom = max(na, nb)
            if denom > 0:
                it_disc[out] = np.linalg.norm(ua - ub) / denom
    return PeriodicEquivalenceReport(period, idx, res_disc, it_disc, tol, floor)


def detect_stagnation(hist, tol=1e-12):
    """Maximal runs of consecutive indices with pairwise-equal residual norms.

    Two norms count as equal when |a - b| <= tol * max(a, b).  Returns a
    list of (start_index, end_index) pairs covering runs of length >= 2;
    a strictly decreasing history gives [].
    """
    rn = hist.residual_norms()
    ks = hist.indices()
    runs = []
    i = 0
    while i < len(rn):
        j = i
        lo = hi = rn[i]
        while j + 1 < len(rn):
            nlo, nhi = min(lo, rn[j + 1]), max(hi, rn[j + 1])
            if nhi - nlo <= tol * nhi:
                lo, hi = nlo, nhi
                j += 1
            else:
                break
        if j > i:
            runs.append((int(ks[i]), int(ks[j])))
        i = j + 1
    return runs


def periodicity_defect(hist, period, start=0):
    """Largest |r_{k+period} - r_k| over residual norms with k >= start.

    A small defect relative to the initial residual norm indicates the
    history has settled into a cycle of the given period.
    """
    rn = hist.residual_norms()
    if len(rn) <= period + start:
        return 0.0
    window = rn[start:]
    return float(np.abs(window[period:] - window[:-period]).max())
