"""GMRES oracles (full and restarted) and Krylov-space diagnostics.

The Arnoldi process uses modified Gram-Schmidt with a single
reorthogonalization pass when the measured loss of orthogonality exceeds
1e-8, and Givens rotations to keep the projected least-squares problem
triangular.  Iterates are materialized at every index so runs can be
compared pointwise against the alternating scheme.

Two indices are reported alongside a full run: the degrade (grade) of the
Krylov space, detected via happy breakdown of the subdiagonal, and the
first stagnation index, the smallest l with u_l = u_{l+1}.
"""

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .config import RunConfig
from .linops import as_vector, two_norm
from .iterate import (
    ConvergenceHistory,
    IterationRecord,
    StepKind,
    Termination,
    problem_fingerprint,
)

REORTH_TOL = 1e-8
BREAKDOWN_TOL_FACTOR = 1e-12
STAGNATION_TOL = 1e-12


class KrylovRankLossError(ValueError):
    """Requested span dimension exceeds the degrade of the Krylov space."""


@dataclass(frozen=True)
class KrylovIndices:
    """degrade: dimension at which the Krylov space stops growing (None if
    not reached during the run).  stagnation_index: first l with
    u_l = u_{l+1} (None if no stagnation observed)."""

    degrade: int | None
    stagnation_index: int | None


class ArnoldiState:
    """Arnoldi factorization A V_j = V_{j+1} H_j grown one column at a time.

    Keeps both the raw Hessenberg matrix (for factorization checks) and
    its Givens-rotated triangular form with the transformed rhs (for
    iterate solves).
    """

    def __init__(self, op, r0, max_steps, breakdown_tol):
        n = op.n
        self.op = op
        self.max_steps = min(max_steps, n)
        self.breakdown_tol = breakdown_tol
        self.r0_norm = two_norm(r0)
        if self.r0_norm == 0.0:
            raise ValueError("cannot start Arnoldi from a zero vector")
        self.v = np.zeros((n, self.max_steps + 1))
        self.v[:, 0] = r0 / self.r0_norm
        self.h = np.zeros((self.max_steps + 1, self.max_steps))
        self.r = np.zeros((self.max_steps + 1, self.max_steps))
        self.g = np.zeros(self.max_steps + 1)
        self.g[0] = self.r0_norm
        self.cs = np.zeros(self.max_steps)
        self.sn = np.zeros(self.max_steps)
        self.size = 0
        self.breakdown = False

    def basis(self):
        """Columns spanning the current Krylov space."""
        return self.v[:, : self.size + (0 if self.breakdown else 1)]

    def extend(self):
        """Add one Krylov direction; sets self.breakdown on a tiny subdiagonal."""
        if self.breakdown or self.size >= self.max_steps:
            raise ValueError("cannot extend this Arnoldi factorization further")
        j = self.size
        w = self.op.apply(self.v[:, j])
        for i in range(j + 1):
            hij = float(self.v[:, i] @ w)
            w -= hij * self.v[:, i]
            self.h[i, j] = hij
        wn = two_norm(w)
        if wn > 0.0:
            loss = float(np.max(np.abs(self.v[:, : j + 1].T @ w)))
            if loss > REORTH_TOL * wn:
                for i in range(j + 1):
                    c = float(self.v[:, i] @ w)
                    w -= c * self.v[:, i]
                    self.h[i, j] += c
                wn = two_norm(w)
        self.h[j + 1, j] = wn
        if wn <= self.breakdown_tol:
            self.breakdown = True
        else:
            self.v[:, j + 1] = w / wn

        # Givens update of the triangular factor and transformed rhs.
        col = self.h[: j + 2, j].copy()
        for i in range(j):
            ci, si = self.cs[i], self.sn[i]
            t0 = ci * col[i] + si * col[i + 1]
            t1 = -si * col[i] + ci * col[i + 1]
            col[i], col[i + 1] = t0, t1
        denom = float(np.hypot(col[j], col[j + 1]))
        if denom == 0.0:
            ci, si = 1.0, 0.0
        else:
            ci, si = col[j] / denom, col[j + 1] / denom
        self.cs[j], self.sn[j] = ci, si
        col[j] = ci * col[j] + si * col[j + 1]
        col[j + 1] = 0.0
        self.r[: j + 2, j] = col
        gj = self.g[j]
        self.g[j] = ci * gj
        self.g[j + 1] = -si * gj
        self.size = j + 1

    def solve_iterate(self, u0):
        """Minimum-residual iterate over the current Krylov space.

        The basis starts from the residual r0 = A u0 - b, so the projected
        problem is min_y || beta e1 + H y || and the update enters with a
        minus sign: u = u0 - V y.
        """
        j = self.size
        if j == 0:
            return np.array(u0, dtype=float, copy=True)
        y = scipy.linalg.solve_triangular(self.r[:j, :j], self.g[:j])
        return u0 - self.v[:, :j] @ y


def _iterate_scale(u_a, u_b, r0_norm):
    return max(np.linalg.norm(u_a), np.linalg.norm(u_b), r0_norm)


def run_gmres_full(fpmap, u0, cfg=RunConfig()):
    """Full GMRES with per-index iterates and Krylov indices.

    Returns (history, KrylovIndices).  The degrade is reported when happy
    breakdown occurs (or the basis fills the whole space) before the run
    stops; stagnation_index is the first l with consecutive iterates equal
    to relative tolerance 1e-12.
    """
    u0 = as_vector(u0, fpmap.n).copy()
    r0 = fpmap.residual(u0)
    rn = two_norm(r0)
    fp = problem_fingerprint(fpmap, u0)
    records = [IterationRecord(0, rn, StepKind.GMRES_ORACLE)]
    iterates = [u0.copy()]
    threshold = cfg.threshold(rn)
    if rn <= threshold:
        hist = ConvergenceHistory(records, u0, Termination.CONVERGED, fp, iterates)
        return hist, KrylovIndices(0 if rn == 0.0 else None, None)

    max_steps = min(cfg.max_iter, fpmap.n)
    state = ArnoldiState(fpmap.op, r0, max_steps, BREAKDOWN_TOL_FACTOR * rn)
    degrade = None
    stagnation = None
    u_prev = u0
    term = Termination.MAX_ITER
    for j in range(1, max_steps + 1):
        t0 = time.perf_counter()
        state.extend()
        u = state.solve_iterate(u0)
        r = fpmap.residual(u)
        dt = time.perf_counter() - t0
        rj = two_norm(r)
        records.append(IterationRecord(j, rj, StepKind.GMRES_ORACLE, dt))
        iterates.append(u.copy())
        if state.breakdown and degrade is None:
            degrade = j
        if stagnation is None:
            scale = _iterate_scale(u, u_prev, rn)
            if np.linalg.norm(u - u_prev) <= STAGNATION_TOL * scale:
                stagnation = j - 1
        u_prev = u
        if rj <= threshold:
            term = Termination.CONVERGED
            break
        if state.breakdown:
            break
    if degrade is None and not state.breakdown and state.size == fpmap.n:
        degrade = fpmap.n
    hist = ConvergenceHistory(records, u_prev, term, fp, iterates)
    return hist, KrylovIndices(degrade, stagnation)


def run_gmres_restarted(fpmap, u0, restart, cfg=RunConfig()):
    """GMRES(restart) with globally indexed per-step records."""
    if restart < 1:
        raise ValueError("restart length must be at least 1")
    u = as_vector(u0, fpmap.n).copy()
    r = fpmap.residual(u)
    rn = two_norm(r)
    fp = problem_fingerprint(fpmap, u)
    records = [IterationRecord(0, rn, StepKind.GMRES_ORACLE)]
    iterates = [u.copy()]
    threshold = cfg.threshold(rn)
    if rn <= threshold:
        return ConvergenceHistory(records, u, Termination.CONVERGED, fp, iterates)

    term = Termination.MAX_ITER
    k = 0
    done = False
    while not done and k < cfg.max_iter:
        r = fpmap.residual(u)
        rcycle = two_norm(r)
        if rcycle <= threshold:
            term = Termination.CONVERGED
            break
        cycle_len = min(restart, fpmap.n, cfg.max_iter - k)
        state = ArnoldiState(fpmap.op, r, cycle_len, BREAKDOWN_TOL_FACTOR * rcycle)
        u_start = u
        for _ in range(cycle_len):
            t0 = time.perf_counter()
            state.extend()
            u = state.solve_iterate(u_start)
            rj = two_norm(fpmap.residual(u))
            dt = time.perf_counter() - t0
            k += 1
            records.append(IterationRecord(k, rj, StepKind.GMRES_ORACLE, dt))
            iterates.append(u.copy())
            if rj <= threshold:
                term = Termination.CONVERGED
                done = True
                break
            if state.breakdown:
                break
    return ConvergenceHistory(records, u, term, fp, iterates)


def krylov_degrade(op, r0, breakdown_tol_factor=BREAKDOWN_TOL_FACTOR):
    """Dimension at which K_j(A, r0) stops growing, found by Arnoldi breakdown."""
    rn = two_norm(as_vector(r0, op.n))
    if rn == 0.0:
        return 0
    state = ArnoldiState(op, np.asarray(r0, dtype=float), op.n, breakdown_tol_factor * rn)
    while not state.breakdown and state.size < op.n:
        state.extend()
    return state.size if state.breakdown else op.n


def krylov_span_check(fpmap, u0, j):
    """Largest principal angle between span{u_i - u0} and K_j(A, r0).

    u_1..u_j are Richardson iterates from u0.  The span is evaluated
    through the telescoped basis of consecutive differences (u_i -
    u_{i-1} = -M^{i-1} r0), normalized per column, so the rank decision
    does not depend on how fast the iteration contracts.  Raises
    KrylovRankLossError when either set of directions falls short of
    rank j (i.e. j exceeds the degrade of the Krylov space).
    """
    if j < 1:
        raise ValueError("span dimension must be at least 1")
    u0 = as_vector(u0, fpmap.n).copy()
    r0 = fpmap.residual(u0)
    rn = two_norm(r0)
    if rn == 0.0:
        raise KrylovRankLossError("initial residual is zero; Krylov space is trivial")

    # Orthonormalize the differences progressively; a column whose new
    # direction falls to roundoff relative to its own norm marks genuine
    # degrade (the power basis itself is exponentially ill conditioned,
    # so a global singular-value ratio would trip on benign spectra).
    basis = []
    u = u0
    for i in range(j):
        u_next = u - fpmap.residual(u)
        d = u_next - u
        u = u_next
        dn = np.linalg.norm(d)
        if dn == 0.0:
            raise KrylovRankLossError(
                f"iterate differences are rank deficient before dimension {j}"
            )
        w = d / dn
        for _ in range(2):
            for q in basis:
                w = w - (q @ w) * q
        wn = np.linalg.norm(w)
        if wn <= BREAKDOWN_TOL_FACTOR:
            raise KrylovRankLossError(
                f"iterate differences are rank deficient before dimension {j}"
            )
        basis.append(w / wn)
    s = np.column_stack(basis)

    state = ArnoldiState(fpmap.op, r0, min(j, fpmap.n), BREAKDOWN_TOL_FACTOR * rn)
    for _ in range(j):
        if state.breakdown:
            break
        state.extend()
    # breakdown on the j-th extension still completes K_j (j = degrade);
    # only an earlier breakdown means the requested dimension is missing
    if state.size < j:
        raise KrylovRankLossError(f"Krylov space degraded before dimension {j}")
    v = state.v[:, :j]

    angles = scipy.linalg.subspace_angles(s, v)
    return float(angles.max()) if angles.size else 0.0
