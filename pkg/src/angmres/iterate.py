"""Richardson fixed-point iteration and convergence-history bookkeeping.

The fixed-point map for A u = b is q(u) = u - (A u - b); its residual
r(u) = A u - b satisfies r(u) = u - q(u).  Each Richardson step costs
exactly one operator application.
"""

import time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .config import RunConfig
from .linops import LinearOperator, as_vector, two_norm, vector_digest, _sha256


class StepKind(str, Enum):
    FIXED_POINT = "FP"
    NGMRES = "NGMRES"
    GMRES_ORACLE = "GMRES"


class Termination(str, Enum):
    CONVERGED = "converged"
    MAX_ITER = "max-iter"
    BREAKDOWN = "breakdown"


@dataclass(frozen=True)
class IterationRecord:
    k: int
    residual_norm: float
    step_kind: StepKind
    wall_time: float = 0.0


@dataclass
class ConvergenceHistory:
    """Per-iteration records plus the final iterate.

    Record indices are contiguous from 0.  iterates, when retained, holds
    one vector per record (index aligned).
    """

    records: list
    final_iterate: np.ndarray
    termination: Termination
    problem_fingerprint: str | None = None
    iterates: list | None = None

    def __len__(self):
        return len(self.records)

    @property
    def last_index(self):
        return self.records[-1].k

    def indices(self):
        return np.array([rec.k for rec in self.records], dtype=int)

    def residual_norms(self):
        return np.array([rec.residual_norm for rec in self.records])

    def step_kinds(self):
        return [rec.step_kind for rec in self.records]

    def first_index_below(self, value):
        """Smallest record index with residual norm <= value, or None."""
        for rec in self.records:
            if rec.residual_norm <= value:
                return rec.k
        return None


@dataclass(frozen=True)
class FixedPointMap:
    """Richardson map q(u) = u - (A u - b) for a fixed operator and rhs."""

    op: LinearOperator
    b: np.ndarray

    def __post_init__(self):
        b = as_vector(self.b, self.op.n)
        if not np.isfinite(b).all():
            raise ValueError("right-hand side must be finite")
        object.__setattr__(self, "b", b)

    @property
    def n(self):
        return self.op.n

    def residual(self, u):
        return self.op.apply(u) - self.b

    def richardson_step(self, u):
        return as_vector(u, self.n) - self.residual(u)


def problem_fingerprint(fpmap, u0):
    """Digest of operator bytes + rhs + initial guess."""
    op_fp = fpmap.op.fingerprint or "anonymous"
    return _sha256(
        op_fp.encode(),
        vector_digest(fpmap.b).encode(),
        vector_digest(u0).encode(),
    )


def run_fixed_point(fpmap, u0, cfg=RunConfig()):
    """Drive the Richardson iteration until the stopping rule fires.

    Non-finite iterates terminate the run with Termination.BREAKDOWN and
    the last finite record retained.
    """
    u = as_vector(u0, fpmap.n).copy()
    if not np.isfinite(u).all():
        raise ValueError("initial guess must be finite")
    r = fpmap.residual(u)
    rn = two_norm(r)
    fp = problem_fingerprint(fpmap, u)
    records = [IterationRecord(0, rn, StepKind.FIXED_POINT)]
    iterates = [u.copy()]
    threshold = cfg.threshold(rn)
    if rn <= threshold:
        return ConvergenceHistory(records, u, Termination.CONVERGED, fp, iterates)

    term = Termination.MAX_ITER
    for k in range(1, cfg.max_iter + 1):
        t0 = time.perf_counter()
        u_next = u - r
        r_next = fpmap.residual(u_next)
        dt = time.perf_counter() - t0
        rn_next = two_norm(r_next)
        if not (np.isfinite(rn_next) and np.isfinite(u_next).all()):
            term = Termination.BREAKDOWN
            break
        u, r, rn = u_next, r_next, rn_next
        records.append(IterationRecord(k, rn, StepKind.FIXED_POINT, dt))
        iterates.append(u.copy())
        if rn <= threshold:
            term = Termination.CONVERGED
            break
    return ConvergenceHistory(records, u, term, fp, iterates)
