"""Vectors, operator wrappers, and the rank-aware least-squares kernel.

Vectors are plain 1-D float64 ndarrays and tall matrices are 2-D float64
ndarrays with at least one column.  ``LinearOperator`` wraps the three ways
a square operator shows up here (dense array, scipy sparse matrix, bare
matvec callable) behind a single ``apply``.
"""

import hashlib

import numpy as np
import scipy.io
import scipy.linalg
import scipy.sparse
from dataclasses import dataclass

EPS = float(np.finfo(float).eps)

# Pivot-truncation threshold for the least-squares kernel, relative to the
# largest pivot.
DEFAULT_RANK_TOL = float(np.sqrt(EPS))


def as_vector(x, n=None):
    """Coerce to a 1-D float64 ndarray, checking length when given."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if n is not None and v.size != n:
        raise ValueError(f"dimension mismatch: expected length {n}, got {v.size}")
    return v


def two_norm(v):
    """Euclidean norm with overflow-safe scaling.

    Returns 0.0 for the empty vector, and propagates inf/nan instead of
    raising so that drivers can flag breakdown themselves.
    """
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        return 0.0
    m = float(np.max(np.abs(v)))
    if m == 0.0 or not np.isfinite(m):
        return m
    return m * float(np.linalg.norm(v / m))


def _sha256(*parts):
    h = hashlib.sha256()
    for p in parts:
        h.update(p)
    return h.hexdigest()


def vector_digest(v):
    """Stable hex digest of a vector's float64 bytes."""
    v = np.ascontiguousarray(np.asarray(v, dtype=float))
    return _sha256(np.int64(v.size).tobytes(), v.tobytes())


class LinearOperator:
    """Square real operator applied through matrix-vector products.

    Applications are deterministic: the same input vector always produces
    the same output. Dimension mismatches raise ValueError; non-finite
    entries are passed through so drivers can detect breakdown.
    """

    def __init__(self, n, matvec, materialized=None, fingerprint=None):
        if n < 1:
            raise ValueError("operator dimension must be at least 1")
        self.n = int(n)
        self._matvec = matvec
        self._materialized = materialized
        self.fingerprint = fingerprint

    @property
    def shape(self):
        return (self.n, self.n)

    def apply(self, v):
        """Return A @ v as a fresh 1-D float64 array."""
        v = as_vector(v, self.n)
        out = np.asarray(self._matvec(v), dtype=float)
        if out.shape != (self.n,):
            raise ValueError(f"matvec returned shape {out.shape}, expected ({self.n},)")
        return out

    __call__ = apply

    def to_dense(self):
        """Materialize the operator as a dense (n, n) array."""
        m = self._materialized
        if m is None:
            cols = [self.apply(col) for col in np.eye(self.n)]
            return np.column_stack(cols)
        if scipy.sparse.issparse(m):
            return np.asarray(m.todense(), dtype=float)
        return np.array(m, dtype=float)

    @classmethod
    def from_dense(cls, a):
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        if not np.isfinite(a).all():
            raise ValueError("operator entries must be finite")
        a = np.ascontiguousarray(a)
        fp = _sha256(b"dense", np.int64(a.shape[0]).tobytes(), a.tobytes())
        return cls(a.shape[0], lambda v: a @ v, materialized=a, fingerprint=fp)

    @classmethod
    def from_sparse(cls, a):
        a = scipy.sparse.csr_matrix(a)
        if a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        if not np.isfinite(a.data).all():
            raise ValueError("operator entries must be finite")
        fp = _sha256(
            b"csr",
            np.int64(a.shape[0]).tobytes(),
            np.ascontiguousarray(a.indptr, dtype=np.int64).tobytes(),
            np.ascontiguousarray(a.indices, dtype=np.int64).tobytes(),
            np.ascontiguousarray(a.data, dtype=float).tobytes(),
        )
        return cls(a.shape[0], lambda v: a @ v, materialized=a, fingerprint=fp)

    @classmethod
    def identity(cls, n):
        return cls.from_sparse(scipy.sparse.identity(n, format="csr"))

    @classmethod
    def from_text_file(cls, path):
        """Read a dense row-major whitespace-separated text matrix."""
        a = np.loadtxt(path, dtype=float, ndmin=2)
        return cls.from_dense(a)

    @classmethod
    def from_matrix_market(cls, path):
        """Read a Matrix Market file (coordinate or array format)."""
        a = scipy.io.mmread(path)
        if scipy.sparse.issparse(a):
            return cls.from_sparse(a)
        return cls.from_dense(np.asarray(a))


@dataclass(frozen=True)
class LsqSolution:
    """Result of the truncated-rank least-squares solve.

    coefficients has one entry per column of the input matrix; columns
    dropped by the pivot truncation get an exact zero.
    """

    coefficients: np.ndarray
    effective_rank: int
    residual_norm: float


def solve_lsq_min_norm(d, rhs, rank_tol=DEFAULT_RANK_TOL):
    """Minimize ``|| rhs + d @ c ||_2`` over c with pivot-based rank truncation.

    Columns are first scaled to unit norm so that truncation decisions are
    scale free: in a window whose columns span many orders of magnitude
    (residual differences late in a long run) a small but independent
    direction must not be dropped just because its norm is tiny.  After
    equilibration a column-pivoted QR is taken; columns whose pivot
    magnitude falls below ``rank_tol`` times the largest pivot are
    discarded and their coefficients set to exactly zero, which keeps the
    solve well defined on rank-deficient windows (duplicate or zero
    columns).

    Parameters
    ----------
    d : (n, w) array_like
        Tall matrix of direction columns, w >= 1.
    rhs : (n,) array_like
    rank_tol : float
        Relative pivot threshold, must be positive.

    Returns
    -------
    LsqSolution
    """
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[1] < 1:
        raise ValueError(f"expected an (n, w) matrix with w >= 1, got shape {d.shape}")
    n, w = d.shape
    rhs = as_vector(rhs, n)
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    if not np.isfinite(d).all() or not np.isfinite(rhs).all():
        raise ValueError("least-squares inputs must be finite")

    # Equilibrate: zero columns keep scale 1 so they produce a zero pivot
    # and fall to the truncation rule.
    scale = np.sqrt(np.einsum("ij,ij->j", d, d))
    scale[scale == 0.0] = 1.0
    q, r, perm = scipy.linalg.qr(d / scale, mode="economic", pivoting=True)
    pivots = np.abs(np.diag(r))
    coeffs = np.zeros(w)
    if pivots.size == 0 or pivots[0] == 0.0:
        return LsqSolution(coeffs, 0, two_norm(rhs))
    # Pivot magnitudes are non-increasing, so the count above threshold is a
    # prefix length.
    rank = int(np.count_nonzero(pivots > rank_tol * pivots[0]))
    y = scipy.linalg.solve_triangular(r[:rank, :rank], q[:, :rank].T @ rhs)
    coeffs[perm[:rank]] = -y / scale[perm[:rank]]
    return LsqSolution(coeffs, rank, two_norm(rhs + d @ coeffs))
