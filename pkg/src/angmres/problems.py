"""Benchmark problem generators and randomized instance families.

Three structured families: a circulant down-shift (orthogonal, spectrum on
the unit circle), a block-diagonal collection of circulant shifts with
growing block sizes, and the 5-point 2-D Dirichlet Laplacian.  Random
families produce instances with a prescribed iteration-matrix spectrum and
eigenvector conditioning, with the exact solution known by construction.

Builds are deterministic: the same spec yields byte-identical operators,
right-hand sides, and initial guesses.
"""

from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.linalg
import scipy.sparse

from .bounds import SpectralData
from .iterate import FixedPointMap, problem_fingerprint
from .linops import LinearOperator

U0_ONES = "ones"
U0_ZERO = "zero"
U0_RANDOM = "random"


@dataclass(frozen=True)
class LinearProblem:
    name: str
    op: LinearOperator
    b: np.ndarray
    u0: np.ndarray
    u_exact: np.ndarray | None = None

    def fixed_point_map(self):
        return FixedPointMap(self.op, self.b)

    @property
    def fingerprint(self):
        return problem_fingerprint(self.fixed_point_map(), self.u0)


def _initial_guess(policy, n, seed):
    if policy == U0_ONES:
        return np.ones(n)
    if policy == U0_ZERO:
        return np.zeros(n)
    if policy == U0_RANDOM:
        return np.random.default_rng(seed).standard_normal(n)
    raise ValueError(f"unknown initial-guess policy {policy!r}")


def circulant_shift_matrix(n):
    """Circulant down-shift: ones on the subdiagonal and in the corner."""
    if n < 2:
        raise ValueError("shift dimension must be at least 2")
    a = np.zeros((n, n))
    a[np.arange(1, n), np.arange(n - 1)] = 1.0
    a[0, n - 1] = 1.0
    return a


def circulant_shift(n=36, u0_policy=U0_ONES, u0_seed=0):
    """Down-shift system with b = e_1; the exact solution is e_n.

    The default initial guess of all ones leaves an initial residual of
    ones - e_1 and a Krylov space that only closes at dimension n.
    """
    a = circulant_shift_matrix(n)
    b = np.zeros(n)
    b[0] = 1.0
    exact = np.zeros(n)
    exact[n - 1] = 1.0
    u0 = _initial_guess(u0_policy, n, u0_seed)
    return LinearProblem(f"circulant-{n}", LinearOperator.from_dense(a), b, u0, exact)


def block_shift(block_unit=3, blocks=5, u0_policy=U0_ZERO, u0_seed=0):
    """Block-diagonal shifts of sizes block_unit * (1..blocks).

    The rhs puts a one at the first row of each block, so the exact
    solution has a one at the last row of each block.  The default zero
    initial guess makes the first Krylov direction orthogonal to the
    residual, which is what produces the GMRES stagnation plateaus.
    """
    if block_unit < 1 or blocks < 1:
        raise ValueError("block_unit and blocks must be positive")
    sizes = [block_unit * (k + 1) for k in range(blocks)]
    a = scipy.linalg.block_diag(*[circulant_shift_matrix(sz) for sz in sizes])
    n = a.shape[0]
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(int)
    b = np.zeros(n)
    b[starts] = 1.0
    exact = np.zeros(n)
    exact[starts + np.array(sizes) - 1] = 1.0
    u0 = _initial_guess(u0_policy, n, u0_seed)
    name = f"blockshift-{block_unit}x{blocks}"
    return LinearProblem(name, LinearOperator.from_dense(a), b, u0, exact)


def laplacian_2d(grid_n=64, u0_policy=U0_RANDOM, u0_seed=0):
    """5-point Dirichlet Laplacian on an interior grid_n x grid_n grid.

    Assembled as kron(I, T) + kron(T, I) with T = tridiag(-1, 2, -1), so
    the diagonal is 4 and the eigenvalues lie in (0, 8).  b is all ones;
    the default initial guess is seeded standard normal.
    """
    if grid_n < 1:
        raise ValueError("grid size must be positive")
    t = scipy.sparse.diags(
        [-np.ones(grid_n - 1), 2.0 * np.ones(grid_n), -np.ones(grid_n - 1)],
        offsets=[-1, 0, 1],
        format="csr",
    )
    eye = scipy.sparse.identity(grid_n, format="csr")
    a = (scipy.sparse.kron(eye, t) + scipy.sparse.kron(t, eye)).tocsr()
    n = grid_n * grid_n
    b = np.ones(n)
    u0 = _initial_guess(u0_policy, n, u0_seed)
    return LinearProblem(
        f"laplacian-{grid_n}x{grid_n}", LinearOperator.from_sparse(a), b, u0
    )


def from_file(path, u0_policy=U0_ZERO, u0_seed=0):
    """Problem from a stored operator (.mtx Matrix Market, else dense text).

    The rhs defaults to all ones; no exact solution is attached.
    """
    path = str(path)
    if path.endswith(".mtx"):
        op = LinearOperator.from_matrix_market(path)
    else:
        op = LinearOperator.from_text_file(path)
    b = np.ones(op.n)
    u0 = _initial_guess(u0_policy, op.n, u0_seed)
    return LinearProblem(f"file-{path}", op, b, u0)


def _random_orthogonal(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d


def _check_range(lo, hi):
    if not lo < hi:
        raise ValueError(f"need lo < hi, got ({lo}, {hi})")
    if lo <= 0.0 <= hi or lo <= 1.0 <= hi:
        raise ValueError(f"spectrum range ({lo}, {hi}) must exclude 0 and 1")


def random_spd(n, spectrum_range=(0.2, 0.8), seed=0):
    """SPD iteration matrix with spectrum sampled inside spectrum_range.

    Returns (problem, spectral_data).  The operator is A = I - M with
    M = Q diag(lam) Q^T for a seeded random orthogonal Q; the exact
    solution is a seeded standard-normal vector and b = A u_exact.
    """
    lo, hi = spectrum_range
    if lo <= 0.0:
        raise ValueError("SPD family needs a positive spectrum range")
    _check_range(lo, hi)
    rng = np.random.default_rng(seed)
    lam = np.sort(rng.uniform(lo, hi, n))
    q = _random_orthogonal(rng, n)
    m = (q * lam) @ q.T
    m = 0.5 * (m + m.T)
    a = np.eye(n) - m
    exact = rng.standard_normal(n)
    b = a @ exact
    u0 = rng.standard_normal(n)
    data = SpectralData(
        lam, 1.0, (float(lam[0]), float(lam[-1])), True, float(np.abs(lam).max())
    )
    problem = LinearProblem(
        f"random-spd-{n}-seed{seed}", LinearOperator.from_dense(a), b, u0, exact
    )
    return problem, data


def random_diagonalizable(n, spectrum_range=(0.2, 0.8), eig_condition=5.0, seed=0):
    """Diagonalizable iteration matrix with prescribed eigenvector conditioning.

    M = U diag(lam) U^{-1} with U built from two seeded orthogonal factors
    and a geometric singular-value profile, so kappa_2(U) equals
    eig_condition exactly.  spectrum_range must exclude 0 and 1 (the
    latter keeps A = I - M nonsingular).  Returns (problem, spectral_data).
    """
    lo, hi = spectrum_range
    _check_range(lo, hi)
    if eig_condition < 1.0:
        raise ValueError("eig_condition must be >= 1")
    rng = np.random.default_rng(seed)
    lam = np.sort(rng.uniform(lo, hi, n))
    q1 = _random_orthogonal(rng, n)
    q2 = _random_orthogonal(rng, n)
    sv = np.geomspace(1.0, eig_condition, n) if n > 1 else np.ones(1)
    u = (q1 * sv) @ q2
    uinv = (q2.T / sv) @ q1.T
    m = (u * lam) @ uinv
    a = np.eye(n) - m
    exact = rng.standard_normal(n)
    b = a @ exact
    u0 = rng.standard_normal(n)
    is_spd = eig_condition == 1.0 and lo > 0.0
    data = SpectralData(
        lam,
        float(eig_condition),
        (float(lam[0]), float(lam[-1])),
        is_spd,
        float(np.linalg.norm(m, 2)),
    )
    problem = LinearProblem(
        f"random-diag-{n}-c{eig_condition:g}-seed{seed}",
        LinearOperator.from_dense(a),
        b,
        u0,
        exact,
    )
    return problem, data


@dataclass(frozen=True)
class ProblemSpec:
    """Parsed problem description.

    kind is one of circulant, blockshift, laplacian, file, random-spd,
    random-diag; params carries the kind-specific values in order.
    """

    kind: str
    params: tuple = ()
    u0_policy: str | None = None
    u0_seed: int = 0

    @classmethod
    def parse(cls, text, u0_policy=None, u0_seed=0):
        """Parse CLI syntax like 'circulant:36' or 'random-spd:n=20,seed=3'."""
        kind, _, rest = text.partition(":")
        kind = kind.strip()
        if kind == "circulant":
            return cls(kind, (int(rest or 36),), u0_policy, u0_seed)
        if kind == "blockshift":
            parts = [int(p) for p in rest.split(",")] if rest else [3, 5]
            if len(parts) != 2:
                raise ValueError("blockshift takes two integers: unit,blocks")
            return cls(kind, tuple(parts), u0_policy, u0_seed)
        if kind == "laplacian":
            return cls(kind, (int(rest or 64),), u0_policy, u0_seed)
        if kind == "file":
            if not rest:
                raise ValueError("file kind needs a path")
            return cls(kind, (rest,), u0_policy, u0_seed)
        if kind in ("random-spd", "random-diag"):
            kv = {}
            if rest:
                for item in rest.split(","):
                    key, _, val = item.partition("=")
                    kv[key.strip()] = val.strip()
            n = int(kv.pop("n", 20))
            lo = float(kv.pop("lo", 0.2))
            hi = float(kv.pop("hi", 0.8))
            seed = int(kv.pop("seed", 0))
            cond = float(kv.pop("cond", 5.0)) if kind == "random-diag" else None
            if kv:
                raise ValueError(f"unknown {kind} parameters: {sorted(kv)}")
            params = (n, lo, hi, seed) if cond is None else (n, lo, hi, cond, seed)
            return cls(kind, params, u0_policy, u0_seed)
        raise ValueError(f"unknown problem kind {kind!r}")


def build(spec):
    """Materialize a ProblemSpec into a LinearProblem.

    Dense kinds get a nonsingularity check at build time.  Identical specs
    produce byte-identical problems.
    """
    kw = {}
    if spec.u0_policy is not None:
        kw["u0_policy"] = spec.u0_policy
    kw["u0_seed"] = spec.u0_seed
    if spec.kind == "circulant":
        problem = circulant_shift(spec.params[0], **kw)
    elif spec.kind == "blockshift":
        problem = block_shift(spec.params[0], spec.params[1], **kw)
    elif spec.kind == "laplacian":
        problem = laplacian_2d(spec.params[0], **kw)
    elif spec.kind == "file":
        problem = from_file(spec.params[0], **kw)
    elif spec.kind == "random-spd":
        n, lo, hi, seed = spec.params
        problem, _ = random_spd(n, (lo, hi), seed)
    elif spec.kind == "random-diag":
        n, lo, hi, cond, seed = spec.params
        problem, _ = random_diagonalizable(n, (lo, hi), cond, seed)
    else:
        raise ValueError(f"unknown problem kind {spec.kind!r}")

    mat = problem.op._materialized
    if isinstance(mat, np.ndarray):
        if np.linalg.cond(mat) > 1e14:
            raise ValueError(f"problem {problem.name} is numerically singular")
    return problem


def save_matrix_text(path, a):
    """Write a dense matrix as whitespace-separated rows."""
    np.savetxt(path, np.asarray(a, dtype=float), fmt="%.17e")


def load_matrix_text(path):
    return np.loadtxt(path, dtype=float, ndmin=2)


def save_matrix_market(path, a):
    """Write coordinate-format Matrix Market (real general)."""
    if not scipy.sparse.issparse(a):
        a = scipy.sparse.coo_matrix(np.asarray(a, dtype=float))
    scipy.io.mmwrite(str(path), a, symmetry="general")


def load_matrix_market(path):
    a = scipy.io.mmread(str(path))
    if scipy.sparse.issparse(a):
        return a.tocsr()
    return np.asarray(a, dtype=float)
