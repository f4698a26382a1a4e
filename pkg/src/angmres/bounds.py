"""Convergence-bound calculators: Chebyshev interval bounds and the
discrete normalized min-max quantity, plus evaluators that compare a
bound against an observed residual quantity.

Conventions: for iteration matrix M = I - A with real spectrum inside
[a, b], the interval bound of degree s is

    epsilon(a, b, s) = 1 / |C_s(1 + 2 (1 - beta) / (beta - alpha))|,
    alpha = 1/b, beta = 1/a,

valid when a < b, the interval excludes 0 (same-sign endpoints) and
excludes 1.  The discrete quantity chi(spectrum, s) minimizes the max of
|q| over the spectrum across polynomials of degree <= s with q(1) = 1.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize

EXP_GUARD = 700.0  # log-domain guard: cosh overflows just past this


class BoundHypothesisError(ValueError):
    """A bound was requested outside its hypotheses."""


class ComplexSpectrumError(ValueError):
    """Dense matrix has eigenvalues with non-negligible imaginary parts."""


class NotDiagonalizableError(ValueError):
    """Dense matrix is numerically defective."""


def chebyshev_eval(s, x):
    """Chebyshev polynomial C_s(x) of the first kind.

    Uses cos(s arccos x) on [-1, 1] and the overflow-safe hyperbolic form
    outside, returning +-inf past the exponent guard instead of raising.
    """
    if s < 0:
        raise ValueError("degree must be nonnegative")
    x = float(x)
    if abs(x) <= 1.0:
        return float(math.cos(s * math.acos(x)))
    ax = abs(x)
    sign = 1.0 if x > 0 else (1.0 if s % 2 == 0 else -1.0)
    t = s * math.log(ax + math.sqrt(ax * ax - 1.0))
    if t > EXP_GUARD:
        return sign * math.inf
    return sign * math.cosh(t)


def interval_minmax(lo, hi, s, gamma=1.0):
    """min over degree-s polynomials p with p(gamma)=1 of max_{[lo,hi]} |p|.

    Requires lo < hi and gamma outside [lo, hi].  Equals
    1/|C_s(1 + 2(gamma - hi)/(hi - lo))|.
    """
    if not lo < hi:
        raise BoundHypothesisError(f"need lo < hi, got [{lo}, {hi}]")
    if lo <= gamma <= hi:
        raise BoundHypothesisError(
            f"normalization point {gamma} lies inside [{lo}, {hi}]"
        )
    x = 1.0 + 2.0 * (gamma - hi) / (hi - lo)
    c = chebyshev_eval(s, x)
    if math.isinf(c):
        return 0.0
    return 1.0 / abs(c)


def epsilon_bound(a, b, s):
    """Interval convergence factor for spectrum interval [a, b], degree s.

    Hypotheses: a < b, both endpoints the same sign (interval excludes 0),
    and 1 outside [a, b].  Value is in (0, 1) for s >= 1 and equals 1 at
    s = 0.
    """
    if not a < b:
        raise BoundHypothesisError(f"need a < b, got [{a}, {b}]")
    if a * b <= 0:
        raise BoundHypothesisError(f"interval [{a}, {b}] must exclude 0")
    if a <= 1.0 <= b:
        raise BoundHypothesisError(f"interval [{a}, {b}] must exclude 1")
    return interval_minmax(1.0 / b, 1.0 / a, s, gamma=1.0)


def chi_bound(spectrum, degree):
    """Discrete min-max chi: smallest worst-case |q| over the spectrum
    among polynomials of degree <= `degree` normalized by q(1) = 1.

    Exactly 0 when the degree reaches the number of distinct spectrum
    points (an interpolating polynomial exists); 1 at degree 0.  Solved as
    a small linear program in the coefficients of q(t) expanded around
    t = 1.
    """
    ts = np.asarray(spectrum, dtype=float)
    if ts.ndim != 1 or ts.size == 0:
        raise ValueError("spectrum must be a nonempty 1-D array")
    if not np.isfinite(ts).all():
        raise ValueError("spectrum must be finite")
    if np.any(ts == 1.0):
        raise BoundHypothesisError("chi is undefined when 1 is in the spectrum")
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    if degree == 0:
        return 1.0
    distinct = np.unique(ts)
    if degree >= distinct.size:
        return 0.0

    # q(t) = 1 + sum_j c_j (t-1)^j, j = 1..degree; minimize tau subject to
    # |q(t_i)| <= tau.
    shifted = distinct - 1.0
    powers = np.vander(shifted, degree + 1, increasing=True)[:, 1:]
    npts = distinct.size
    ones = np.ones(npts)
    a_ub = np.block(
        [
            [powers, -ones[:, None]],
            [-powers, -ones[:, None]],
        ]
    )
    b_ub = np.concatenate([-ones, ones])
    cost = np.zeros(degree + 1)
    cost[-1] = 1.0
    res = scipy.optimize.linprog(
        cost,
        A_ub=a_ub,
        b_ub=b_ub,
        bounds=[(None, None)] * (degree + 1),
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"chi linear program failed: {res.message}")
    return max(float(res.fun), 0.0)


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalue data of the iteration matrix M = I - A.

    eig_condition is the 2-norm condition number of the eigenvector
    matrix (1 for symmetric M).  is_spd flags M symmetric positive
    definite.  operator_norm is ||M||_2, which differs from the spectral
    radius for non-normal M and is required by the alternating bounds.
    """

    eigenvalues: np.ndarray
    eig_condition: float
    interval: tuple
    is_spd: bool
    operator_norm: float | None = None

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        object.__setattr__(self, "eigenvalues", lam)
        a, b = self.interval
        if lam.size == 0 or not np.isfinite(lam).all():
            raise ValueError("eigenvalues must be a nonempty finite array")
        if not (a <= lam.min() and lam.max() <= b):
            raise ValueError("interval must enclose the eigenvalues")
        if self.eig_condition < 1.0:
            raise ValueError("eigensystem condition number must be >= 1")
        if self.is_spd and self.eig_condition != 1.0:
            raise ValueError("SPD data must have eig_condition exactly 1")

    @property
    def a(self):
        return self.interval[0]

    @property
    def b(self):
        return self.interval[1]

    @property
    def interval_excludes_0_and_1(self):
        return not (self.a <= 0.0 <= self.b) and not (self.a <= 1.0 <= self.b)


@dataclass(frozen=True)
class BoundReport:
    """A bound value against an observed quantity with absolute slack.

    kappa_form_value carries the explicit condition-number form of the
    alternating SPD bound when applicable.
    """

    bound_value: float
    observed_value: float
    slack: float = 0.0
    kappa_form_value: float | None = None

    @property
    def satisfied(self):
        return self.observed_value <= self.bound_value + self.slack

    @property
    def margin(self):
        return self.bound_value + self.slack - self.observed_value


def evaluate_one_step_bound(data, m, k, observed, baseline, slack=0.0):
    """Bound for the residual after one accelerated step at index k with
    window capacity m.

    For m < k the interval bound applies and `baseline` must be the norm
    of M r_k (diagonalizable data, interval excluding 0 and 1):

        ||r_{k+1}|| <= epsilon(a, b, m+1) * kappa_2(U) * ||M r_k||.

    For m = k (full window from the start) the discrete min-max applies
    and `baseline` must be ||r_0||:

        ||r_{m+1}|| <= chi(m+1) * kappa_2(U) * ||r_0||.
    """
    if m < 0 or k < 0:
        raise ValueError("m and k must be nonnegative")
    if m > k:
        raise BoundHypothesisError("window capacity m cannot exceed the index k")
    if m == k:
        factor = chi_bound(data.eigenvalues, m + 1)
    else:
        if not data.interval_excludes_0_and_1:
            raise BoundHypothesisError(
                "interval bound needs a spectrum interval excluding 0 and 1"
            )
        factor = epsilon_bound(data.a, data.b, m + 1)
    bound = factor * data.eig_condition * baseline
    return BoundReport(bound, observed, slack)


def evaluate_angmres_bound(data, m, p, j, observed, r0_norm, slack=0.0):
    """Bound on ||r_{jp}|| for the alternating scheme with finite depth m.

    Two regimes: m < p - 1 uses the interval bound with p fixed-point
    multiplications per period,

        ||r_{jp}|| <= (epsilon(a,b,m+1) ||M||^p kappa_2(U))^j ||r_0||,

    and p = m + 1 uses the discrete min-max per period,

        ||r_{jp}|| <= (chi(m+1) kappa_2(U))^j ||r_0||.

    When A = I - M is SPD the second regime also reports the explicit
    condition-number form (2 ((sqrt(kappa)-1)/(sqrt(kappa)+1))^{m+1})^j
    ||r_0|| in kappa_form_value; the returned bound_value is the tighter
    chi form.
    """
    if m is None or m < 0:
        raise ValueError("depth m must be a nonnegative integer")
    if p < 1 or j < 0:
        raise ValueError("need period p >= 1 and j >= 0")
    kappa_form = None
    if m < p - 1:
        if not data.interval_excludes_0_and_1:
            raise BoundHypothesisError(
                "interval bound needs a spectrum interval excluding 0 and 1"
            )
        if data.operator_norm is None:
            raise BoundHypothesisError(
                "the m < p-1 bound needs the operator norm of M"
            )
        factor = (
            epsilon_bound(data.a, data.b, m + 1)
            * data.operator_norm**p
            * data.eig_condition
        )
    elif p == m + 1:
        factor = chi_bound(data.eigenvalues, m + 1) * data.eig_condition
        if data.eig_condition == 1.0 and data.b < 1.0:
            # A = I - M is SPD; its condition number is (1-a)/(1-b).
            kappa = (1.0 - data.a) / (1.0 - data.b)
            root = math.sqrt(kappa)
            kfactor = 2.0 * ((root - 1.0) / (root + 1.0)) ** (m + 1)
            kappa_form = kfactor**j * r0_norm
    else:
        raise BoundHypothesisError(
            f"no alternating bound for depth m={m} with period p={p}"
        )
    return BoundReport(factor**j * r0_norm, observed, slack, kappa_form)


def spectral_data_from_dense(mat, imag_tol=1e-10, defect_tol=1e12):
    """SpectralData for a small dense iteration matrix.

    Symmetric input goes through the symmetric eigensolver and reports
    eig_condition exactly 1.  Otherwise the eigenvalues must be real up to
    imag_tol relative to the spectral radius (ComplexSpectrumError) and
    the eigenvector matrix must be numerically invertible
    (NotDiagonalizableError).
    """
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {mat.shape}")
    norm_m = float(np.linalg.norm(mat, 2)) if mat.size else 0.0
    scale = float(np.max(np.abs(mat))) if mat.size else 0.0
    if scale == 0.0:
        lam = np.zeros(mat.shape[0])
        return SpectralData(lam, 1.0, (0.0, 0.0), False, 0.0)

    if np.max(np.abs(mat - mat.T)) <= 1e-12 * scale:
        lam = np.linalg.eigvalsh(mat)
        return SpectralData(
            lam,
            1.0,
            (float(lam.min()), float(lam.max())),
            bool(lam.min() > 0.0),
            float(np.max(np.abs(lam))),
        )

    w, v = np.linalg.eig(mat)
    if np.iscomplexobj(w):
        radius = float(np.max(np.abs(w)))
        if np.max(np.abs(w.imag)) > imag_tol * max(radius, 1e-300):
            raise ComplexSpectrumError(
                "matrix has eigenvalues with significant imaginary parts"
            )
        w = w.real
        v = v.real
    cond = float(np.linalg.cond(v))
    if not np.isfinite(cond) or cond > defect_tol:
        raise NotDiagonalizableError(
            "eigenvector matrix is numerically singular; matrix looks defective"
        )
    lam = np.asarray(w, dtype=float)
    return SpectralData(
        lam, cond, (float(lam.min()), float(lam.max())), False, norm_m
    )
