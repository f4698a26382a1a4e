"""Randomized invariant suites shared by the CLI checker and the test bed.

Each suite runs seeded trials and returns one TrialResult per trial, so
the same machinery backs `angmres check ...` and the acceptance tests.
Instance families mix SPD and non-normal iteration matrices with spectra
on either side of (and away from) 0 and 1.
"""

from dataclasses import dataclass

import numpy as np

from .alternating import AlternatingSchedule, check_periodic_equivalence, run_angmres
from .bounds import epsilon_bound, evaluate_angmres_bound, evaluate_one_step_bound
from .config import RunConfig
from .gmres import krylov_degrade, krylov_span_check, run_gmres_full, run_gmres_restarted
from .linops import two_norm
from .ngmres import IterationWindow, ngmres_step, run_ngmres, verify_multisecant
from .problems import block_shift, random_diagonalizable, random_spd


@dataclass(frozen=True)
class TrialResult:
    suite: str
    index: int
    passed: bool
    detail: str

    @property
    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"TRIAL {self.index:03d} {status} {self.detail}"


MIXED_RANGES = [(0.2, 0.8), (-0.85, -0.15), (1.1, 1.6), (0.05, 0.95), (-0.6, -0.05)]
MIXED_CONDS = [1.0, 5.0, 20.0]

# Salts keep the per-suite instance streams disjoint.
_SALTS = {
    "monotonicity": 11,
    "equivalence": 12,
    "span": 13,
    "multisecant": 14,
    "bounds": 15,
    "contraction": 16,
    "ngmres0": 17,
}


def _mixed_instance(suite, seed, t, n_lo=5, n_hi=30):
    """Deterministic mixed SPD / non-normal instance for trial t."""
    rng = np.random.default_rng([_SALTS[suite], seed, t])
    n = int(rng.integers(n_lo, n_hi + 1))
    lo, hi = MIXED_RANGES[t % len(MIXED_RANGES)]
    cond = MIXED_CONDS[(t // len(MIXED_RANGES)) % len(MIXED_CONDS)]
    inst_seed = int(rng.integers(0, 2**31))
    if cond == 1.0 and lo > 0:
        return random_spd(n, (lo, hi), seed=inst_seed)
    return random_diagonalizable(n, (lo, hi), cond, seed=inst_seed)


def _max_growth(resnorms, tol):
    """Largest relative one-step growth; None entries mean a hard failure."""
    worst = 0.0
    ok = True
    for k in range(1, len(resnorms)):
        prev, cur = resnorms[k - 1], resnorms[k]
        if prev == 0.0:
            if cur > 0.0:
                ok = False
                worst = np.inf
            continue
        growth = cur / prev - 1.0
        worst = max(worst, growth)
        if cur > prev * (1.0 + tol):
            ok = False
    return ok, worst


def monotonicity_suite(seed=0, trials=100, iters=25, tol=1e-12):
    """Residual norms of NGMRES(m) never grow, for m in {0, 1, 3, inf}."""
    results = []
    for t in range(trials):
        problem, _ = _mixed_instance("monotonicity", seed, t)
        fpmap = problem.fixed_point_map()
        cfg = RunConfig(max_iter=iters)
        ok = True
        worst = 0.0
        for m in (0, 1, 3, None):
            hist = run_ngmres(fpmap, problem.u0, m, cfg)
            m_ok, m_worst = _max_growth(hist.residual_norms(), tol)
            ok = ok and m_ok
            worst = max(worst, m_worst)
        results.append(
            TrialResult("monotonicity", t, ok, f"max relative growth {worst:.2e}")
        )
    return results


def ngmres0_gmres1_suite(seed=0, trials=50, iters=10, tol=1e-8):
    """NGMRES(0) reproduces GMRES(1) residual histories index by index.

    The comparison floor is tol times the initial residual norm: below
    that level a tol-relative claim on ||Au - b|| exceeds what float64
    evaluation noise can support (the iterates themselves agree to
    machine precision).
    """
    results = []
    for t in range(trials):
        problem, _ = _mixed_instance("ngmres0", seed, t)
        fpmap = problem.fixed_point_map()
        cfg = RunConfig(max_iter=iters)
        h_n = run_ngmres(fpmap, problem.u0, 0, cfg)
        h_g = run_gmres_restarted(fpmap, problem.u0, 1, cfg)
        floor = tol * two_norm(fpmap.residual(problem.u0))
        rep = check_periodic_equivalence(h_n, h_g, 1, tol, floor=floor)
        results.append(
            TrialResult(
                "ngmres0-gmres1",
                t,
                rep.ok,
                f"max rel discrepancy {rep.max_residual_discrepancy:.2e}",
            )
        )
    return results


def equivalence_suite(seed=0, trials=10, tol=1e-8):
    """Periodic equivalences: finite depth vs restarted GMRES and
    unbounded depth vs full GMRES, plus the block-shift reference case."""
    results = []
    for t in range(trials):
        if t == 0:
            problem = block_shift(3, 5)
            fpmap = problem.fixed_point_map()
            cfg = RunConfig(max_iter=80)
            ha = run_angmres(fpmap, problem.u0, AlternatingSchedule(3, 2), cfg)
            hg = run_gmres_restarted(fpmap, problem.u0, 3, cfg)
            rep = check_periodic_equivalence(ha, hg, 3, tol)
            results.append(
                TrialResult(
                    "equivalence",
                    t,
                    rep.ok,
                    "blockshift m=2 p=3 max rel "
                    f"{rep.max_residual_discrepancy:.2e}",
                )
            )
            continue
        problem, _ = _mixed_instance("equivalence", seed, t, n_lo=10, n_hi=30)
        fpmap = problem.fixed_point_map()
        flavor = t % 3
        if flavor == 1:
            # Unbounded depth against full GMRES at multiples of p.
            p = 2 + (t // 3) % 2
            cfg = RunConfig(max_iter=6 * p)
            ha = run_angmres(fpmap, problem.u0, AlternatingSchedule(p, None), cfg)
            hg, _ = run_gmres_full(fpmap, problem.u0, cfg)
            label = f"m=inf p={p}"
        else:
            m = 1 + t % 3
            p = m + 1
            cfg = RunConfig(max_iter=6 * p)
            ha = run_angmres(fpmap, problem.u0, AlternatingSchedule(p, m), cfg)
            hg = run_gmres_restarted(fpmap, problem.u0, p, cfg)
            label = f"m={m} p={p}"
        rep = check_periodic_equivalence(ha, hg, p, tol)
        disc = rep.iterate_discrepancy
        ok = disc is not None and disc.size > 0 and bool((disc <= tol).all())
        worst = float(disc.max()) if disc is not None and disc.size else float("nan")
        results.append(
            TrialResult(
                "equivalence",
                t,
                ok,
                f"{label} max iterate rel {worst:.2e}",
            )
        )
    return results


def _resolvable_span_dim(fpmap, u0, j_cap, content_tol=1e-4):
    """Largest difference-span dimension the angle check can resolve.

    Angle errors scale like eps over the smallest new-direction content
    of the difference sequence, so prefixes are grown only while each
    difference keeps at least content_tol of its norm orthogonal to the
    span so far.  With 1e-4 the measured angle stays below ~1e-10.
    """
    basis = []
    u = u0.copy()
    j = 0
    for _ in range(j_cap):
        u_next = u - fpmap.residual(u)
        d = u_next - u
        u = u_next
        dn = np.linalg.norm(d)
        if dn == 0.0:
            break
        w = d / dn
        for _ in range(2):
            for q in basis:
                w = w - (q @ w) * q
        wn = np.linalg.norm(w)
        if wn < content_tol:
            break
        basis.append(w / wn)
        j += 1
    return max(j, 1)


def span_suite(seed=0, trials=50, j_cap=10, tol=1e-8):
    """Richardson iterate differences span the Krylov space.

    The checked dimension is at most min(j_cap, degrade) and is further
    capped where float64 can no longer resolve the angle.
    """
    results = []
    for t in range(trials):
        problem, _ = _mixed_instance("span", seed, t, n_lo=12, n_hi=30)
        fpmap = problem.fixed_point_map()
        nu = krylov_degrade(fpmap.op, fpmap.residual(problem.u0))
        j = min(j_cap, nu, _resolvable_span_dim(fpmap, problem.u0, j_cap))
        angle = krylov_span_check(fpmap, problem.u0, j)
        results.append(
            TrialResult(
                "span", t, angle <= tol, f"j={j} max principal angle {angle:.2e}"
            )
        )
    return results


def multisecant_suite(seed=0, trials=50, tol=1e-8):
    """Accelerated steps agree with the explicit multisecant residual form."""
    results = []
    for t in range(trials):
        problem, _ = _mixed_instance("multisecant", seed, t, n_lo=6, n_hi=12)
        fpmap = problem.fixed_point_map()
        depth = t % 4
        window = IterationWindow(depth)
        u = problem.u0.copy()
        r = fpmap.residual(u)
        window.append(u, r)
        for _ in range(depth):
            u = u - r
            r = fpmap.residual(u)
            window.append(u, r)
        report = ngmres_step(fpmap, window)
        disc = verify_multisecant(fpmap, window, report)
        results.append(
            TrialResult(
                "multisecant", t, disc <= tol, f"depth={depth} discrepancy {disc:.2e}"
            )
        )
    return results


def _one_step_probe(fpmap, u0, m, k):
    """k fixed-point steps from u0, then one depth-m accelerated step.

    This is the scenario the one-step bounds quantify: every window
    entry is a plain fixed-point iterate.  Returns the iterates
    u_0..u_k, the accelerated iterate u_{k+1}, and the residual of u_k.
    """
    window = IterationWindow(m)
    u = u0.copy()
    r = fpmap.residual(u)
    us = [u.copy()]
    window.append(u, r)
    for _ in range(k):
        u = u - r
        r = fpmap.residual(u)
        us.append(u.copy())
        window.append(u, r)
    report = ngmres_step(fpmap, window)
    return us, report.new_iterate, r


def _spd_weighted_check(problem, data, m, k, slack):
    """Eigenbasis-weighted one-step error bound for SPD iteration matrices.

    With M = U diag(lam) U^T and weights (1 - lam), one accelerated step
    after k fixed-point steps satisfies

        ||(1-lam) U^T e_{k+1}|| <= epsilon(a, b, m+1) ||(1-lam) U^T M e_k||.
    """
    fpmap = problem.fixed_point_map()
    us, u_next, _ = _one_step_probe(fpmap, problem.u0, m, k)
    m_dense = np.eye(fpmap.n) - fpmap.op.to_dense()
    lam, u_mat = np.linalg.eigh(m_dense)
    weights = 1.0 - lam
    e_k = us[-1] - problem.u_exact
    e_k1 = u_next - problem.u_exact
    lhs = two_norm(weights * (u_mat.T @ e_k1))
    rhs = two_norm(weights * (u_mat.T @ (m_dense @ e_k)))
    bound = epsilon_bound(data.a, data.b, m + 1) * rhs
    return lhs <= bound + slack, bound + slack - lhs


def bounds_suite(seed=0, trials=50, slack=1e-9):
    """One-step and alternating residual bounds on seeded instances.

    Per trial: a diagonalizable and an SPD instance with spectrum inside
    (0.2, 0.8) and eigenvector condition number cycling {1, 5, 20}; checks
    the interval bound (m < k), the discrete min-max bound (m = k), the
    SPD weighted-error variant, and both alternating regimes including
    the explicit condition-number form for SPD A.
    """
    results = []
    for t in range(trials):
        rng = np.random.default_rng([_SALTS["bounds"], seed, t])
        cond = MIXED_CONDS[t % len(MIXED_CONDS)]
        n = int(rng.integers(12, 25))
        seed_d = int(rng.integers(0, 2**31))
        seed_s = int(rng.integers(0, 2**31))
        prob_d, data_d = random_diagonalizable(n, (0.2, 0.8), cond, seed=seed_d)
        prob_s, data_s = random_spd(n, (0.2, 0.8), seed=seed_s)
        m = 1 + t % 3
        k = m + 2
        failures = []
        margins = []

        for label, prob, data in (("diag", prob_d, data_d), ("spd", prob_s, data_s)):
            fpmap = prob.fixed_point_map()
            r0n = two_norm(fpmap.residual(prob.u0))

            # Interval bound, m < k: k fixed-point steps then one
            # accelerated step; the baseline is ||M r_k||.
            _, u_next, r_k = _one_step_probe(fpmap, prob.u0, m, k)
            mr = r_k - fpmap.op.apply(r_k)
            observed = two_norm(fpmap.residual(u_next))
            rep = evaluate_one_step_bound(data, m, k, observed, two_norm(mr), slack)
            margins.append(rep.margin)
            if not rep.satisfied:
                failures.append(f"{label}-one-step-interval")

            # Discrete min-max bound, m = k, against the initial residual.
            _, u_next, _ = _one_step_probe(fpmap, prob.u0, m, m)
            observed = two_norm(fpmap.residual(u_next))
            rep = evaluate_one_step_bound(data, m, m, observed, r0n, slack)
            margins.append(rep.margin)
            if not rep.satisfied:
                failures.append(f"{label}-one-step-minmax")

        ok_w, margin_w = _spd_weighted_check(prob_s, data_s, m, k, slack)
        margins.append(margin_w)
        if not ok_w:
            failures.append("spd-weighted")

        # Alternating, shallow window (m_e < p_e - 1), on both instances:
        # between accelerated steps the window refills with fixed-point
        # iterates, so the per-period factor epsilon * ||M||^p applies.
        m_e = m - 1
        p_e = m_e + 2
        for label, prob, data in (("diag", prob_d, data_d), ("spd", prob_s, data_s)):
            fpmap = prob.fixed_point_map()
            hist = run_angmres(
                fpmap,
                prob.u0,
                AlternatingSchedule(p_e, m_e),
                RunConfig(max_iter=3 * p_e),
            )
            rn = hist.residual_norms()
            for j in range(1, 4):
                if hist.last_index < j * p_e:
                    break
                rep = evaluate_angmres_bound(
                    data, m_e, p_e, j, rn[j * p_e], rn[0], slack
                )
                margins.append(rep.margin)
                if not rep.satisfied:
                    failures.append(f"alt-interval-{label}-j{j}")

        # Alternating, p = m + 1, on both instances; SPD also carries the
        # explicit condition-number form.
        for label, prob, data in (("diag", prob_d, data_d), ("spd", prob_s, data_s)):
            fpmap = prob.fixed_point_map()
            hist = run_angmres(
                fpmap,
                prob.u0,
                AlternatingSchedule(m + 1, m),
                RunConfig(max_iter=3 * (m + 1)),
            )
            rn = hist.residual_norms()
            for j in range(1, 4):
                if hist.last_index < j * (m + 1):
                    break
                rep = evaluate_angmres_bound(
                    data, m, m + 1, j, rn[j * (m + 1)], rn[0], slack
                )
                margins.append(rep.margin)
                if not rep.satisfied:
                    failures.append(f"alt-minmax-{label}-j{j}")
                if label == "spd":
                    if rep.kappa_form_value is None:
                        failures.append(f"alt-kappa-missing-j{j}")
                    elif rep.bound_value > rep.kappa_form_value + slack:
                        failures.append(f"alt-kappa-order-j{j}")

        detail = (
            f"m={m} cond={cond:g} min margin {min(margins):.2e}"
            if not failures
            else "failed: " + ",".join(failures)
        )
        results.append(TrialResult("bounds", t, not failures, detail))
    return results


def contraction_suite(seed=0, trials=30, tol=1e-12):
    """With ||M|| = c < 1 every alternating step contracts by at least c."""
    results = []
    for t in range(trials):
        rng = np.random.default_rng([_SALTS["contraction"], seed, t])
        n = int(rng.integers(8, 26))
        inst_seed = int(rng.integers(0, 2**31))
        problem, data = random_spd(n, (0.15, 0.85), seed=inst_seed)
        c = data.operator_norm
        fpmap = problem.fixed_point_map()
        ok = True
        worst = -np.inf
        for m, p in ((1, 3), (2, 3), (None, 4)):
            hist = run_angmres(
                fpmap, problem.u0, AlternatingSchedule(p, m), RunConfig(max_iter=30)
            )
            rn = hist.residual_norms()
            for i in range(1, len(rn)):
                if rn[i - 1] == 0.0:
                    continue
                excess = rn[i] / (c * rn[i - 1]) - 1.0
                worst = max(worst, excess)
                if rn[i] > c * rn[i - 1] * (1.0 + tol):
                    ok = False
        results.append(
            TrialResult(
                "contraction", t, ok, f"c={c:.3f} max excess {worst:.2e}"
            )
        )
    return results


SUITES = {
    "monotonicity": monotonicity_suite,
    "equivalence": equivalence_suite,
    "bounds": bounds_suite,
    "span": span_suite,
    "multisecant": multisecant_suite,
}
