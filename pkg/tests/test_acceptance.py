"""End-to-end acceptance gate.

Each criterion is one test that prints a single ACCEPTANCE verdict line
(kept visible under output capture) and then asserts it, so a plain
`pytest -v` run reads as a checklist.  Criteria 1-5 recompute the
benchmark scenarios directly from the library; 6-11 run the randomized
invariant suites at their full trial counts.
"""

import time

import numpy as np

from angmres import (
    AlternatingSchedule,
    RunConfig,
    Termination,
    check_periodic_equivalence,
    chi_bound,
    detect_stagnation,
    periodicity_defect,
    run_angmres,
    run_gmres_full,
    run_gmres_restarted,
)
from angmres.problems import block_shift, circulant_shift, laplacian_2d
from angmres.suites import (
    bounds_suite,
    contraction_suite,
    monotonicity_suite,
    multisecant_suite,
    ngmres0_gmres1_suite,
    span_suite,
)

from helpers import minimax_grid_oracle


def _verdict(capsys, cid, passed, detail):
    with capsys.disabled():
        print(f"\nACCEPTANCE {cid:>2} {'PASS' if passed else 'FAIL'} {detail}")
    assert passed, detail


def _suite_verdict(capsys, cid, results, expected, label):
    npass = sum(r.passed for r in results)
    ok = len(results) == expected and npass == expected
    _verdict(capsys, cid, ok, f"{label}: {npass}/{len(results)} trials pass")


def test_acceptance_01_finite_depth_matches_restarted_gmres(capsys):
    t0 = time.perf_counter()
    prob = circulant_shift(36)
    fpmap = prob.fixed_point_map()
    cfg = RunConfig(max_iter=60)
    ha = run_angmres(fpmap, prob.u0, AlternatingSchedule(4, 3), cfg)
    hg = run_gmres_restarted(fpmap, prob.u0, 4, cfg)
    rep = check_periodic_equivalence(ha, hg, 4, tol=1e-8)
    dt = time.perf_counter() - t0
    _verdict(
        capsys, 1, rep.ok and dt < 1.0,
        "circulant-36 depth 3 period 4 vs GMRES(4) at multiples of 4: "
        f"max rel discrepancy {rep.max_residual_discrepancy:.2e} (tol 1e-08), {dt:.2f}s",
    )


def test_acceptance_02_unbounded_depth_periods_four_and_five(capsys):
    t0 = time.perf_counter()
    prob = circulant_shift(36)
    fpmap = prob.fixed_point_map()
    cfg = RunConfig(max_iter=60)
    ha4 = run_angmres(fpmap, prob.u0, AlternatingSchedule(4, None), cfg)
    hg, _ = run_gmres_full(fpmap, prob.u0, cfg)
    rep = check_periodic_equivalence(ha4, hg, 4, tol=1e-8)
    first4 = ha4.first_index_below(1e-10 * ha4.residual_norms()[0])
    ha5 = run_angmres(fpmap, prob.u0, AlternatingSchedule(5, None), cfg)
    rn5 = ha5.residual_norms()
    thresh5 = 1e-10 * rn5[0]
    first5 = ha5.first_index_below(thresh5)
    none_before_36 = bool((rn5[1:36] > thresh5).all())
    dt = time.perf_counter() - t0
    ok = rep.ok and first4 == 36 and first5 == 40 and none_before_36 and dt < 1.0
    _verdict(
        capsys, 2, ok,
        f"circulant-36 unbounded depth: period 4 matches full GMRES "
        f"(max {rep.max_residual_discrepancy:.2e}) and converges at {first4}; "
        f"period 5 converges at {first5} with none before 36, {dt:.2f}s",
    )


def test_acceptance_03_block_shift_depth2_period3_and_plateaus(capsys):
    t0 = time.perf_counter()
    prob = block_shift(3, 5)
    fpmap = prob.fixed_point_map()
    cfg = RunConfig(max_iter=80)
    ha = run_angmres(fpmap, prob.u0, AlternatingSchedule(3, 2), cfg)
    hg = run_gmres_restarted(fpmap, prob.u0, 3, cfg)
    rep = check_periodic_equivalence(ha, hg, 3, tol=1e-8)
    plateaus = [r for r in detect_stagnation(hg, tol=1e-12) if r[1] - r[0] + 1 >= 3]
    dt = time.perf_counter() - t0
    ok = rep.ok and len(plateaus) >= 2 and dt < 1.0
    _verdict(
        capsys, 3, ok,
        "blockshift-3x5 depth 2 period 3 vs GMRES(3): max rel discrepancy "
        f"{rep.max_residual_discrepancy:.2e} (tol 1e-08), "
        f"{len(plateaus)} stagnation runs of length >= 3, {dt:.2f}s",
    )


def test_acceptance_04_block_shift_period_sweep(capsys):
    t0 = time.perf_counter()
    prob = block_shift(3, 5)
    fpmap = prob.fixed_point_map()
    cfg = RunConfig(max_iter=80)
    hists = {
        p: run_angmres(fpmap, prob.u0, AlternatingSchedule(p, None), cfg)
        for p in (1, 2, 3, 4)
    }
    rn1 = hists[1].residual_norms()
    drift = float(np.abs(rn1 - rn1[0]).max() / rn1[0])
    p1_ok = (
        hists[1].termination is not Termination.CONVERGED
        and hists[1].last_index >= 60
        and drift <= 1e-10
    )
    rn2 = hists[2].residual_norms()
    defect = periodicity_defect(hists[2], 2, start=2)
    p2_ok = (
        hists[2].termination is not Termination.CONVERGED
        and defect <= 1e-8 * rn2[0]
    )
    first3 = hists[3].first_index_below(1e-10 * hists[3].residual_norms()[0])
    first4 = hists[4].first_index_below(1e-10 * hists[4].residual_norms()[0])
    dt = time.perf_counter() - t0
    ok = p1_ok and p2_ok and first3 == 30 and first4 == 40 and dt < 2.0
    _verdict(
        capsys, 4, ok,
        f"blockshift-3x5 unbounded depth: p=1 drift {drift:.2e} over "
        f"{hists[1].last_index} iters, p=2 period-2 defect {defect:.2e} without "
        f"convergence, p=3 converges at {first3}, p=4 at {first4}, {dt:.2f}s",
    )


def test_acceptance_05_laplacian_coincides_with_full_gmres(capsys):
    t0 = time.perf_counter()
    prob = laplacian_2d(64)
    fpmap = prob.fixed_point_map()
    cfg = RunConfig(max_iter=200)
    ha = run_angmres(fpmap, prob.u0, AlternatingSchedule(3, None), cfg)
    hg, _ = run_gmres_full(fpmap, prob.u0, cfg)
    rep = check_periodic_equivalence(ha, hg, 3, tol=1e-6)
    disc = rep.iterate_discrepancy
    dt = time.perf_counter() - t0
    ok = disc.size > 0 and bool((disc <= 1e-6).all()) and dt < 60.0
    _verdict(
        capsys, 5, ok,
        "laplacian 4096 unknowns, unbounded depth period 3 vs full GMRES: "
        f"iterate rel discrepancy max {float(disc.max()):.2e} at multiples of 3 "
        f"(tol 1e-06), {dt:.1f}s",
    )


def test_acceptance_06_monotonicity_suite(capsys):
    results = monotonicity_suite(trials=100)
    _suite_verdict(
        capsys, 6, results, 100,
        "accelerated residual histories monotone within factor 1+1e-12",
    )


def test_acceptance_07_depth_zero_equals_gmres_one(capsys):
    results = ngmres0_gmres1_suite(trials=50)
    _suite_verdict(
        capsys, 7, results, 50,
        "depth-0 acceleration equals GMRES(1) over first 10 iterations (rel 1e-08)",
    )


def test_acceptance_08_iterate_span_is_krylov(capsys):
    results = span_suite(trials=50)
    _suite_verdict(
        capsys, 8, results, 50,
        "accelerated iterate spans match Krylov spaces (principal angle <= 1e-08)",
    )


def test_acceptance_09_multisecant_form(capsys):
    results = multisecant_suite(trials=50)
    _suite_verdict(
        capsys, 9, results, 50,
        "steps satisfy the multisecant normal equations (discrepancy <= 1e-08)",
    )


def test_acceptance_10_residual_bounds_and_minmax_oracle(capsys):
    results = bounds_suite(trials=50)
    npass = sum(r.passed for r in results)
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(12):
        size = int(rng.integers(1, 5))
        idx = rng.choice(35, size=size, replace=True)
        spectrum = np.round((idx - 17.0) * 0.05, 10)
        degree = int(rng.integers(0, 3))
        diff = abs(chi_bound(spectrum, degree) - minimax_grid_oracle(spectrum, degree))
        worst = max(worst, diff)
    ok = len(results) == 50 and npass == 50 and worst <= 1e-6
    _verdict(
        capsys, 10, ok,
        f"one-step and alternating bounds hold (slack 1e-09): {npass}/50 trials; "
        f"discrete min-max vs grid-search oracle worst |diff| {worst:.2e} (tol 1e-06)",
    )


def test_acceptance_11_contraction_suite(capsys):
    results = contraction_suite(trials=30)
    _suite_verdict(
        capsys, 11, results, 30,
        "every alternating step contracts by ||M|| on SPD instances (1+1e-12)",
    )
