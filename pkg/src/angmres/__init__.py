"""Alternating NGMRES acceleration of Richardson iteration for linear
systems, with GMRES oracles, benchmark problems, and convergence-bound
calculators."""

from .config import ConfigError, RunConfig
from .linops import (
    DEFAULT_RANK_TOL,
    LinearOperator,
    LsqSolution,
    solve_lsq_min_norm,
    two_norm,
)
from .iterate import (
    ConvergenceHistory,
    FixedPointMap,
    IterationRecord,
    StepKind,
    Termination,
    problem_fingerprint,
    run_fixed_point,
)
from .ngmres import (
    IterationWindow,
    NgmresStepReport,
    RankDeficientWindowError,
    ngmres_step,
    ngmres_step_gamma,
    run_ngmres,
    verify_multisecant,
)
from .alternating import (
    AlternatingSchedule,
    FingerprintMismatchError,
    check_periodic_equivalence,
    detect_stagnation,
    periodicity_defect,
    run_angmres,
)
from .gmres import (
    ArnoldiState,
    KrylovIndices,
    KrylovRankLossError,
    krylov_degrade,
    krylov_span_check,
    run_gmres_full,
    run_gmres_restarted,
)
from .bounds import (
    BoundHypothesisError,
    BoundReport,
    ComplexSpectrumError,
    NotDiagonalizableError,
    SpectralData,
    chebyshev_eval,
    chi_bound,
    epsilon_bound,
    evaluate_angmres_bound,
    evaluate_one_step_bound,
    interval_minmax,
    spectral_data_from_dense,
)
from .problems import (
    LinearProblem,
    ProblemSpec,
    block_shift,
    build,
    circulant_shift,
    from_file,
    laplacian_2d,
    random_diagonalizable,
    random_spd,
)

__version__ = "0.1.0"
