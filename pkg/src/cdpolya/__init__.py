"""Simulation and analytic cross-validation of the constant-differential urn process.

An urn of white and blue balls evolves in continuous time under the
replacement rule [[-a, -a], [a, a]]: drawing white removes a balls of each
color, drawing blue adds a of each, so blue - white stays fixed at delta.
This package simulates the process exactly, evaluates its closed-form
analytics (MGF, moments, gamma limit law, martingale transform, deviation
bound), and ships a seeded statistical harness that confronts the two.
"""

__version__ = "0.1.0"

from .analytics import (
    CharacteristicCurve,
    GammaLaw,
    MartingaleTransform,
    OutOfDomain,
    StepCountTooSmall,
    characteristic_curve,
    characteristic_intercept,
    gamma_cdf,
    gamma_mgf,
    gamma_ppf,
    integrate_characteristic_ode,
    l1_bound,
    limit_law,
    martingale_transform,
    mean_vector,
    mean_w,
    mgf_domain_bound,
    mgf_grid,
    mgf_w,
    pde_residual,
    pde_residual_bivariate,
    second_moment_w,
    var_w,
)
from .model import (
    BLUE,
    WHITE,
    IndivisibleInitialWhite,
    ModelParams,
    NonPositiveAddition,
    NonPositiveDifferential,
    ReplacementMatrix,
    UntenableDraw,
    UrnState,
    apply_draw,
    initial_state,
    total_balls,
    validate,
)
from .simulate import (
    EmptyUrn,
    EpochEvent,
    OutOfHorizon,
    OverflowAbort,
    RandomSource,
    Trajectory,
    next_epoch,
    sample_states,
    simulate_discrete,
    simulate_snapshots,
    simulate_until,
    state_at,
)
from .verify import (
    CheckResult,
    ConfigError,
    ExperimentReport,
    SampleSet,
    TooFewTrials,
    VerifyConfig,
    collect_samples,
    ks_check,
    ks_statistic,
    l1_check,
    martingale_check,
    mgf_check,
    moment_check,
    run_suite,
    total_check,
)

__all__ = [name for name in dir() if not name.startswith("_")]
