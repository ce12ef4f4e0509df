"""Pseudospectral solvers for the periodic stochastic nonlinear wave
equation with multiplicative scalar noise, plus a coupled-path Monte Carlo
harness for strong-convergence measurements."""

from ._kernels import backend_name
from .spectral import (
    ModeFrequency,
    SpectralGrid,
    SpectralState,
    diff_norm,
    mode_frequency,
    embed,
    forward,
    inverse,
    load_snapshot,
    make_grid,
    project_band,
    project_low,
    pseudospectral_apply,
    restrict,
    save_snapshot,
    sobolev_norm,
    state_from_fields,
    state_to_fields,
    with_band,
    zero_state,
)
from .semigroup import (
    ModePropagator,
    apply_group,
    apply_resolvent,
    propagator,
)
from .noise import (
    WienerLattice,
    coarsen,
    dump_path_csv,
    increment,
    sample_path,
)
from .problems import (
    InitialDataSpec,
    NonlinearitySpec,
    ProblemSpec,
    apply_nonlinearity,
    bounded_tabulated,
    build_indicator_1d,
    build_indicator_2d,
    build_initial,
    build_random_hgamma,
    constant_fn,
    preset_problem,
    scaled_cosine,
    scaled_sine,
    zero_fn,
)
from .integrators import (
    MethodSpec,
    NumericalError,
    RunResult,
    exact_linear_zero_mode,
    method_spec,
    projection_interpolation_gap,
    recover_high,
    run,
    step_hrlri_low,
    step_lri,
    step_sem,
    step_stm,
)
from .experiments import (
    ConfigError,
    ConvergenceReport,
    ExperimentConfig,
    LevelRow,
    NumericalFailure,
    compare_methods,
    emit_csv,
    estimate_order,
    parse_csv,
    run_convergence,
    run_single,
)

__version__ = "0.1.0"
