"""Besicovitch almost periodic functions and mild solutions of delay equations."""

from .almostperiod import (
    ContinuityModulus,
    NetReport,
    TranslationReport,
    bochner_compactness_test,
    find_translation_numbers,
    shift_distance,
    translation_distance,
    translation_estimate,
    uniform_continuity_modulus,
)
from .errors import (
    BesicovitchError,
    FnSpecSyntaxError,
    HypothesisViolationError,
    InvalidArgumentError,
    NonConvergenceError,
    OutOfRangeError,
    StabilityViolationError,
)
from .fnspec import FnSpec, eval_fnspec, evaluate, parse, to_text
from .grid import SampledPath, TimeGrid, eval_path_at, make_grid, path_values, sample_fnspec, sup_norm
from .heatdelay import (
    HeatDelayConfig,
    build_example,
    project_nonlinearity,
    verify_solution_almost_periodicity,
)
from .semigroup import (
    SemigroupSpec,
    StabilityCertificate,
    apply_semigroup,
    diagonal_semigroup,
    heat_semigroup,
    stability_certificate,
)
from .seminorm import (
    SeminormConfig,
    SeminormEstimate,
    besicovitch_seminorm,
    finite_window_seminorm,
    fourier_bohr_coefficient,
)
from .solver import (
    DelaySystem,
    SampleBox,
    SolveConfig,
    SolveReport,
    apply_Psi,
    empirical_contraction,
    estimate_lipschitz,
    iteration_grid,
    kappa_check,
    picard_solve,
)

__version__ = "0.1.0"
