"""Gray-box NARX hysteresis identification and compensation"""
# pylint: disable=invalid-name

from .__version__ import __version__
from .analysis import (
    QuasiStaticCurve,
    SteadyStateReport,
    attracting_test,
    build_continuum_constraint,
    quasi_static_solve,
    steady_state_analyze,
    sum_linear_output_params,
)
from .compensation import (
    ChainResult,
    CompensatorLaw,
    DirectDecomposition,
    LawFactor,
    LawTerm,
    decompose_direct,
    evaluate_chain,
    run_compensator,
    shift_for_inverse,
    synthesize_direct,
    synthesize_inverse,
)
from .config import ExperimentConfig, load_experiment_config
from .estimation import (
    EqualityConstraint,
    LeastSquaresResult,
    SelectionReport,
    aic_choose_size,
    constrained_least_squares,
    frols_select,
    least_squares,
)
from .exceptions import (
    CausalityError,
    ConfigError,
    DataFormatError,
    DivergenceError,
    NarxHysteresisError,
    NumericError,
    RankDeficiencyError,
    StructuralError,
)
from .metrics import mape, nsavi
from .narx import NarxModel, Signal, build_regressor_matrix, compute_phi, free_run, one_step_predict
from .plant import (
    BoucWenParams,
    BoucWenPlant,
    SimConfig,
    beta_sweep,
    make_filtered_noise_excitation,
    make_sinusoid,
    simulate_bouc_wen,
)
from .storage import read_dataset, write_dataset
from .terms import LaggedFactor, Term, generate_term_pool
from .types import Branch, ExclusionRule, LawKind, SignalKind, SteadyStateClass

__all__ = [
    "BoucWenParams",
    "BoucWenPlant",
    "Branch",
    "CausalityError",
    "ChainResult",
    "CompensatorLaw",
    "ConfigError",
    "DataFormatError",
    "DirectDecomposition",
    "DivergenceError",
    "EqualityConstraint",
    "ExclusionRule",
    "ExperimentConfig",
    "LaggedFactor",
    "LawFactor",
    "LawKind",
    "LawTerm",
    "LeastSquaresResult",
    "NarxHysteresisError",
    "NarxModel",
    "NumericError",
    "QuasiStaticCurve",
    "RankDeficiencyError",
    "SelectionReport",
    "Signal",
    "SignalKind",
    "SimConfig",
    "SteadyStateClass",
    "SteadyStateReport",
    "StructuralError",
    "Term",
    "__version__",
    "aic_choose_size",
    "attracting_test",
    "beta_sweep",
    "build_continuum_constraint",
    "build_regressor_matrix",
    "compute_phi",
    "constrained_least_squares",
    "decompose_direct",
    "evaluate_chain",
    "free_run",
    "frols_select",
    "generate_term_pool",
    "least_squares",
    "load_experiment_config",
    "make_filtered_noise_excitation",
    "make_sinusoid",
    "mape",
    "nsavi",
    "one_step_predict",
    "quasi_static_solve",
    "read_dataset",
    "run_compensator",
    "shift_for_inverse",
    "simulate_bouc_wen",
    "steady_state_analyze",
    "sum_linear_output_params",
    "synthesize_direct",
    "synthesize_inverse",
    "write_dataset",
]
