"""Active intervention selection for bivariate causal hypothesis testing.

Pick interventions ``do(X=x)`` that maximize the probability of collecting
decisive, correct Bayes-factor evidence about whether X causes Y, and
benchmark the policy against information-gain and random baselines on
synthetic environments.
"""

from .bayes import (
    EvidenceLevel,
    HypothesisPosterior,
    bf01_from_log,
    classify_evidence,
    classify_evidence_log,
    log_bf01,
    update_posterior,
)
from .errors import (
    ConfigError,
    DecintError,
    DegenerateDataError,
    InvalidMixtureError,
    NonFiniteError,
    NonPositiveBayesFactorError,
)
from .fitting import FitConfig, FittedModels, fit_m0, fit_m1, fit_models
from .harness import (
    AggregateRow,
    ExperimentConfig,
    StepRecord,
    SuiteResult,
    aggregate_records,
    emit_csv,
    expand_grid,
    parse_csv,
    run_episode,
    run_suite,
    write_csv,
)
from .mixtures import VARIANCE_FLOOR, MixtureOfNormals
from .pdc import (
    McNoise,
    PdcConfig,
    draw_mc_noise,
    estimate_pdc,
    optimize_intervention,
    pdc_gradient,
    smoothed_step,
)
from .plotting import render_suite_figures
from .scm import (
    Dataset,
    DatasetKind,
    NoiseMode,
    Scenario,
    ScenarioSpec,
    generate_noise_spec,
    make_scenario_spec,
    sample_interventional,
    sample_observational,
    tanh_link,
)
from .strategies import (
    StrategyKind,
    estimate_info_gain,
    info_gain_gradient,
    optimize_info_gain,
    select_intervention,
    select_random,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateRow",
    "ConfigError",
    "Dataset",
    "DatasetKind",
    "DecintError",
    "DegenerateDataError",
    "EvidenceLevel",
    "ExperimentConfig",
    "FitConfig",
    "FittedModels",
    "HypothesisPosterior",
    "InvalidMixtureError",
    "McNoise",
    "MixtureOfNormals",
    "NoiseMode",
    "NonFiniteError",
    "NonPositiveBayesFactorError",
    "PdcConfig",
    "Scenario",
    "ScenarioSpec",
    "StepRecord",
    "StrategyKind",
    "SuiteResult",
    "VARIANCE_FLOOR",
    "aggregate_records",
    "bf01_from_log",
    "classify_evidence",
    "classify_evidence_log",
    "draw_mc_noise",
    "emit_csv",
    "estimate_info_gain",
    "estimate_pdc",
    "expand_grid",
    "fit_m0",
    "fit_m1",
    "fit_models",
    "generate_noise_spec",
    "info_gain_gradient",
    "log_bf01",
    "make_scenario_spec",
    "optimize_info_gain",
    "optimize_intervention",
    "parse_csv",
    "pdc_gradient",
    "render_suite_figures",
    "run_episode",
    "run_suite",
    "sample_interventional",
    "sample_observational",
    "select_intervention",
    "select_random",
    "smoothed_step",
    "tanh_link",
    "update_posterior",
    "write_csv",
]
