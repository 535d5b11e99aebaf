"""Policy evaluation and learning across a labeled source domain and a
covariate-only target domain under covariate shift."""

from .data import CombinedDataset, CsvSchema, PotentialOutcomes, ingest_csv, require_valid, validate, write_csv
from .estimators import (
    BoundReport,
    RewardCoefficients,
    RewardEstimate,
    bias_diagnostic,
    coefficients_direct_r,
    coefficients_ipw_r,
    coefficients_se_r,
    coefficients_se_v,
    estimate,
    generalization_bound,
    reward_coefficients,
)
from .features import FeatureMap, sigmoid
from .harness import (
    EvalMetrics,
    ExperimentConfig,
    ExperimentReport,
    evaluate_policy,
    run_replication,
    run_sweep,
    run_table,
    write_sweep_csv,
    write_table_csv,
)
from .nuisance import (
    FitError,
    LogisticModel,
    NuisanceConfig,
    NuisanceSet,
    RidgeModel,
    fit_logistic,
    fit_nuisances,
    fit_outcome,
    fit_propensity,
    fit_ridge,
    fit_sampling_score,
    predict_clipped,
)
from .policy import LearnerConfig, LinearPolicy, OraclePolicy, TrainingTrace, learn_policy, oracle_decision, policy_error
from .simulate import (
    SimConfig,
    SimulatedData,
    conditional_effect,
    feature_transform,
    generate,
    population_reward,
    read_truth_csv,
    shift_sweep_config,
    true_nuisances,
    write_truth_csv,
)
from .stats import PairedTTest, betainc, paired_t_test, t_cdf, t_sf_two_sided

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "CombinedDataset",
    "CsvSchema",
    "EvalMetrics",
    "ExperimentConfig",
    "ExperimentReport",
    "FeatureMap",
    "FitError",
    "LearnerConfig",
    "LinearPolicy",
    "LogisticModel",
    "NuisanceConfig",
    "NuisanceSet",
    "OraclePolicy",
    "PairedTTest",
    "PotentialOutcomes",
    "RewardCoefficients",
    "RewardEstimate",
    "RidgeModel",
    "SimConfig",
    "SimulatedData",
    "TrainingTrace",
    "betainc",
    "bias_diagnostic",
    "coefficients_direct_r",
    "coefficients_ipw_r",
    "coefficients_se_r",
    "coefficients_se_v",
    "conditional_effect",
    "estimate",
    "evaluate_policy",
    "feature_transform",
    "fit_logistic",
    "fit_nuisances",
    "fit_outcome",
    "fit_propensity",
    "fit_ridge",
    "fit_sampling_score",
    "generalization_bound",
    "generate",
    "ingest_csv",
    "learn_policy",
    "oracle_decision",
    "paired_t_test",
    "policy_error",
    "population_reward",
    "predict_clipped",
    "read_truth_csv",
    "require_valid",
    "reward_coefficients",
    "run_replication",
    "run_sweep",
    "run_table",
    "shift_sweep_config",
    "sigmoid",
    "t_cdf",
    "t_sf_two_sided",
    "true_nuisances",
    "validate",
    "write_csv",
    "write_sweep_csv",
    "write_table_csv",
    "write_truth_csv",
]
