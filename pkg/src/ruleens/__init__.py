"""Rule-ensemble classification: boosted-tree rule generation + sparse linear solvers."""

from .analysis import (
    CvResult,
    Metrics,
    RuleRanking,
    VoteTally,
    confusion_metrics,
    rank_rules,
    run_attribute_selection,
    run_cv,
    run_sweep,
    select_attributes,
    vote_rules,
)
from .dataset import (
    DataError,
    Dataset,
    ScalingParams,
    load_csv,
    standardize,
    stratified_kfold,
    stratified_split,
)
from .loss import LossKind
from .model import (
    EnsembleModel,
    ModelError,
    OvaModel,
    deserialize,
    fit_binary,
    fit_ova,
    predict_class,
    predict_class_scores,
    predict_label,
    predict_labels,
    predict_score,
    predict_scores,
    serialize,
)
from .rulegen import (
    BoostConfig,
    FeatureMatrix,
    Rule,
    RuleSet,
    build_feature_matrix,
    generate_rules,
)
from .solvers import (
    DEFAULT_PARAMS,
    SOLVER_NAMES,
    Coefficients,
    SolverError,
    SolverReport,
    cd_elastic_net,
    fpc,
    pathbuild,
    soft_threshold,
    solve,
    solver_params,
    spg_lasso,
)
from .tree import TreeConfig

__version__ = "0.1.0"

__all__ = [
    "BoostConfig",
    "Coefficients",
    "CvResult",
    "DataError",
    "Dataset",
    "DEFAULT_PARAMS",
    "EnsembleModel",
    "FeatureMatrix",
    "LossKind",
    "Metrics",
    "ModelError",
    "OvaModel",
    "Rule",
    "RuleRanking",
    "RuleSet",
    "SOLVER_NAMES",
    "ScalingParams",
    "SolverError",
    "SolverReport",
    "TreeConfig",
    "VoteTally",
    "build_feature_matrix",
    "cd_elastic_net",
    "confusion_metrics",
    "deserialize",
    "fit_binary",
    "fit_ova",
    "fpc",
    "generate_rules",
    "load_csv",
    "pathbuild",
    "predict_class",
    "predict_class_scores",
    "predict_label",
    "predict_labels",
    "predict_score",
    "predict_scores",
    "rank_rules",
    "run_attribute_selection",
    "run_cv",
    "run_sweep",
    "select_attributes",
    "serialize",
    "soft_threshold",
    "solve",
    "solver_params",
    "spg_lasso",
    "standardize",
    "stratified_kfold",
    "stratified_split",
    "vote_rules",
    "__version__",
]
