"""varisk: imbalance-aware risk classification for mixed-type cohorts."""

from .core_data import (
    Continuous,
    Dataset,
    FeatureVector,
    Nominal,
    Schema,
    class_counts,
    load_csv,
    load_schema,
    project,
    save_schema,
    schema_hash,
    write_csv,
)
from .imputation import ImputeConfig, MixedDistance, knn_impute, mixed_distance
from .stats_tests import (
    AssociationResult,
    ContingencyTable,
    InfoGainResult,
    WelchResult,
    bvn_cdf,
    entropy,
    info_gain,
    polychoric,
    polyserial,
    student_t_sf,
    welch_t,
)
from .feature_selection import (
    SelectionConfig,
    SelectionReport,
    backward_eliminate,
    exclude_outcome_variables,
    screen_features,
)
from .resampling import (
    RebalanceAudit,
    ResamplingConfig,
    rebalance,
    smote_oversample,
    undersample_majority,
)
from .classifiers import (
    EnsembleModel,
    ForestParams,
    LogisticModel,
    NaiveBayesModel,
    TreeParams,
    classify,
    fit_ensemble,
    fit_forest,
    fit_logistic,
    fit_model,
    fit_naive_bayes,
    fit_tree,
    load_model,
    predict_proba,
    save_model,
)
from .evaluation import (
    ConfusionMatrix,
    CvConfig,
    CvReport,
    MetricSet,
    RocCurve,
    compare_feature_sets,
    confusion_metrics,
    roc_auc,
    run_cv,
    stratified_folds,
)
from .cohort_sim import SimConfig, generate

__version__ = "0.1.0"
