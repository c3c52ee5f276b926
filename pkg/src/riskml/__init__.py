"""Injury-risk classification toolkit for tabular accident data.

End-to-end pipeline: ingest a ';'-delimited accident table, cleanse and
one-hot encode it, derive the binary injury target, standardize
features on a seeded train split, fit five classifiers (logistic
regression, SVM with Platt scaling, Gaussian Naive Bayes, kNN, random
forest), and evaluate them with per-class metrics and ROC/AUC.
"""

from .errors import (
    CleanseError,
    ConvergenceError,
    ParseError,
    RiskmlError,
    SchemaError,
    ValidationError,
)
from .evaluation import (
    ClassMetrics,
    ConfusionCounts,
    EvaluationReport,
    RocCurve,
    auc_trapezoid,
    classification_report,
    confusion_counts,
    render_roc_svg,
    roc_curve,
)
from .features import (
    DesignMatrix,
    OneHotEncoder,
    ScalerParams,
    SplitIndices,
    apply_scaler,
    derive_target,
    encode,
    fit_scaler,
    split,
)
from .forest import (
    DecisionTree,
    ImportanceRanking,
    RandomForestClassifier,
    feature_importances,
)
from .ingest import (
    CleanDataset,
    CleanseLog,
    RawDataset,
    cleanse,
    parse_dataset,
)
from .linear_models import (
    KernelSpec,
    LinearCoefficients,
    LogisticRegression,
    PlattCalibrator,
    SupportVectorClassifier,
    kernel_matrix,
    svm_kkt_violation,
)
from .models import make_model, model_from_dict
from .neighbors_bayes import GaussianNaiveBayes, KNeighborsClassifier
from .pipeline import (
    RunConfig,
    build_config,
    run_evaluate,
    run_prepare,
    run_synth,
    run_train,
    run_tune,
)
from .schema import ColumnKind, ColumnSpec, default_schema
from .synth import generate_fixture
from .tuning import ParamGrid, TrialRecord, TuneResult, grid_search

__version__ = "0.1.0"
