"""Decision-support toolkit: learn a probability surface over a discrete
factor-intensity space from Likert survey data, then search it with a genetic
algorithm for allocations that maximize predicted success probability minus
normalized implementation cost."""

from .catalog import Category, FactorCatalog, FactorDef, default_catalog, load_catalog
from .dataset import (
    Dataset,
    DescriptiveRow,
    OutcomePolicy,
    SurveyRecord,
    SynthesisSpec,
    build_dataset,
    clean,
    default_synthesis_spec,
    descriptive_stats,
    load_survey,
    stratified_split,
    synthesize_dataset,
)
from .models import (
    AggregatedScorer,
    EvalMetrics,
    LogisticModel,
    NaiveBayesModel,
    TrainParams,
    aggregate_probability,
    evaluate,
    fit_logistic,
    fit_naive_bayes,
    load_scorer,
    lr_probability,
    nb_posterior,
    save_scorer,
    train_scorer,
)
from .optimize import (
    Allocation,
    FitnessReport,
    GAParams,
    GAResult,
    Scope,
    ThemeSummaryRow,
    baseline_allocation,
    category_scope,
    exhaustive_optimum,
    fitness,
    global_scope,
    normalized_cost,
    optimize_global,
    optimize_per_category,
    run_ga,
    total_cost,
)

__version__ = "0.1.0"

__all__ = [
    "AggregatedScorer",
    "Allocation",
    "Category",
    "Dataset",
    "DescriptiveRow",
    "EvalMetrics",
    "FactorCatalog",
    "FactorDef",
    "FitnessReport",
    "GAParams",
    "GAResult",
    "LogisticModel",
    "NaiveBayesModel",
    "OutcomePolicy",
    "Scope",
    "SurveyRecord",
    "SynthesisSpec",
    "ThemeSummaryRow",
    "TrainParams",
    "aggregate_probability",
    "baseline_allocation",
    "build_dataset",
    "category_scope",
    "clean",
    "default_catalog",
    "default_synthesis_spec",
    "descriptive_stats",
    "evaluate",
    "exhaustive_optimum",
    "fit_logistic",
    "fit_naive_bayes",
    "fitness",
    "global_scope",
    "load_catalog",
    "load_scorer",
    "load_survey",
    "lr_probability",
    "nb_posterior",
    "normalized_cost",
    "optimize_global",
    "optimize_per_category",
    "run_ga",
    "save_scorer",
    "stratified_split",
    "synthesize_dataset",
    "total_cost",
    "train_scorer",
]
