"""Affine test-function benchmarking and algorithm-selection laboratory."""

from .aas import (
    ConstantPredictor,
    GapReport,
    LabeledDataset,
    OraclePredictor,
    SelectorModel,
    aggregate_by_strategy_size,
    cross_evaluate,
    gap_closed,
    label_instances,
    pca_project,
    portfolio_powerset_gaps,
    sbs,
    sbs_mean,
    train_selector,
    vbs_mean,
)
from .ela import (
    DEFAULT_CATALOG,
    FeatureCatalog,
    FeatureVector,
    NormalizationBounds,
    apply_minmax,
    average_feature_repetitions,
    compute_features,
    fit_minmax,
    prune_features,
)
from .functions import REGISTRY, ComponentFunction, get_component, registry_size
from .optimizers import OPTIMIZERS, OptimizerSpec, default_portfolio
from .portfolio import (
    AoccConfig,
    PerformanceTable,
    Trajectory,
    aocc,
    run_algorithm,
    run_portfolio,
)
from .problems import (
    ComponentInstance,
    GeneratorSpec,
    ProblemInstance,
    ScaleFactorCache,
    component_precision,
    component_problems,
    estimate_scale_factor,
    evaluate_problem,
    generate_problem,
    generate_suite,
    instantiate_component,
)
from .sampling import SampleDesign, derive_seed, repeat_designs, sobol_points
from .selection import (
    FeatureSpace,
    InstanceSet,
    SelectionPlan,
    avg_pairwise_manhattan,
    build_plan_sets,
    select_components,
    select_greedy,
    select_random,
)

__version__ = "0.1.0"
