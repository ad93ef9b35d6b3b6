"""Deterministic federated-learning benchmark engine for two-entity
(drug, protein) regression: data partitioning across the IID/non-IID
spectrum, FedAvg simulation, a bagging baseline, and grid reporting."""

from .data import (
    DataError,
    Dataset,
    DataView,
    InteractionRecord,
    SplitPair,
    generate_synthetic,
    load_csv,
    split_train_test,
    write_csv,
)
from .partition import (
    AdditionPlan,
    MixingConfig,
    Partition,
    PartitionError,
    apply_gaussian_mixing,
    partition_addition,
    partition_combined,
    partition_entity,
    partition_iid,
    partition_quantity_skew,
)
from .model import (
    ModelConfig,
    ModelError,
    ParameterVector,
    TrainConfig,
    evaluate_mse,
    gradient,
    init_model,
    predict,
    sgd_train,
)
from .federation import (
    ClientUpdate,
    FederationError,
    FedResult,
    fedavg_aggregate,
    local_update,
    run_federation,
)
from .ensemble import (
    EnsembleError,
    EnsembleModel,
    evaluate_ensemble,
    predict_ensemble,
    train_bagging,
)
from .bench import (
    ComparisonReport,
    ComparisonRow,
    ConfigError,
    ExperimentConfig,
    GridReport,
    pct_difference,
    run_addition_grid,
    run_comparison,
    run_grid,
    run_iidness_grid,
    run_quantity_grid,
)
from .reports import write_reports

__version__ = "0.1.0"
