"""Carbon-aware scheduling engine and deterministic edge-inference simulator."""

__version__ = "0.1.0"

SCHEMA_VERSION = "1"

from .carbon import (
    CarbonIntensity,
    EmissionRecord,
    EnergyRecord,
    PowerModel,
    PowerSample,
    apportion_host_energy,
    compute_emissions,
    estimate_task_energy,
    integrate_energy,
    node_power,
)
from .partitioning import (
    LayerDescriptor,
    ModelDescriptor,
    PartitionPlan,
    layer_cost,
    model_cost,
    partition_model,
)
from .scoring import (
    MODE_PRESETS,
    NodeSpec,
    NodeStats,
    ScoreWeights,
    SelectionFilters,
    TaskRequest,
    score_node,
    select_node,
)
from .simulation import (
    Arrival,
    Baseline,
    Mode,
    SimResult,
    TaskRecord,
    Workload,
    carbon_reduction,
    execution_time_ms,
    measure_scheduling_overhead,
    run_workload,
)

__all__ = [
    "__version__",
    "SCHEMA_VERSION",
    "CarbonIntensity",
    "EmissionRecord",
    "EnergyRecord",
    "PowerModel",
    "PowerSample",
    "apportion_host_energy",
    "compute_emissions",
    "estimate_task_energy",
    "integrate_energy",
    "node_power",
    "LayerDescriptor",
    "ModelDescriptor",
    "PartitionPlan",
    "layer_cost",
    "model_cost",
    "partition_model",
    "MODE_PRESETS",
    "NodeSpec",
    "NodeStats",
    "ScoreWeights",
    "SelectionFilters",
    "TaskRequest",
    "score_node",
    "select_node",
    "Arrival",
    "Baseline",
    "Mode",
    "SimResult",
    "TaskRecord",
    "Workload",
    "carbon_reduction",
    "execution_time_ms",
    "measure_scheduling_overhead",
    "run_workload",
]
