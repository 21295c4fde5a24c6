"""Request and response bodies for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, model_validator

from ..config import NodeConfig


class HealthResponse(BaseModel):
    status: str
    version: str


class ModelInfo(BaseModel):
    model_id: str
    layer_count: int
    total_params: int
    base_latency_ms: float
    synthetic: bool


class ValidateResponse(BaseModel):
    valid: bool
    config_digest: str | None = None
    errors: list[str] = []


class ReportResponse(BaseModel):
    report: dict
    overhead: dict


class StatsIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    load: float = 0.0
    avg_time_s: float = 0.0
    task_count: int = 0
    latency_ms: float = 0.0
    cpu_used: float = 0.0
    mem_used_gb: float = 0.0
    completed: int = 0


class TaskIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    required_cpu: float = 0.0
    required_mem_gb: float = 0.0
    model_id: str = ""


class FiltersIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    load_max: float = 0.8
    latency_threshold_ms: float = 500.0


class ScheduleRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    nodes: list[NodeConfig]
    task: TaskIn = TaskIn()
    mode: str | None = None
    weights: list[float] | None = None
    stats: dict[str, StatsIn] | None = None
    filters: FiltersIn = FiltersIn()

    @model_validator(mode="after")
    def _check(self) -> "ScheduleRequest":
        if (self.mode is None) == (self.weights is None):
            raise ValueError("provide exactly one of mode or weights")
        if self.weights is not None and len(self.weights) != 5:
            raise ValueError(f"weights need 5 entries, got {len(self.weights)}")
        if not self.nodes:
            raise ValueError("nodes must declare at least one node")
        return self


class ScoresOut(BaseModel):
    s_r: float
    s_l: float
    s_p: float
    s_b: float
    s_c: float
    total: float


class CandidateOut(BaseModel):
    node_id: str
    eligible: bool
    total: float | None = None


class ScheduleResponse(BaseModel):
    selected_node: str | None
    scores: ScoresOut | None = None
    candidates: list[CandidateOut]


class LayerIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    kind: str
    kernel_h: int | None = None
    kernel_w: int | None = None
    in_channels: int | None = None
    out_channels: int | None = None
    in_features: int | None = None
    out_features: int | None = None
    params_count: int | None = None
    output_activation_size: int = 0


class PartitionRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    model_id: str | None = None
    layers: list[LayerIn] | None = None
    capacities: list[float]
    node_ids: list[str] | None = None

    @model_validator(mode="after")
    def _check(self) -> "PartitionRequest":
        if (self.model_id is None) == (self.layers is None):
            raise ValueError("provide exactly one of model_id or layers")
        return self


class SegmentOut(BaseModel):
    start: int
    end: int
    node_id: str
    cost: float
    cut_activation_size: float


class PartitionResponse(BaseModel):
    model_id: str | None
    boundaries: list[int]
    bottleneck: float
    total_cut_activation: float
    segments: list[SegmentOut]
