"""Weighted multi-criteria node selection.

A candidate node is scored on five axes, each normalized to [0, 1]:
resources, load, performance, balance, carbon. The total is the weighted
dot product and the scheduler picks the strictly greatest total among
nodes that survive the load, latency and capacity filters. Ties keep the
first-declared node.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

from .carbon import CarbonIntensity, PowerModel, estimate_task_energy, node_power

__all__ = [
    "WEIGHT_SUM_TOLERANCE",
    "MODE_PRESETS",
    "MODE_NAMES",
    "ScoreWeights",
    "NodeSpec",
    "NodeStats",
    "TaskRequest",
    "ScoreBreakdown",
    "SelectionFilters",
    "resource_score",
    "load_score",
    "performance_score",
    "balance_score",
    "carbon_score",
    "has_sufficient_resources",
    "score_node",
    "select_node",
    "update_stats",
]

WEIGHT_SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ScoreWeights:
    """Weights for (resource, load, performance, balance, carbon). Must sum to 1."""

    w_r: float
    w_l: float
    w_p: float
    w_b: float
    w_c: float

    def __post_init__(self) -> None:
        for name in ("w_r", "w_l", "w_p", "w_b", "w_c"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        total = self.w_r + self.w_l + self.w_p + self.w_b + self.w_c
        if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
            raise ValueError(f"weights must sum to 1 within {WEIGHT_SUM_TOLERANCE}, got {total}")

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.w_r, self.w_l, self.w_p, self.w_b, self.w_c)


MODE_PRESETS: dict[str, ScoreWeights] = {
    "performance": ScoreWeights(w_r=0.25, w_l=0.25, w_p=0.30, w_b=0.15, w_c=0.05),
    "green": ScoreWeights(w_r=0.15, w_l=0.15, w_p=0.10, w_b=0.10, w_c=0.50),
    "balanced": ScoreWeights(w_r=0.20, w_l=0.20, w_p=0.15, w_b=0.15, w_c=0.30),
}

MODE_NAMES = tuple(MODE_PRESETS)


@dataclass(frozen=True)
class NodeSpec:
    """Static description of a schedulable node."""

    node_id: str
    cpu_quota: float
    mem_gb: float
    intensity: CarbonIntensity
    power: PowerModel
    declaration_index: int = 0
    probe_latency_ms: float = 0.0

    def __post_init__(self) -> None:
        if not self.node_id:
            raise ValueError("node_id must be non-empty")
        if self.cpu_quota <= 0.0:
            raise ValueError(f"cpu_quota must be > 0, got {self.cpu_quota}")
        if self.mem_gb <= 0.0:
            raise ValueError(f"mem_gb must be > 0, got {self.mem_gb}")
        if self.probe_latency_ms < 0.0:
            raise ValueError(f"probe_latency_ms must be >= 0, got {self.probe_latency_ms}")

    @property
    def power_w(self) -> float:
        return node_power(self.cpu_quota, self.mem_gb, self.power)


@dataclass
class NodeStats:
    """Mutable runtime view of a node, owned by the simulator between decisions.

    task_count is the in-flight (dispatched, not yet completed) count;
    completed and the usage fields are bookkeeping for the running mean and
    free-capacity math.
    """

    load: float = 0.0
    avg_time_s: float = 0.0
    task_count: int = 0
    latency_ms: float = 0.0
    cpu_used: float = 0.0
    mem_used_gb: float = 0.0
    completed: int = 0


@dataclass(frozen=True)
class TaskRequest:
    required_cpu: float = 0.0
    required_mem_gb: float = 0.0
    model_id: str = ""

    def __post_init__(self) -> None:
        if self.required_cpu < 0.0 or self.required_mem_gb < 0.0:
            raise ValueError("task resource demands must be >= 0")


@dataclass(frozen=True)
class ScoreBreakdown:
    s_r: float
    s_l: float
    s_p: float
    s_b: float
    s_c: float
    total: float


@dataclass(frozen=True)
class SelectionFilters:
    """Hard filters applied before scoring. Boundaries are inclusive."""

    load_max: float = 0.8
    latency_threshold_ms: float = 500.0


DEFAULT_FILTERS = SelectionFilters()


def _clamp01(value: float) -> float:
    return 0.0 if value < 0.0 else 1.0 if value > 1.0 else value


def resource_score(node: NodeSpec, stats: NodeStats, task: TaskRequest) -> float:
    """Slack remaining after hypothetically placing the task, worst dimension."""
    cpu_left = (node.cpu_quota - stats.cpu_used - task.required_cpu) / node.cpu_quota
    mem_left = (node.mem_gb - stats.mem_used_gb - task.required_mem_gb) / node.mem_gb
    return _clamp01(min(cpu_left, mem_left))


def load_score(stats: NodeStats) -> float:
    return _clamp01(1.0 - stats.load)


def performance_score(stats: NodeStats) -> float:
    # avg_time in seconds here; an idle history scores 1.
    return 1.0 / (1.0 + stats.avg_time_s)


def balance_score(stats: NodeStats) -> float:
    return 1.0 / (1.0 + 2.0 * stats.task_count)


def carbon_score(node: NodeSpec, stats: NodeStats) -> float:
    """1 / (1 + intensity * estimated task energy).

    The energy estimate feeds the node's average draw and its historical
    average time in milliseconds through the scoring-side convention in
    ``carbon.estimate_task_energy``.
    """
    e_est = estimate_task_energy(node.power_w, stats.avg_time_s * 1000.0)
    return 1.0 / (1.0 + node.intensity.grams_per_kwh * e_est)


def has_sufficient_resources(node: NodeSpec, stats: NodeStats, task: TaskRequest) -> bool:
    free_cpu = node.cpu_quota - stats.cpu_used
    free_mem = node.mem_gb - stats.mem_used_gb
    return free_cpu >= task.required_cpu and free_mem >= task.required_mem_gb


def score_node(
    node: NodeSpec, stats: NodeStats, task: TaskRequest, weights: ScoreWeights
) -> ScoreBreakdown:
    s_r = resource_score(node, stats, task)
    s_l = load_score(stats)
    s_p = performance_score(stats)
    s_b = balance_score(stats)
    s_c = carbon_score(node, stats)
    total = (
        weights.w_r * s_r
        + weights.w_l * s_l
        + weights.w_p * s_p
        + weights.w_b * s_b
        + weights.w_c * s_c
    )
    return ScoreBreakdown(s_r=s_r, s_l=s_l, s_p=s_p, s_b=s_b, s_c=s_c, total=total)


def select_node(
    task: TaskRequest,
    candidates: Sequence[tuple[NodeSpec, NodeStats]],
    weights: ScoreWeights,
    filters: SelectionFilters = DEFAULT_FILTERS,
) -> tuple[str, ScoreBreakdown] | None:
    """Pick the feasible node with the strictly greatest total score.

    Candidates are visited in the order given (declaration order), and the
    comparison is strict, so earlier nodes win exact ties. Returns None when
    every node is filtered out.
    """
    best: tuple[str, ScoreBreakdown] | None = None
    best_score = 0.0
    for node, stats in candidates:
        if stats.load > filters.load_max:
            continue
        if stats.latency_ms > filters.latency_threshold_ms:
            continue
        if not has_sufficient_resources(node, stats, task):
            continue
        breakdown = score_node(node, stats, task, weights)
        if breakdown.total > best_score:
            best = (node.node_id, breakdown)
            best_score = breakdown.total
    return best


def update_stats(stats: NodeStats, completed_task_time_s: float) -> NodeStats:
    """Fold one completed task into the running mean and drop it from in-flight."""
    if completed_task_time_s < 0.0:
        raise ValueError(f"completed_task_time_s must be >= 0, got {completed_task_time_s}")
    n = stats.completed
    new_avg = (stats.avg_time_s * n + completed_task_time_s) / (n + 1)
    return replace(
        stats,
        avg_time_s=new_avg,
        completed=n + 1,
        task_count=max(0, stats.task_count - 1),
    )
