"""Layer-cost model partitioning.

A model is a linear stack of layers. The partitioner cuts it into one
contiguous segment per target capacity and minimizes the bottleneck
relative load max(segment_cost / capacity), breaking ties first by the
total activation volume crossing the cuts, then by earliest boundaries.

Segments are matched to capacities order-free: the search covers every
capacity ordering, which is what keeps the optimal bottleneck invariant
under permutations of the capacity list. Each ordering is solved exactly
with a two-phase dynamic program (min bottleneck, then min cut volume at
that bottleneck), so the overall cost is O(K! * L^2 * K). Capacity counts
here are node counts, single digits, so the factorial term is noise.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "LAYER_KINDS",
    "LayerDescriptor",
    "ModelDescriptor",
    "Segment",
    "PartitionPlan",
    "layer_cost",
    "model_cost",
    "partition_model",
]

LAYER_KINDS = ("conv2d", "linear", "other")

_INF = float("inf")


@dataclass(frozen=True)
class LayerDescriptor:
    """One layer of a model stack. Only the fields for its kind are required."""

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

    def __post_init__(self) -> None:
        if self.kind not in LAYER_KINDS:
            raise ValueError(f"layer {self.name!r}: unknown kind {self.kind!r}, expected one of {LAYER_KINDS}")
        if self.output_activation_size < 0:
            raise ValueError(f"layer {self.name!r}: output_activation_size must be >= 0")


def layer_cost(layer: LayerDescriptor) -> float:
    """Compute cost per layer kind.

    conv2d: kernel_h * kernel_w * in_channels * out_channels
    linear: in_features * out_features
    other:  params_count
    """
    if layer.kind == "conv2d":
        fields = ("kernel_h", "kernel_w", "in_channels", "out_channels")
    elif layer.kind == "linear":
        fields = ("in_features", "out_features")
    else:
        fields = ("params_count",)
    values = []
    for field in fields:
        value = getattr(layer, field)
        if value is None:
            raise ValueError(f"layer {layer.name!r} ({layer.kind}): missing {field}")
        if value < 0:
            raise ValueError(f"layer {layer.name!r} ({layer.kind}): {field} must be >= 0")
        values.append(value)
    cost = 1.0
    for value in values:
        cost *= value
    return cost


def model_cost(layers: Iterable[LayerDescriptor]) -> float:
    return sum(layer_cost(layer) for layer in layers)


@dataclass(frozen=True)
class ModelDescriptor:
    model_id: str
    layers: tuple[LayerDescriptor, ...]
    base_latency_ms: float
    synthetic: bool = True

    def __post_init__(self) -> None:
        if not self.model_id:
            raise ValueError("model_id must be non-empty")
        if len(self.layers) == 0:
            raise ValueError(f"model {self.model_id!r} must declare at least one layer")
        if self.base_latency_ms <= 0.0:
            raise ValueError(f"model {self.model_id!r}: base_latency_ms must be > 0")

    @property
    def total_params(self) -> float:
        return model_cost(self.layers)


@dataclass(frozen=True)
class Segment:
    """Half-open layer range [start, end) placed on one node."""

    start: int
    end: int
    node_id: str
    cost: float
    cut_activation_size: float


@dataclass(frozen=True)
class PartitionPlan:
    segments: tuple[Segment, ...]
    boundaries: tuple[int, ...]
    bottleneck: float
    total_cut_activation: float


def _positional_best(
    prefix: list[float], acts: list[float], caps: Sequence[float]
) -> tuple[float, float, tuple[int, ...]]:
    """Best plan for a fixed segment-to-capacity order.

    Phase 1 finds the minimal bottleneck; phase 2 re-walks the table keeping
    only segments whose load fits that bottleneck and minimizes
    (cut volume, boundary tuple) lexicographically.
    """
    L = len(prefix) - 1
    K = len(caps)

    bott = [[_INF] * (L + 1) for _ in range(K + 1)]
    bott[0][0] = 0.0
    for j in range(1, K + 1):
        cap = caps[j - 1]
        row_prev = bott[j - 1]
        row = bott[j]
        for i in range(j, L - (K - j) + 1):
            best = _INF
            for m in range(j - 1, i):
                prev = row_prev[m]
                if prev == _INF:
                    continue
                load = (prefix[i] - prefix[m]) / cap
                worst = prev if prev >= load else load
                if worst < best:
                    best = worst
            row[i] = best
    b_star = bott[K][L]

    cuts: list[list[tuple[float, tuple[int, ...]] | None]] = [
        [None] * (L + 1) for _ in range(K + 1)
    ]
    cuts[0][0] = (0.0, ())
    for j in range(1, K + 1):
        cap = caps[j - 1]
        row_prev = cuts[j - 1]
        row = cuts[j]
        for i in range(j, L - (K - j) + 1):
            best: tuple[float, tuple[int, ...]] | None = None
            for m in range(j - 1, i):
                prev = row_prev[m]
                if prev is None:
                    continue
                if (prefix[i] - prefix[m]) / cap > b_star:
                    continue
                if m > 0:
                    candidate = (prev[0] + acts[m - 1], prev[1] + (m,))
                else:
                    candidate = prev
                if best is None or candidate < best:
                    best = candidate
            row[i] = best
    cut_sum, bounds = cuts[K][L]  # phase 1 guarantees a feasible path exists
    return b_star, cut_sum, bounds


def partition_model(
    model: ModelDescriptor | Sequence[LayerDescriptor],
    capacities: Sequence[float],
    node_ids: Sequence[str] | None = None,
) -> PartitionPlan:
    """Split a model across capacities, one non-empty segment each."""
    layers = tuple(model.layers if isinstance(model, ModelDescriptor) else model)
    L = len(layers)
    K = len(capacities)
    if K == 0:
        raise ValueError("capacities must be non-empty")
    if K > L:
        raise ValueError(f"cannot cut {L} layers into {K} segments")
    for idx, cap in enumerate(capacities):
        if cap <= 0.0:
            raise ValueError(f"capacities[{idx}] must be > 0, got {cap}")
    if node_ids is None:
        node_ids = [f"segment-{k}" for k in range(K)]
    elif len(node_ids) != K:
        raise ValueError(f"expected {K} node ids, got {len(node_ids)}")

    costs = [layer_cost(layer) for layer in layers]
    acts = [float(layer.output_activation_size) for layer in layers]
    prefix = [0.0]
    for cost in costs:
        prefix.append(prefix[-1] + cost)

    best_key: tuple[float, float, tuple[int, ...]] | None = None
    best_perm: tuple[int, ...] | None = None
    for perm in itertools.permutations(range(K)):
        key = _positional_best(prefix, acts, [capacities[p] for p in perm])
        if best_key is None or key < best_key:
            best_key = key
            best_perm = perm
    assert best_key is not None and best_perm is not None
    bottleneck, cut_sum, bounds = best_key

    edges = (0,) + bounds + (L,)
    segments = []
    for k in range(K):
        start, end = edges[k], edges[k + 1]
        segments.append(
            Segment(
                start=start,
                end=end,
                node_id=node_ids[best_perm[k]],
                cost=prefix[end] - prefix[start],
                cut_activation_size=acts[end - 1] if end < L else 0.0,
            )
        )
    return PartitionPlan(
        segments=tuple(segments),
        boundaries=bounds,
        bottleneck=bottleneck,
        total_cut_activation=cut_sum,
    )
