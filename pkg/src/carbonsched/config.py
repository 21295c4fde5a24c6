"""Experiment configuration: YAML schema, validation, and resolution.

A config file fully determines an experiment. ``config_digest`` hashes the
parsed form so reports can state exactly which configuration produced them.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import yaml
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from . import SCHEMA_VERSION
from .carbon import CarbonIntensity, PowerModel
from .catalogs import bundled_model_catalog, bundled_region_catalog, load_model_catalog
from .partitioning import ModelDescriptor
from .scoring import MODE_NAMES, MODE_PRESETS, NodeSpec, ScoreWeights, SelectionFilters
from .simulation import (
    ARRIVAL_KINDS,
    BASELINE_KINDS,
    DEFAULT_OVERHEAD_FRAC,
    DEFAULT_PER_CPU_W,
    Arrival,
    Baseline,
    Mode,
    Workload,
)

REPORT_FORMATS = ("json", "csv", "md")
REDISTRIBUTIONS = ("proportional", "uniform")


class ConfigError(Exception):
    """Raised when a configuration cannot be parsed, validated, or resolved."""


class PowerConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    base_w: float = 0.0
    per_cpu_w: float | None = None
    ram_w_per_gb: float = 0.375


class NodeConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    node_id: str
    cpu_quota: float
    mem_gb: float
    carbon_intensity_g_per_kwh: float | None = None
    region: str | None = None
    power: PowerConfig | None = None
    probe_latency_ms: float = 0.0

    @model_validator(mode="after")
    def _check(self) -> "NodeConfig":
        if (self.carbon_intensity_g_per_kwh is None) == (self.region is None):
            raise ValueError(
                f"node {self.node_id!r} needs exactly one of carbon_intensity_g_per_kwh or region"
            )
        return self


class ModeConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    weights: list[float] | None = None

    @model_validator(mode="after")
    def _check(self) -> "ModeConfig":
        if self.weights is None:
            if self.name not in MODE_NAMES:
                raise ValueError(f"mode {self.name!r} has no preset; known presets: {MODE_NAMES}")
        elif len(self.weights) != 5:
            raise ValueError(f"mode {self.name!r} weights need 5 entries, got {len(self.weights)}")
        return self


class BaselineConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: str
    node_id: str | None = None

    @model_validator(mode="after")
    def _check(self) -> "BaselineConfig":
        if self.kind not in BASELINE_KINDS:
            raise ValueError(f"unknown baseline kind {self.kind!r}, expected one of {BASELINE_KINDS}")
        if self.kind == "monolithic" and not self.node_id:
            raise ValueError("monolithic baseline needs node_id")
        return self


class ArrivalConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: str = "closed-loop"
    rate_per_s: float | None = None

    @model_validator(mode="after")
    def _check(self) -> "ArrivalConfig":
        if self.kind not in ARRIVAL_KINDS:
            raise ValueError(f"unknown arrival kind {self.kind!r}, expected one of {ARRIVAL_KINDS}")
        if self.kind == "poisson" and (self.rate_per_s is None or self.rate_per_s <= 0):
            raise ValueError("poisson arrivals need rate_per_s > 0")
        return self


class WorkloadConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    iterations: int = 50
    batch_size: int = 1
    arrival: ArrivalConfig = ArrivalConfig()
    seed: int = 42
    task_cpu: float = 0.01
    task_mem_gb: float = 0.01
    warm_start: bool = True


class ModelsConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    catalog: str = "bundled"
    ids: list[str]

    @model_validator(mode="after")
    def _check(self) -> "ModelsConfig":
        if not self.ids:
            raise ValueError("models.ids must name at least one model")
        return self


class FiltersConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    load_max: float = 0.8
    latency_threshold_ms: float = 500.0


class SweepConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    w_c_step: float = 0.05
    w_c_values: list[float] | None = None
    redistribution: str = "proportional"

    @model_validator(mode="after")
    def _check(self) -> "SweepConfig":
        if not 0.0 < self.w_c_step <= 1.0:
            raise ValueError(f"sweep.w_c_step must be in (0, 1], got {self.w_c_step}")
        if self.redistribution not in REDISTRIBUTIONS:
            raise ValueError(
                f"unknown sweep.redistribution {self.redistribution!r}, expected one of {REDISTRIBUTIONS}"
            )
        if self.w_c_values is not None:
            for value in self.w_c_values:
                if not 0.0 <= value <= 1.0:
                    raise ValueError(f"sweep.w_c_values entries must be in [0, 1], got {value}")
        return self


class OutputConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    formats: list[str] = list(REPORT_FORMATS)

    @model_validator(mode="after")
    def _check(self) -> "OutputConfig":
        for fmt in self.formats:
            if fmt not in REPORT_FORMATS:
                raise ValueError(f"unknown output format {fmt!r}, expected one of {REPORT_FORMATS}")
        if not self.formats:
            raise ValueError("output.formats must name at least one format")
        return self


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: str = SCHEMA_VERSION
    nodes: list[NodeConfig]
    modes: list[str | ModeConfig]
    baselines: list[BaselineConfig] = []
    workload: WorkloadConfig = WorkloadConfig()
    models: ModelsConfig
    filters: FiltersConfig = FiltersConfig()
    overhead_frac: float = DEFAULT_OVERHEAD_FRAC
    pue: float = 1.0
    sweep: SweepConfig = SweepConfig()
    output: OutputConfig = OutputConfig()

    @model_validator(mode="after")
    def _check(self) -> "ExperimentConfig":
        if self.schema_version != SCHEMA_VERSION:
            raise ValueError(
                f"schema_version {self.schema_version!r} is not supported, expected {SCHEMA_VERSION!r}"
            )
        if not self.nodes:
            raise ValueError("nodes must declare at least one node")
        ids = [node.node_id for node in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate node ids: {sorted(ids)}")
        for node in self.nodes:
            if node.cpu_quota <= 0 or node.mem_gb <= 0:
                raise ValueError(f"node {node.node_id!r} needs positive cpu_quota and mem_gb")
        if not self.modes:
            raise ValueError("modes must name at least one scheduling mode")
        for entry in self.modes:
            if isinstance(entry, str) and entry not in MODE_NAMES:
                raise ValueError(f"mode {entry!r} has no preset; known presets: {MODE_NAMES}")
        for baseline in self.baselines:
            if baseline.kind == "monolithic" and baseline.node_id not in set(ids):
                raise ValueError(f"monolithic baseline node {baseline.node_id!r} is not a declared node")
        if self.overhead_frac < 0:
            raise ValueError("overhead_frac must be non-negative")
        if self.pue < 1.0:
            raise ValueError(f"pue must be at least 1.0, got {self.pue}")
        return self


def _format_validation_error(origin: str, err: ValidationError) -> str:
    parts = []
    for detail in err.errors():
        loc = ".".join(str(piece) for piece in detail["loc"]) or "<root>"
        parts.append(f"{loc}: {detail['msg']}")
    return f"{origin}: " + "; ".join(parts)


def parse_config(data: object, origin: str = "<config>") -> ExperimentConfig:
    """Validate an already-parsed mapping, then resolve catalogs eagerly."""
    if not isinstance(data, dict):
        raise ConfigError(f"{origin}: top level must be a mapping, got {type(data).__name__}")
    try:
        cfg = ExperimentConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_format_validation_error(origin, err)) from err
    # Resolve regions and model ids now so a bad name fails at load time,
    # not halfway through an experiment.
    try:
        build_nodes(cfg)
        build_modes(cfg)
        resolve_models(cfg)
    except (ValueError, OSError) as err:
        raise ConfigError(f"{origin}: {err}") from err
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(f"{path}: {err}") from err
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ConfigError(f"{path}: invalid YAML: {err}") from err
    return parse_config(data, origin=str(path))


def default_config() -> ExperimentConfig:
    """The three-tier testbed this package is calibrated around."""
    return ExperimentConfig(
        nodes=[
            NodeConfig(node_id="node-high", cpu_quota=1.0, mem_gb=1.0, region="grid-high"),
            NodeConfig(node_id="node-medium", cpu_quota=0.6, mem_gb=0.5, region="grid-average"),
            NodeConfig(node_id="node-green", cpu_quota=0.4, mem_gb=0.5, region="grid-low"),
        ],
        modes=["performance", "green", "balanced"],
        baselines=[
            BaselineConfig(kind="monolithic", node_id="node-medium"),
            BaselineConfig(kind="round-robin"),
        ],
        models=ModelsConfig(ids=["mobilenet_v2_sim"]),
    )


def config_digest(cfg: ExperimentConfig) -> str:
    canonical = json.dumps(cfg.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def node_spec_from_config(node: NodeConfig, index: int) -> NodeSpec:
    regions = bundled_region_catalog()
    if node.region is not None:
        if node.region not in regions:
            raise ValueError(
                f"node {node.node_id!r} references unknown region {node.region!r}; "
                f"known regions: {sorted(regions)}"
            )
        intensity = CarbonIntensity(grams_per_kwh=regions[node.region], region_label=node.region)
    else:
        intensity = CarbonIntensity(grams_per_kwh=node.carbon_intensity_g_per_kwh)
    power_cfg = node.power or PowerConfig()
    per_cpu = power_cfg.per_cpu_w if power_cfg.per_cpu_w is not None else DEFAULT_PER_CPU_W
    power = PowerModel(base_w=power_cfg.base_w, per_cpu_w=per_cpu, ram_w_per_gb=power_cfg.ram_w_per_gb)
    return NodeSpec(
        node_id=node.node_id,
        cpu_quota=node.cpu_quota,
        mem_gb=node.mem_gb,
        intensity=intensity,
        power=power,
        declaration_index=index,
        probe_latency_ms=node.probe_latency_ms,
    )


def build_nodes(cfg: ExperimentConfig) -> list[NodeSpec]:
    return [node_spec_from_config(node, index) for index, node in enumerate(cfg.nodes)]


def build_modes(cfg: ExperimentConfig) -> list[Mode]:
    modes = []
    for entry in cfg.modes:
        if isinstance(entry, str):
            modes.append(Mode(name=entry, weights=MODE_PRESETS[entry]))
        elif entry.weights is None:
            modes.append(Mode(name=entry.name, weights=MODE_PRESETS[entry.name]))
        else:
            w = entry.weights
            modes.append(
                Mode(name=entry.name, weights=ScoreWeights(w_r=w[0], w_l=w[1], w_p=w[2], w_b=w[3], w_c=w[4]))
            )
    return modes


def build_baselines(cfg: ExperimentConfig) -> list[Baseline]:
    return [Baseline(kind=b.kind, node_id=b.node_id) for b in cfg.baselines]


def build_workload(cfg: ExperimentConfig, model_id: str) -> Workload:
    w = cfg.workload
    arrival = Arrival(kind=w.arrival.kind, rate_per_s=w.arrival.rate_per_s)
    return Workload(
        model_id=model_id,
        iterations=w.iterations,
        batch_size=w.batch_size,
        arrival=arrival,
        seed=w.seed,
        task_cpu=w.task_cpu,
        task_mem_gb=w.task_mem_gb,
        warm_start=w.warm_start,
    )


def build_filters(cfg: ExperimentConfig) -> SelectionFilters:
    return SelectionFilters(
        load_max=cfg.filters.load_max,
        latency_threshold_ms=cfg.filters.latency_threshold_ms,
    )


def resolve_models(cfg: ExperimentConfig) -> list[ModelDescriptor]:
    if cfg.models.catalog == "bundled":
        catalog = bundled_model_catalog()
    else:
        catalog = load_model_catalog(cfg.models.catalog)
    missing = [mid for mid in cfg.models.ids if mid not in catalog]
    if missing:
        raise ValueError(f"unknown model ids {missing}; catalog has {sorted(catalog)}")
    return [catalog[mid] for mid in cfg.models.ids]
