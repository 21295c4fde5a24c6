"""Energy accounting and emission conversion.

Everything downstream (scoring, simulation, reports) goes through the
primitives in this module, so the unit conventions are pinned here once:

* power in watts, time in seconds for traces, grid intensity in gCO2/kWh
* ``SCORING_WMS_PER_KWH`` is the divisor the selection score applies to a
  watts x milliseconds product. It is deliberately off by a factor of 1000
  from the physical conversion and is kept because the published score
  ranges depend on it.
* ``PHYSICAL_WMS_PER_KWH`` is the correct watts x milliseconds to kWh
  divisor and is what the simulator uses for actual energy bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

__all__ = [
    "SCORING_WMS_PER_KWH",
    "PHYSICAL_WMS_PER_KWH",
    "JOULES_PER_KWH",
    "DEFAULT_RAM_W_PER_GB",
    "PowerSample",
    "PowerModel",
    "CarbonIntensity",
    "EnergyRecord",
    "EmissionRecord",
    "integrate_energy",
    "compute_emissions",
    "apportion_host_energy",
    "estimate_task_energy",
    "node_power",
]

JOULES_PER_KWH = 3.6e6
# Score-side convention: watts times milliseconds divided by 3.6e6.
SCORING_WMS_PER_KWH = 3.6e6
# Physically correct: 1 kWh = 3.6e9 watt-milliseconds.
PHYSICAL_WMS_PER_KWH = 3.6e9
# DDR4 rule of thumb, watts per GB.
DEFAULT_RAM_W_PER_GB = 0.375

ENERGY_SOURCES = ("measured-trace", "model-estimate", "apportioned")


@dataclass(frozen=True)
class PowerSample:
    """One point of a host power trace. Watt fields must be non-negative."""

    timestamp_s: float
    gpu_w: float = 0.0
    cpu_w: float = 0.0
    ram_w: float = 0.0

    def __post_init__(self) -> None:
        for field in ("gpu_w", "cpu_w", "ram_w"):
            if getattr(self, field) < 0.0:
                raise ValueError(f"PowerSample.{field} must be >= 0, got {getattr(self, field)}")

    @property
    def total_w(self) -> float:
        return self.gpu_w + self.cpu_w + self.ram_w


@dataclass(frozen=True)
class PowerModel:
    """Affine draw model: base_w + per_cpu_w * cpus + ram_w_per_gb * mem_gb."""

    base_w: float = 0.0
    per_cpu_w: float = 0.0
    ram_w_per_gb: float = DEFAULT_RAM_W_PER_GB

    def __post_init__(self) -> None:
        for field in ("base_w", "per_cpu_w", "ram_w_per_gb"):
            if getattr(self, field) < 0.0:
                raise ValueError(f"PowerModel.{field} must be >= 0, got {getattr(self, field)}")


@dataclass(frozen=True)
class CarbonIntensity:
    """Grid carbon intensity in grams CO2 per kWh, strictly positive."""

    grams_per_kwh: float
    region_label: str = ""

    def __post_init__(self) -> None:
        if self.grams_per_kwh <= 0.0:
            raise ValueError(f"grams_per_kwh must be > 0, got {self.grams_per_kwh}")


@dataclass(frozen=True)
class EnergyRecord:
    """Integrated or estimated energy, always in kWh."""

    kwh: float
    duration_s: float
    source: str

    def __post_init__(self) -> None:
        if self.kwh < 0.0:
            raise ValueError(f"kwh must be >= 0, got {self.kwh}")
        if self.source not in ENERGY_SOURCES:
            raise ValueError(f"unknown energy source {self.source!r}, expected one of {ENERGY_SOURCES}")


@dataclass(frozen=True)
class EmissionRecord:
    """Emissions attributable to one energy record at a given intensity."""

    grams_co2: float
    energy_kwh: float
    intensity_g_per_kwh: float
    pue: float


def integrate_energy(trace: Sequence[PowerSample]) -> EnergyRecord:
    """Integrate a power trace to energy with the trapezoidal rule.

    Timestamps must be strictly increasing. A single-sample trace carries
    no interval and integrates to zero.
    """
    if len(trace) == 0:
        raise ValueError("cannot integrate an empty power trace")
    if len(trace) == 1:
        return EnergyRecord(kwh=0.0, duration_s=0.0, source="measured-trace")
    joules = 0.0
    for prev, cur in zip(trace, trace[1:]):
        dt = cur.timestamp_s - prev.timestamp_s
        if dt <= 0.0:
            raise ValueError(
                f"timestamps must be strictly increasing, got {prev.timestamp_s} then {cur.timestamp_s}"
            )
        joules += dt * (prev.total_w + cur.total_w) / 2.0
    duration = trace[-1].timestamp_s - trace[0].timestamp_s
    return EnergyRecord(kwh=joules / JOULES_PER_KWH, duration_s=duration, source="measured-trace")


def compute_emissions(
    energy: EnergyRecord, intensity: CarbonIntensity, pue: float = 1.0
) -> EmissionRecord:
    """Convert energy to grams of CO2: kWh * intensity * PUE.

    PUE is applied exactly once, here. Values below 1.0 are physically
    meaningless and rejected.
    """
    if pue < 1.0:
        raise ValueError(f"pue must be >= 1.0, got {pue}")
    grams = energy.kwh * intensity.grams_per_kwh * pue
    return EmissionRecord(
        grams_co2=grams,
        energy_kwh=energy.kwh,
        intensity_g_per_kwh=intensity.grams_per_kwh,
        pue=pue,
    )


def apportion_host_energy(
    host: EnergyRecord,
    nodes: Sequence[tuple[float, float]],
    alpha: float = 0.5,
) -> list[EnergyRecord]:
    """Split host-level energy across nodes by resource reservation.

    ``nodes`` is a sequence of (cpu_quota, mem_gb) pairs. Each node's share
    is alpha * cpu_i / sum(cpu) + (1 - alpha) * mem_i / sum(mem). When total
    memory is zero the memory term is dropped and shares follow CPU alone.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if len(nodes) == 0:
        raise ValueError("cannot apportion energy to an empty node list")
    for cpu, mem in nodes:
        if cpu < 0.0 or mem < 0.0:
            raise ValueError(f"quotas must be >= 0, got cpu={cpu} mem={mem}")
    total_cpu = sum(cpu for cpu, _ in nodes)
    total_mem = sum(mem for _, mem in nodes)
    if total_cpu == 0.0:
        raise ValueError("total cpu quota is zero, nothing to apportion against")
    shares: list[float] = []
    for cpu, mem in nodes:
        cpu_share = cpu / total_cpu
        if total_mem > 0.0:
            share = alpha * cpu_share + (1.0 - alpha) * (mem / total_mem)
        else:
            share = cpu_share
        shares.append(share)
    return [
        EnergyRecord(kwh=host.kwh * share, duration_s=host.duration_s, source="apportioned")
        for share in shares
    ]


def estimate_task_energy(node_power_w: float, avg_time_ms: float) -> float:
    """Scoring-side per-task energy estimate.

    Watts times milliseconds over 3.6e6, by convention. The result feeds the
    carbon component of the selection score and nothing else; the simulator
    accounts real energy through ``PHYSICAL_WMS_PER_KWH``.
    """
    if node_power_w < 0.0:
        raise ValueError(f"node_power_w must be >= 0, got {node_power_w}")
    if avg_time_ms < 0.0:
        raise ValueError(f"avg_time_ms must be >= 0, got {avg_time_ms}")
    return node_power_w * avg_time_ms / SCORING_WMS_PER_KWH


def node_power(cpus: float, mem_gb: float, model: PowerModel) -> float:
    """Average node draw in watts for a given reservation."""
    if cpus < 0.0 or mem_gb < 0.0:
        raise ValueError(f"reservation must be >= 0, got cpus={cpus} mem_gb={mem_gb}")
    return model.base_w + model.per_cpu_w * cpus + model.ram_w_per_gb * mem_gb
