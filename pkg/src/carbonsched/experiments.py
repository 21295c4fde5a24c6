"""Experiment drivers: policy comparison and carbon-weight sweep.

Reports are plain dicts with two layers: ``results``/``series`` hold full
precision floats for downstream tooling, ``tables`` hold display-rounded
values that every output format renders identically.
"""

from __future__ import annotations

from . import __version__
from .config import (
    ExperimentConfig,
    build_baselines,
    build_filters,
    build_modes,
    build_nodes,
    build_workload,
    config_digest,
    resolve_models,
)
from .scoring import ScoreWeights
from .simulation import Baseline, Mode, SimResult, carbon_reduction, run_workload

# Non-carbon weight proportions used when sweeping w_c: the performance
# preset's resource, load, performance, and balance shares.
SWEEP_BASE_WEIGHTS = (0.25, 0.25, 0.30, 0.15)


def sweep_weights(w_c: float, redistribution: str = "proportional") -> ScoreWeights:
    """Weights with the carbon term pinned to w_c and the rest rescaled."""
    if not 0.0 <= w_c <= 1.0:
        raise ValueError(f"w_c must be in [0, 1], got {w_c}")
    remainder = 1.0 - w_c
    if redistribution == "uniform":
        parts = [remainder / 4.0] * 4
    elif redistribution == "proportional":
        base_sum = sum(SWEEP_BASE_WEIGHTS)
        parts = [remainder * b / base_sum for b in SWEEP_BASE_WEIGHTS]
    else:
        raise ValueError(f"unknown redistribution {redistribution!r}")
    return ScoreWeights(w_r=parts[0], w_l=parts[1], w_p=parts[2], w_b=parts[3], w_c=w_c)


def sweep_grid(step: float) -> list[float]:
    if not 0.0 < step <= 1.0:
        raise ValueError(f"step must be in (0, 1], got {step}")
    values = []
    i = 0
    while True:
        v = round(i * step, 10)
        if v > 1.0:
            break
        values.append(v)
        i += 1
    if values[-1] < 1.0:
        values.append(1.0)
    return values


def _disp(value: float, spec: str) -> float:
    # Round through the display string so JSON, CSV, and Markdown carry
    # the exact same number for table cells.
    return float(f"{value:{spec}}")


def _result_row(result: SimResult, reduction: float | None) -> dict:
    return {
        "model_id": result.model_id,
        "policy": result.policy,
        "completed": result.completed,
        "rejected": result.rejected,
        "mean_latency_ms": result.mean_latency_ms,
        "throughput_rps": result.throughput_rps,
        "total_energy_kwh": result.total_energy_kwh,
        "total_gco2": result.total_gco2,
        "gco2_per_inference": result.gco2_per_inference,
        "carbon_efficiency": result.carbon_efficiency,
        "reduction_vs_monolithic_pct": reduction,
        "node_usage_pct": dict(result.node_usage_pct),
        "virtual_makespan_ms": result.virtual_makespan_ms,
    }


def _overhead_entry(result: SimResult) -> dict:
    samples = list(result.overhead_samples_ms)
    return {
        "samples_ms": samples,
        "count": len(samples),
        "mean_ms": sum(samples) / len(samples) if samples else None,
        "max_ms": max(samples) if samples else None,
    }


def run_compare(cfg: ExperimentConfig) -> tuple[dict, dict]:
    """Run every baseline and mode against every configured model."""
    nodes = build_nodes(cfg)
    models = resolve_models(cfg)
    filters = build_filters(cfg)
    baselines = build_baselines(cfg)
    modes = build_modes(cfg)

    rows = []
    overhead_policies = {}
    for model in models:
        workload = build_workload(cfg, model.model_id)
        results: list[SimResult] = []
        for baseline in baselines:
            results.append(
                run_workload(nodes, model, workload, baseline, filters, cfg.overhead_frac, cfg.pue)
            )
        for mode in modes:
            results.append(run_workload(nodes, model, workload, mode, filters, cfg.overhead_frac, cfg.pue))

        mono = next(
            (r for r, b in zip(results, baselines) if isinstance(b, Baseline) and b.kind == "monolithic"),
            None,
        )
        for result in results:
            reduction = None
            if mono is not None and mono.gco2_per_inference > 0:
                reduction = carbon_reduction(result.gco2_per_inference, mono.gco2_per_inference)
            rows.append(_result_row(result, reduction))
            if result.overhead_samples_ms:
                overhead_policies[f"{model.model_id}/{result.policy}"] = _overhead_entry(result)

    node_ids = [spec.node_id for spec in nodes]
    comparison_rows = []
    usage_rows = []
    for row in rows:
        reduction = row["reduction_vs_monolithic_pct"]
        comparison_rows.append(
            [
                row["model_id"],
                row["policy"],
                _disp(row["mean_latency_ms"], ".2f"),
                _disp(row["throughput_rps"], ".2f"),
                _disp(row["gco2_per_inference"], ".6f"),
                _disp(row["carbon_efficiency"], ".1f"),
                None if reduction is None else _disp(reduction, ".1f"),
            ]
        )
        usage_rows.append(
            [row["model_id"], row["policy"]]
            + [_disp(row["node_usage_pct"][node_id], ".1f") for node_id in node_ids]
        )

    digest = config_digest(cfg)
    report = {
        "schema_version": cfg.schema_version,
        "kind": "compare",
        "generated_by": f"carbonsched {__version__}",
        "config_digest": digest,
        "seed": cfg.workload.seed,
        "node_ids": node_ids,
        "results": rows,
        "tables": {
            "comparison": {
                "columns": [
                    "model",
                    "policy",
                    "mean_latency_ms",
                    "throughput_rps",
                    "gco2_per_inference",
                    "carbon_efficiency",
                    "reduction_vs_monolithic_pct",
                ],
                "rows": comparison_rows,
            },
            "node_usage_pct": {
                "columns": ["model", "policy"] + node_ids,
                "rows": usage_rows,
            },
        },
    }
    overhead = {
        "schema_version": cfg.schema_version,
        "kind": "overhead",
        "config_digest": digest,
        "policies": overhead_policies,
    }
    return report, overhead


def find_transition(series: list[dict], lowest_intensity_node: str) -> float | None:
    """Smallest w_c from which the majority node stays the cleanest node."""
    transition = None
    for point in reversed(series):
        if point["majority_node"] == lowest_intensity_node:
            transition = point["w_c"]
        else:
            break
    return transition


def run_sweep(cfg: ExperimentConfig, step_override: float | None = None) -> tuple[dict, dict]:
    """Sweep the carbon weight over a grid and watch routing flip."""
    nodes = build_nodes(cfg)
    model = resolve_models(cfg)[0]
    filters = build_filters(cfg)
    workload = build_workload(cfg, model.model_id)

    if step_override is not None:
        values = sweep_grid(step_override)
    elif cfg.sweep.w_c_values is not None:
        values = sorted(cfg.sweep.w_c_values)
    else:
        values = sweep_grid(cfg.sweep.w_c_step)

    lowest = min(nodes, key=lambda spec: spec.intensity.grams_per_kwh).node_id

    series = []
    overhead_policies = {}
    for w_c in values:
        weights = sweep_weights(w_c, cfg.sweep.redistribution)
        mode = Mode(name=f"w_c={w_c:.2f}", weights=weights)
        result = run_workload(nodes, model, workload, mode, filters, cfg.overhead_frac, cfg.pue)
        majority = max(result.node_usage_pct, key=lambda node_id: result.node_usage_pct[node_id])
        series.append(
            {
                "w_c": w_c,
                "weights": {
                    "w_r": weights.w_r,
                    "w_l": weights.w_l,
                    "w_p": weights.w_p,
                    "w_b": weights.w_b,
                    "w_c": weights.w_c,
                },
                "majority_node": majority,
                "node_usage_pct": dict(result.node_usage_pct),
                "mean_latency_ms": result.mean_latency_ms,
                "total_gco2": result.total_gco2,
                "gco2_per_inference": result.gco2_per_inference,
            }
        )
        if result.overhead_samples_ms:
            overhead_policies[f"{model.model_id}/{result.policy}"] = _overhead_entry(result)

    transition = find_transition(series, lowest)

    node_ids = [spec.node_id for spec in nodes]
    sweep_rows = [
        [
            _disp(point["w_c"], ".2f"),
            point["majority_node"],
            _disp(point["gco2_per_inference"], ".6f"),
            _disp(point["mean_latency_ms"], ".2f"),
        ]
        + [_disp(point["node_usage_pct"][node_id], ".1f") for node_id in node_ids]
        for point in series
    ]

    digest = config_digest(cfg)
    report = {
        "schema_version": cfg.schema_version,
        "kind": "sweep",
        "generated_by": f"carbonsched {__version__}",
        "config_digest": digest,
        "seed": cfg.workload.seed,
        "model_id": model.model_id,
        "node_ids": node_ids,
        "redistribution": cfg.sweep.redistribution,
        "lowest_intensity_node": lowest,
        "transition_w_c": transition,
        "series": series,
        "tables": {
            "sweep": {
                "columns": ["w_c", "majority_node", "gco2_per_inference", "mean_latency_ms"] + node_ids,
                "rows": sweep_rows,
            },
        },
    }
    overhead = {
        "schema_version": cfg.schema_version,
        "kind": "overhead",
        "config_digest": digest,
        "policies": overhead_policies,
    }
    return report, overhead
