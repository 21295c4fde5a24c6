"""HTTP service exposing the scheduler, simulator, and partitioner.

Every experiment endpoint takes the same configuration document the CLI
reads from disk, so a request body and a config file are interchangeable.
"""

from __future__ import annotations

from fastapi import Body, FastAPI, HTTPException

from .. import __version__
from ..catalogs import bundled_model_catalog, bundled_region_catalog
from ..config import ConfigError, config_digest, node_spec_from_config, parse_config
from ..experiments import run_compare, run_sweep
from ..partitioning import LayerDescriptor, partition_model
from ..scoring import (
    MODE_PRESETS,
    NodeStats,
    ScoreWeights,
    SelectionFilters,
    TaskRequest,
    has_sufficient_resources,
    score_node,
    select_node,
)
from .schemas import (
    CandidateOut,
    HealthResponse,
    ModelInfo,
    PartitionRequest,
    PartitionResponse,
    ReportResponse,
    ScheduleRequest,
    ScheduleResponse,
    ScoresOut,
    SegmentOut,
    ValidateResponse,
)


def _resolve_weights(request: ScheduleRequest) -> ScoreWeights:
    if request.mode is not None:
        if request.mode not in MODE_PRESETS:
            raise HTTPException(422, f"unknown mode {request.mode!r}; known modes: {sorted(MODE_PRESETS)}")
        return MODE_PRESETS[request.mode]
    w = request.weights
    try:
        return ScoreWeights(w_r=w[0], w_l=w[1], w_p=w[2], w_b=w[3], w_c=w[4])
    except ValueError as err:
        raise HTTPException(422, str(err)) from err


def create_app() -> FastAPI:
    app = FastAPI(title="carbonsched", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.get("/catalog/models", response_model=list[ModelInfo])
    def catalog_models() -> list[ModelInfo]:
        return [
            ModelInfo(
                model_id=model.model_id,
                layer_count=len(model.layers),
                total_params=model.total_params,
                base_latency_ms=model.base_latency_ms,
                synthetic=model.synthetic,
            )
            for model in bundled_model_catalog().values()
        ]

    @app.get("/catalog/regions", response_model=dict[str, float])
    def catalog_regions() -> dict[str, float]:
        return dict(bundled_region_catalog())

    @app.get("/catalog/modes", response_model=dict[str, dict[str, float]])
    def catalog_modes() -> dict[str, dict[str, float]]:
        return {
            name: {
                "w_r": weights.w_r,
                "w_l": weights.w_l,
                "w_p": weights.w_p,
                "w_b": weights.w_b,
                "w_c": weights.w_c,
            }
            for name, weights in MODE_PRESETS.items()
        }

    @app.post("/validate", response_model=ValidateResponse)
    def validate(payload: dict = Body(...)) -> ValidateResponse:
        try:
            cfg = parse_config(payload, origin="<request>")
        except ConfigError as err:
            return ValidateResponse(valid=False, errors=[str(err)])
        return ValidateResponse(valid=True, config_digest=config_digest(cfg))

    @app.post("/compare", response_model=ReportResponse)
    def compare(payload: dict = Body(...)) -> ReportResponse:
        try:
            cfg = parse_config(payload, origin="<request>")
        except ConfigError as err:
            raise HTTPException(422, str(err)) from err
        report, overhead = run_compare(cfg)
        return ReportResponse(report=report, overhead=overhead)

    @app.post("/sweep", response_model=ReportResponse)
    def sweep(payload: dict = Body(...)) -> ReportResponse:
        try:
            cfg = parse_config(payload, origin="<request>")
        except ConfigError as err:
            raise HTTPException(422, str(err)) from err
        report, overhead = run_sweep(cfg)
        return ReportResponse(report=report, overhead=overhead)

    @app.post("/schedule", response_model=ScheduleResponse)
    def schedule(request: ScheduleRequest) -> ScheduleResponse:
        weights = _resolve_weights(request)
        try:
            specs = [node_spec_from_config(node, i) for i, node in enumerate(request.nodes)]
        except ValueError as err:
            raise HTTPException(422, str(err)) from err
        provided = request.stats or {}
        candidates = []
        for spec in specs:
            given = provided.get(spec.node_id)
            if given is None:
                stats = NodeStats(latency_ms=spec.probe_latency_ms)
            else:
                stats = NodeStats(**given.model_dump())
            candidates.append((spec, stats))
        task = TaskRequest(**request.task.model_dump())
        filters = SelectionFilters(**request.filters.model_dump())

        candidate_rows = []
        for spec, stats in candidates:
            eligible = (
                stats.load <= filters.load_max
                and stats.latency_ms <= filters.latency_threshold_ms
                and has_sufficient_resources(spec, stats, task)
            )
            total = score_node(spec, stats, task, weights).total if eligible else None
            candidate_rows.append(CandidateOut(node_id=spec.node_id, eligible=eligible, total=total))

        selection = select_node(task, candidates, weights, filters)
        if selection is None:
            return ScheduleResponse(selected_node=None, scores=None, candidates=candidate_rows)
        node_id, breakdown = selection
        scores = ScoresOut(
            s_r=breakdown.s_r,
            s_l=breakdown.s_l,
            s_p=breakdown.s_p,
            s_b=breakdown.s_b,
            s_c=breakdown.s_c,
            total=breakdown.total,
        )
        return ScheduleResponse(selected_node=node_id, scores=scores, candidates=candidate_rows)

    @app.post("/partition", response_model=PartitionResponse)
    def partition(request: PartitionRequest) -> PartitionResponse:
        if request.model_id is not None:
            catalog = bundled_model_catalog()
            if request.model_id not in catalog:
                raise HTTPException(
                    422, f"unknown model {request.model_id!r}; catalog has {sorted(catalog)}"
                )
            source = catalog[request.model_id]
        else:
            try:
                source = [LayerDescriptor(**layer.model_dump()) for layer in request.layers]
            except ValueError as err:
                raise HTTPException(422, str(err)) from err
        try:
            plan = partition_model(source, request.capacities, request.node_ids)
        except ValueError as err:
            raise HTTPException(422, str(err)) from err
        return PartitionResponse(
            model_id=request.model_id,
            boundaries=list(plan.boundaries),
            bottleneck=plan.bottleneck,
            total_cut_activation=plan.total_cut_activation,
            segments=[
                SegmentOut(
                    start=segment.start,
                    end=segment.end,
                    node_id=segment.node_id,
                    cost=segment.cost,
                    cut_activation_size=segment.cut_activation_size,
                )
                for segment in plan.segments
            ],
        )

    return app


app = create_app()
