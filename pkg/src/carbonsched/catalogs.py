"""Bundled and file-based catalogs: model descriptors and grid intensities."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from pathlib import Path

import yaml

from .partitioning import LayerDescriptor, ModelDescriptor

__all__ = [
    "load_model_catalog",
    "bundled_model_catalog",
    "load_region_catalog",
    "bundled_region_catalog",
]

_LAYER_FIELDS = {
    "name",
    "kind",
    "kernel_h",
    "kernel_w",
    "in_channels",
    "out_channels",
    "in_features",
    "out_features",
    "params_count",
    "output_activation_size",
}


def _parse_model_catalog(raw: object, origin: str) -> dict[str, ModelDescriptor]:
    if not isinstance(raw, dict) or "models" not in raw:
        raise ValueError(f"{origin}: expected a mapping with a 'models' list")
    catalog: dict[str, ModelDescriptor] = {}
    for entry in raw["models"]:
        if not isinstance(entry, dict):
            raise ValueError(f"{origin}: model entries must be mappings")
        model_id = entry.get("model_id")
        if not model_id:
            raise ValueError(f"{origin}: model entry without model_id")
        if model_id in catalog:
            raise ValueError(f"{origin}: duplicate model_id {model_id!r}")
        layers = []
        for li, layer in enumerate(entry.get("layers", [])):
            unknown = set(layer) - _LAYER_FIELDS
            if unknown:
                raise ValueError(
                    f"{origin}: model {model_id!r} layer {li}: unknown fields {sorted(unknown)}"
                )
            layers.append(LayerDescriptor(**layer))
        catalog[model_id] = ModelDescriptor(
            model_id=model_id,
            layers=tuple(layers),
            base_latency_ms=float(entry.get("base_latency_ms", 0.0)),
            synthetic=bool(entry.get("synthetic", True)),
        )
    if not catalog:
        raise ValueError(f"{origin}: catalog declares no models")
    return catalog


def load_model_catalog(path: str | Path) -> dict[str, ModelDescriptor]:
    path = Path(path)
    with path.open("r", encoding="utf-8") as handle:
        raw = yaml.safe_load(handle)
    return _parse_model_catalog(raw, str(path))


@lru_cache(maxsize=1)
def bundled_model_catalog() -> dict[str, ModelDescriptor]:
    text = resources.files("carbonsched.data").joinpath("models.yaml").read_text(encoding="utf-8")
    return _parse_model_catalog(yaml.safe_load(text), "bundled models.yaml")


def _parse_region_catalog(raw: object, origin: str) -> dict[str, float]:
    if not isinstance(raw, dict) or "regions" not in raw:
        raise ValueError(f"{origin}: expected a mapping with a 'regions' list")
    catalog: dict[str, float] = {}
    for entry in raw["regions"]:
        label = entry.get("region_label") if isinstance(entry, dict) else None
        if not label:
            raise ValueError(f"{origin}: region entry without region_label")
        if label in catalog:
            raise ValueError(f"{origin}: duplicate region_label {label!r}")
        grams = float(entry.get("grams_per_kwh", 0.0))
        if grams <= 0.0:
            raise ValueError(f"{origin}: region {label!r}: grams_per_kwh must be > 0")
        catalog[label] = grams
    if not catalog:
        raise ValueError(f"{origin}: catalog declares no regions")
    return catalog


def load_region_catalog(path: str | Path) -> dict[str, float]:
    path = Path(path)
    with path.open("r", encoding="utf-8") as handle:
        raw = yaml.safe_load(handle)
    return _parse_region_catalog(raw, str(path))


@lru_cache(maxsize=1)
def bundled_region_catalog() -> dict[str, float]:
    text = resources.files("carbonsched.data").joinpath("regions.yaml").read_text(encoding="utf-8")
    return _parse_region_catalog(yaml.safe_load(text), "bundled regions.yaml")
