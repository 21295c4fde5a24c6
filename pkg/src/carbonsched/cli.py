"""Command line client for the scheduling engine.

Runs experiments in process by default. With --server it posts the same
payloads to a running service instead, so results are identical either way.

Exit codes: 0 success, 2 configuration problem, 3 runtime or server
failure, 4 filesystem problem.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import httpx
import yaml

from . import __version__
from .catalogs import bundled_model_catalog
from .config import ConfigError, config_digest, default_config, load_config, parse_config
from .experiments import run_compare, run_sweep
from .partitioning import LayerDescriptor, partition_model
from .reporting import emit_overhead, emit_report

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_IO = 4


def _make_client(server: str) -> httpx.Client:
    return httpx.Client(base_url=server, timeout=60.0)


def _post(server: str, path: str, payload: dict) -> dict:
    with _make_client(server) as client:
        try:
            response = client.post(path, json=payload)
        except httpx.HTTPError as err:
            raise RuntimeError(f"server {server} unreachable: {err}") from err
    if response.status_code == 422:
        detail = response.json().get("detail", response.text)
        raise ConfigError(f"server rejected request: {detail}")
    if response.status_code != 200:
        raise RuntimeError(f"server returned {response.status_code}: {response.text}")
    return response.json()


def _load_config_data(args: argparse.Namespace) -> dict:
    if args.config is None:
        data = default_config().model_dump(mode="json")
    else:
        path = Path(args.config)
        try:
            text = path.read_text()
        except OSError as err:
            raise ConfigError(f"{path}: {err}") from err
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as err:
            raise ConfigError(f"{path}: invalid YAML: {err}") from err
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
    if getattr(args, "seed", None) is not None:
        data.setdefault("workload", {})["seed"] = args.seed
    if getattr(args, "sweep_step", None) is not None:
        sweep = data.setdefault("sweep", {})
        sweep["w_c_step"] = args.sweep_step
        sweep["w_c_values"] = None
    return data


def _formats(args: argparse.Namespace, data: dict) -> list[str]:
    if args.format:
        return [fmt.strip() for fmt in args.format.split(",") if fmt.strip()]
    return data.get("output", {}).get("formats", ["json", "csv", "md"])


def _write_outputs(report: dict, overhead: dict, args: argparse.Namespace, data: dict) -> None:
    out_dir = Path(args.out)
    written = emit_report(report, out_dir, formats=_formats(args, data))
    for path in written.values():
        print(f"wrote {path}")
    overhead_path = emit_overhead(overhead, out_dir)
    print(f"wrote {overhead_path}")


def _cmd_compare(args: argparse.Namespace) -> int:
    data = _load_config_data(args)
    if args.server:
        body = _post(args.server, "/compare", data)
        report, overhead = body["report"], body["overhead"]
    else:
        cfg = parse_config(data, origin=args.config or "<defaults>")
        report, overhead = run_compare(cfg)
    _write_outputs(report, overhead, args, data)
    print()
    print(f"{'policy':<14} {'gCO2/inf':>10} {'vs monolithic':>14}")
    for row in report["results"]:
        reduction = row["reduction_vs_monolithic_pct"]
        suffix = "" if reduction is None else f"{reduction:>+13.1f}%"
        print(f"{row['policy']:<14} {row['gco2_per_inference']:>10.6f} {suffix:>14}")
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    data = _load_config_data(args)
    if args.server:
        body = _post(args.server, "/sweep", data)
        report, overhead = body["report"], body["overhead"]
    else:
        cfg = parse_config(data, origin=args.config or "<defaults>")
        report, overhead = run_sweep(cfg)
    _write_outputs(report, overhead, args, data)
    print()
    transition = report["transition_w_c"]
    lowest = report["lowest_intensity_node"]
    if transition is None:
        print(f"majority never settled on {lowest}")
    else:
        print(f"majority settles on {lowest} from w_c={transition:g}")
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    data = _load_config_data(args)
    if args.server:
        body = _post(args.server, "/validate", data)
        if body["valid"]:
            print(f"valid (digest {body['config_digest']})")
            return EXIT_OK
        for error in body["errors"]:
            print(error, file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = parse_config(data, origin=args.config or "<defaults>")
    except ConfigError as err:
        print(err, file=sys.stderr)
        return EXIT_CONFIG
    print(f"valid (digest {config_digest(cfg)})")
    return EXIT_OK


def _parse_capacities(text: str) -> list[float]:
    try:
        values = [float(piece) for piece in text.split(",") if piece.strip()]
    except ValueError as err:
        raise ConfigError(f"bad --capacities value: {err}") from err
    if not values:
        raise ConfigError("--capacities must list at least one positive number")
    return values


def _load_layers(path: str) -> list[LayerDescriptor]:
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except OSError as err:
        raise ConfigError(f"{path}: {err}") from err
    except yaml.YAMLError as err:
        raise ConfigError(f"{path}: invalid YAML: {err}") from err
    if not isinstance(raw, list):
        raise ConfigError(f"{path}: expected a list of layer mappings")
    try:
        return [LayerDescriptor(**entry) for entry in raw]
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{path}: {err}") from err


def _cmd_partition(args: argparse.Namespace) -> int:
    capacities = _parse_capacities(args.capacities)
    node_ids = [piece.strip() for piece in args.node_ids.split(",")] if args.node_ids else None

    if args.server:
        payload: dict = {"capacities": capacities, "node_ids": node_ids}
        if args.model:
            payload["model_id"] = args.model
        else:
            payload["layers"] = [
                {k: v for k, v in layer.__dict__.items() if v is not None}
                for layer in _load_layers(args.layers)
            ]
        body = _post(args.server, "/partition", payload)
        boundaries = body["boundaries"]
        bottleneck = body["bottleneck"]
        segments = body["segments"]
        total_cut = body["total_cut_activation"]
    else:
        if args.model:
            catalog = bundled_model_catalog()
            if args.model not in catalog:
                raise ConfigError(f"unknown model {args.model!r}; catalog has {sorted(catalog)}")
            source = catalog[args.model]
        else:
            source = _load_layers(args.layers)
        try:
            plan = partition_model(source, capacities, node_ids)
        except ValueError as err:
            raise ConfigError(str(err)) from err
        boundaries = list(plan.boundaries)
        bottleneck = plan.bottleneck
        total_cut = plan.total_cut_activation
        segments = [
            {
                "start": s.start,
                "end": s.end,
                "node_id": s.node_id,
                "cost": s.cost,
                "cut_activation_size": s.cut_activation_size,
            }
            for s in plan.segments
        ]

    if args.json:
        print(
            json.dumps(
                {
                    "model_id": args.model,
                    "boundaries": boundaries,
                    "bottleneck": bottleneck,
                    "total_cut_activation": total_cut,
                    "segments": segments,
                },
                indent=2,
            )
        )
        return EXIT_OK

    for segment in segments:
        print(
            f"layers [{segment['start']}, {segment['end']}) -> {segment['node_id']} "
            f"(cost {segment['cost']:g}, cut {segment['cut_activation_size']:g})"
        )
    print(f"bottleneck {bottleneck:g}, boundaries {boundaries}, total cut {total_cut:g}")
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carbonsched",
        description="Carbon-aware scheduling experiments for edge inference.",
    )
    parser.add_argument("--version", action="version", version=f"carbonsched {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, with_outputs: bool = True) -> None:
        p.add_argument("--config", help="experiment config file (YAML or JSON); defaults to the built-in testbed")
        p.add_argument("--server", help="service base URL; omit to run in process")
        if with_outputs:
            p.add_argument("--out", default="reports", help="output directory (default: reports)")
            p.add_argument("--format", help="comma separated output formats: json,csv,md")
            p.add_argument("--seed", type=int, help="override workload seed")

    p_compare = sub.add_parser("compare", help="run baselines and modes, write a comparison report")
    add_common(p_compare)
    p_compare.set_defaults(func=_cmd_compare)

    p_sweep = sub.add_parser("sweep", help="sweep the carbon weight, write a sweep report")
    add_common(p_sweep)
    p_sweep.add_argument("--sweep-step", type=float, help="override the w_c grid step")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_validate = sub.add_parser("validate", help="validate a config and print its digest")
    add_common(p_validate, with_outputs=False)
    p_validate.set_defaults(func=_cmd_validate)

    p_partition = sub.add_parser("partition", help="split a model across capacity-weighted nodes")
    group = p_partition.add_mutually_exclusive_group(required=True)
    group.add_argument("--model", help="bundled model id")
    group.add_argument("--layers", help="YAML file with a list of layer mappings")
    p_partition.add_argument("--capacities", required=True, help="comma separated node capacities")
    p_partition.add_argument("--node-ids", help="comma separated node names, one per capacity")
    p_partition.add_argument("--json", action="store_true", help="print the plan as JSON")
    p_partition.add_argument("--server", help="service base URL; omit to run in process")
    p_partition.set_defaults(func=_cmd_partition)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(err, file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(err, file=sys.stderr)
        return EXIT_IO
    except (RuntimeError, ValueError) as err:
        print(err, file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
