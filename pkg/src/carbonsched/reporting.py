"""Report serialization. One report dict, three formats, identical numbers.

JSON is the full artifact. CSV flattens the full-precision rows. Markdown
renders the display tables. Values shown in more than one format are written
from the same in-memory object, so equal cells are byte-equal text.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

REPORT_STEM = "report"
OVERHEAD_FILENAME = "overhead.json"


def _cell_text(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _rows_key(report: dict) -> str | None:
    for key in ("results", "series"):
        if key in report:
            return key
    return None


def _flatten_row(row: dict) -> dict:
    flat = {}
    for key, value in row.items():
        if isinstance(value, dict):
            for sub_key, sub_value in value.items():
                flat[f"{key}.{sub_key}"] = sub_value
        else:
            flat[key] = value
    return flat


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def render_csv(report: dict) -> str:
    key = _rows_key(report)
    rows = report.get(key, []) if key else []
    flat_rows = [_flatten_row(row) for row in rows]
    columns: list[str] = []
    for row in flat_rows:
        for column in row:
            if column not in columns:
                columns.append(column)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in flat_rows:
        writer.writerow([_cell_text(row.get(column)) for column in columns])
    return buf.getvalue()


def render_md(report: dict) -> str:
    lines = [f"# {report.get('kind', 'report')} report", ""]
    meta = [
        ("generated_by", report.get("generated_by")),
        ("config_digest", report.get("config_digest")),
        ("seed", report.get("seed")),
        ("model_id", report.get("model_id")),
        ("lowest_intensity_node", report.get("lowest_intensity_node")),
        ("transition_w_c", report.get("transition_w_c")),
    ]
    for label, value in meta:
        if value is not None:
            lines.append(f"- {label}: {_cell_text(value)}")
    lines.append("")
    for name, table in report.get("tables", {}).items():
        lines.append(f"## {name}")
        lines.append("")
        columns = table["columns"]
        lines.append("| " + " | ".join(columns) + " |")
        lines.append("|" + "|".join(" --- " for _ in columns) + "|")
        for row in table["rows"]:
            lines.append("| " + " | ".join(_cell_text(cell) for cell in row) + " |")
        lines.append("")
    return "\n".join(lines).rstrip("\n") + "\n"


_RENDERERS = {"json": render_json, "csv": render_csv, "md": render_md}


def emit_report(
    report: dict,
    out_dir: str | Path,
    formats: tuple[str, ...] | list[str] = ("json", "csv", "md"),
    stem: str = REPORT_STEM,
) -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = {}
    for fmt in formats:
        if fmt not in _RENDERERS:
            raise ValueError(f"unknown report format {fmt!r}, expected one of {sorted(_RENDERERS)}")
        path = out_dir / f"{stem}.{fmt}"
        path.write_text(_RENDERERS[fmt](report))
        written[fmt] = path
    return written


def emit_overhead(overhead: dict, out_dir: str | Path, filename: str = OVERHEAD_FILENAME) -> Path:
    """Wall-clock numbers stay out of the deterministic report files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / filename
    path.write_text(json.dumps(overhead, indent=2) + "\n")
    return path
