"""Report artifacts: CSV exports and an SVG heatmap of the accuracy grid.

All CSVs are comma-separated UTF-8 with a header row; floats print with
6 significant digits. The heatmap is a plain T x T grid of monochrome
cells, darkness proportional to accuracy, rows ordered by training step
and columns by evaluated domain.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from streamcl.evaluation import ResultMatrix, timeline_accuracy, timeline_accuracy_all

_CELL = 48
_MARGIN_LEFT = 132
_MARGIN_TOP = 96
_LABEL_GAP = 8


def format_float(value: float) -> str:
    return f"{value:.6g}"


def write_result_csv(result: ResultMatrix, path: Path) -> None:
    """Accuracy grid as CSV: header = domain tags in stream order, one row per step."""
    lines = [",".join(result.domain_order)]
    for row in result.values[: result.rows_written]:
        lines.append(",".join(format_float(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_result_csv(path: Path) -> ResultMatrix:
    lines = [line for line in path.read_text(encoding="utf-8").splitlines() if line]
    if not lines:
        raise ValueError(f"{path}: empty result file")
    tags = lines[0].split(",")
    result = ResultMatrix(domain_order=tags)
    for line in lines[1:]:
        result.write_row(np.array([float(v) for v in line.split(",")]))
    return result


def render_heatmap_svg(values: np.ndarray, tags: list[str], path: Path) -> None:
    """Write the grid as inline SVG: one rect per cell, darker = more accurate."""
    values = np.asarray(values, dtype=np.float64)
    size = len(tags)
    if values.shape != (size, size):
        raise ValueError(f"matrix shape {values.shape} does not match {size} tags")
    width = _MARGIN_LEFT + size * _CELL + _LABEL_GAP
    height = _MARGIN_TOP + size * _CELL + _LABEL_GAP
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="monospace" font-size="12">',
        f'<text x="{_MARGIN_LEFT}" y="20">rows: after training step / columns: evaluated domain</text>',
    ]
    for j, tag in enumerate(tags):
        x = _MARGIN_LEFT + j * _CELL + _CELL // 2
        parts.append(
            f'<text x="{x}" y="{_MARGIN_TOP - _LABEL_GAP}" text-anchor="end" '
            f'transform="rotate(-45 {x} {_MARGIN_TOP - _LABEL_GAP})">{tag}</text>'
        )
    for i, tag in enumerate(tags):
        y = _MARGIN_TOP + i * _CELL + _CELL // 2 + 4
        parts.append(
            f'<text x="{_MARGIN_LEFT - _LABEL_GAP}" y="{y}" text-anchor="end">{i + 1}: {tag}</text>'
        )
        for j in range(size):
            accuracy = min(max(float(values[i, j]), 0.0), 1.0)
            shade = int(round(255 * (1.0 - accuracy)))
            x = _MARGIN_LEFT + j * _CELL
            y_cell = _MARGIN_TOP + i * _CELL
            parts.append(
                f'<rect x="{x}" y="{y_cell}" width="{_CELL}" height="{_CELL}" '
                f'fill="rgb({shade},{shade},{shade})" stroke="gray">'
                f"<title>{format_float(values[i, j])}</title></rect>"
            )
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")


def _order_string(order: tuple[int, ...]) -> str:
    return "-".join(str(i) for i in order)


def write_metrics_csv(runs, path: Path) -> None:
    lines = ["strategy,ttokens,order,seed,acc,bwt"]
    for run in runs:
        lines.append(
            ",".join(
                [
                    run.strategy.kind.value,
                    str(int(run.strategy.ttokens)),
                    _order_string(run.order),
                    str(run.seed),
                    format_float(run.metrics["acc"]),
                    format_float(run.metrics["bwt"]),
                ]
            )
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_timeline_csv(runs, path: Path) -> None:
    """Per-step mean accuracy, both over seen domains only and over all domains."""
    lines = ["run,order,seed,step,acc_seen,acc_all"]
    for index, run in enumerate(runs):
        seen = timeline_accuracy(run.result)
        full = timeline_accuracy_all(run.result)
        for step in range(len(seen)):
            lines.append(
                ",".join(
                    [
                        str(index),
                        _order_string(run.order),
                        str(run.seed),
                        str(step + 1),
                        format_float(seen[step]),
                        format_float(full[step]),
                    ]
                )
            )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_log_csv(logs: list[dict], path: Path) -> None:
    columns = [
        "step",
        "domain",
        "train_size",
        "memory_size",
        "memory_loss_before",
        "memory_loss_after",
        "timeline_accuracy",
    ]
    lines = [",".join(columns)]
    for record in logs:
        cells = []
        for column in columns:
            value = record.get(column, "")
            cells.append(format_float(value) if isinstance(value, float) else str(value))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def emit_reports(runs, summary: dict, output_dir: str | Path, failed: bool = False) -> None:
    """Write all artifacts for a batch of runs.

    Layout: ``runs/run-<k>/`` holds each run's R.csv, log.csv, and
    run.json metadata; the top level holds metrics.csv, timeline.csv,
    heatmap.svg (tag-aligned mean grid), and summary.json. A FAILED
    marker file is written when flushing partial results after an error.
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    for index, run in enumerate(runs):
        run_dir = output_dir / "runs" / f"run-{index:02d}"
        run_dir.mkdir(parents=True, exist_ok=True)
        write_result_csv(run.result, run_dir / "R.csv")
        write_log_csv(run.logs, run_dir / "log.csv")
        (run_dir / "run.json").write_text(
            json.dumps(
                {
                    "strategy": run.strategy.kind.value,
                    "ttokens": run.strategy.ttokens,
                    "order": list(run.order),
                    "seed": run.seed,
                    "domain_order": run.result.domain_order,
                    "metrics": run.metrics,
                },
                indent=2,
                sort_keys=True,
            )
            + "\n",
            encoding="utf-8",
        )
    if runs:
        write_metrics_csv(runs, output_dir / "metrics.csv")
        write_timeline_csv(runs, output_dir / "timeline.csv")
    if summary:
        render_heatmap_svg(
            summary["mean_matrix"], list(summary["aligned_tags"]), output_dir / "heatmap.svg"
        )
        serializable = {
            key: value
            for key, value in summary.items()
            if key not in ("mean_matrix", "aligned_tags")
        }
        serializable["aligned_tags"] = list(summary["aligned_tags"])
        serializable["mean_matrix"] = [
            [float(v) for v in row] for row in summary["mean_matrix"]
        ]
        (output_dir / "summary.json").write_text(
            json.dumps(serializable, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    if failed:
        (output_dir / "FAILED").write_text(
            "run batch aborted before completion; artifacts are partial\n", encoding="utf-8"
        )
