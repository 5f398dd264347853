"""Render sweep-result CSVs into cost and success-ratio figures.

Input is the simulator's results CSV (fixed column contract).  Output is
one cost-vs-deadline chart per load level with one series per scheme,
one success-ratio chart, and a ``series.json`` sidecar carrying the exact
plotted data (the byte-stable artifact; PNG metadata is not).
"""

from __future__ import annotations

import csv
import json
import statistics
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

REQUIRED_COLUMNS = [
    "scheme",
    "load",
    "deadline_s",
    "seed",
    "submitted",
    "completed",
    "rejected",
    "missed",
    "success_ratio",
    "mean_cost_completed",
    "mean_cost_fig5_convention",
]

LINE_STYLES = ["-", "--", "-.", ":"]
MARKERS = ["o", "s", "^", "d"]


class SchemaError(ValueError):
    """The CSV does not match the sweep-results column contract."""


def load_rows(csv_path: str | Path) -> list[dict]:
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"missing required columns: {', '.join(missing)}")
        rows = list(reader)
    if not rows:
        raise SchemaError("no data rows")
    return rows


def build_series(rows: list[dict]) -> dict:
    """Plotted data, keyed load -> scheme -> sorted deadline series.

    Aggregate rows (seed == "agg") carry the line; the spread band is the
    sample standard deviation across the per-seed rows of each cell.
    """
    spread: dict[tuple, list] = {}
    agg: dict[tuple, dict] = {}
    for row in rows:
        key = (row["load"], row["scheme"], float(row["deadline_s"]))
        if row["seed"] == "agg":
            agg[key] = row
        else:
            spread.setdefault(key, []).append(row)
    if not agg:
        # A CSV without aggregate rows still renders: aggregate here.
        for key, members in spread.items():
            agg[key] = {
                "success_ratio": repr(statistics.mean(
                    float(m["success_ratio"]) for m in members)),
                "mean_cost_fig5_convention": repr(statistics.mean(
                    float(m["mean_cost_fig5_convention"]) for m in members)),
            }

    series: dict = {}
    for (load, scheme, deadline), row in sorted(agg.items()):
        members = spread.get((load, scheme, deadline), [])

        def std_of(column):
            values = [float(m[column]) for m in members]
            return statistics.stdev(values) if len(values) > 1 else 0.0

        bucket = series.setdefault(load, {}).setdefault(
            scheme,
            {"deadline_s": [], "cost": [], "cost_std": [],
             "success_ratio": [], "success_std": []},
        )
        bucket["deadline_s"].append(deadline)
        bucket["cost"].append(float(row["mean_cost_fig5_convention"]))
        bucket["cost_std"].append(std_of("mean_cost_fig5_convention"))
        bucket["success_ratio"].append(float(row["success_ratio"]))
        bucket["success_std"].append(std_of("success_ratio"))
    return series


def render(csv_path: str | Path, out_dir: str | Path) -> list[Path]:
    """Write the figures and the series sidecar; returns written paths."""
    rows = load_rows(csv_path)
    series = build_series(rows)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    for load, by_scheme in series.items():
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for i, (scheme, data) in enumerate(sorted(by_scheme.items())):
            ax.plot(
                data["deadline_s"], data["cost"],
                linestyle=LINE_STYLES[i % len(LINE_STYLES)],
                marker=MARKERS[i % len(MARKERS)],
                label=scheme,
            )
            lo = [c - s for c, s in zip(data["cost"], data["cost_std"])]
            hi = [c + s for c, s in zip(data["cost"], data["cost_std"])]
            ax.fill_between(data["deadline_s"], lo, hi, alpha=0.15)
        ax.set_xlabel("deadline (s)")
        ax.set_ylabel("mean completion cost (zero = unroutable)")
        ax.set_title(f"cost vs deadline, {load} load")
        ax.set_ylim(bottom=0)
        ax.legend()
        fig.tight_layout()
        path = out / f"cost_{load}.png"
        fig.savefig(path)
        plt.close(fig)
        written.append(path)

    loads = sorted(series)
    fig, axes = plt.subplots(1, len(loads), figsize=(5.0 * len(loads), 4.0),
                             squeeze=False)
    for ax, load in zip(axes[0], loads):
        for i, (scheme, data) in enumerate(sorted(series[load].items())):
            ax.plot(
                data["deadline_s"], data["success_ratio"],
                linestyle=LINE_STYLES[i % len(LINE_STYLES)],
                marker=MARKERS[i % len(MARKERS)],
                label=scheme,
            )
        ax.set_xlabel("deadline (s)")
        ax.set_ylabel("success ratio")
        ax.set_title(f"{load} load")
        ax.set_ylim(0, 1.05)
        ax.legend()
    fig.tight_layout()
    success_path = out / "success_ratio.png"
    fig.savefig(success_path)
    plt.close(fig)
    written.append(success_path)

    sidecar = out / "series.json"
    sidecar.write_text(json.dumps(series, sort_keys=True, indent=2) + "\n")
    written.append(sidecar)
    return written
