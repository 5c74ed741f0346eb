"""Error-curve rendering from aggregated sweep CSVs.

Produces a standalone SVG with one curve per method and std-error bars.
Output bytes are a pure function of the input CSV: the SVG hash salt is
pinned and no timestamp metadata is written.
"""
from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .core import SchemaError
from .sweep import AGG_COLUMNS

_STYLES = {"replay": "o-", "bred": "s-", "bred_nojitter": "^--"}


def read_agg_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not set(AGG_COLUMNS) <= set(reader.fieldnames):
            raise SchemaError(
                f"expected columns {AGG_COLUMNS}, got {reader.fieldnames}")
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            try:
                rows.append({"method": raw["method"], "T": int(raw["T"]),
                             "mean_abs_error": float(raw["mean_abs_error"]),
                             "std_err": float(raw["std_err"])})
            except (TypeError, ValueError):
                raise SchemaError(f"line {lineno}: malformed row {raw}") from None
    if not rows:
        raise SchemaError("CSV has no data rows")
    return rows


def emit_plot(csv_path: str | Path, out_path: str | Path) -> None:
    """Render an aggregated sweep CSV to a deterministic SVG file."""
    out_path = Path(out_path)
    if out_path.suffix.lower() != ".svg":
        raise ValueError(f"output must be an .svg path, got {out_path.name!r}")
    rows = read_agg_csv(csv_path)
    methods = sorted({r["method"] for r in rows})
    plt.rcParams["svg.hashsalt"] = "banditeval"
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for method in methods:
        pts = sorted((r["T"], r["mean_abs_error"], r["std_err"])
                     for r in rows if r["method"] == method)
        ts = [p[0] for p in pts]
        ax.errorbar(ts, [p[1] for p in pts], yerr=[p[2] for p in pts],
                    fmt=_STYLES.get(method, "d-"), capsize=3, label=method)
    ax.set_xlabel("dataset size T")
    ax.set_ylabel("mean absolute error")
    ax.set_xscale("log")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
