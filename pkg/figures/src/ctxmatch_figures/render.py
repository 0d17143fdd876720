"""Render a sweep CSV into a phase-diagram heatmap.

The input is the delimited output of a phase sweep: one row per grid
cell with columns x, y, the metrics, and a region label.  The heatmap
lives on the plane x = rho^2 n / log n, y = eta^2 d / log n with the
theoretical threshold lines overlaid as straight segments:

    exact_line         x + y = 4          solid
    almost_exact_line  x/4 + y/2 = 1      solid
    conjecture_line    x/4 + y/2 = 1      dashed (conjectured partial-
                                          recovery boundary)

Infeasible cells (metric nan) are drawn hatched, never interpolated.
Rendering is read-only over the CSV and byte-deterministic: the raster
backend is fixed and the software metadata chunk is stripped.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Rectangle

METRICS = ("exact_rate", "mean_overlap")
OVERLAYS = ("exact_line", "almost_exact_line", "conjecture_line")

_SEGMENTS = {
    "exact_line": ((0.0, 4.0), (4.0, 0.0)),
    "almost_exact_line": ((0.0, 2.0), (4.0, 0.0)),
    "conjecture_line": ((0.0, 2.0), (4.0, 0.0)),
}


class ColumnError(ValueError):
    """A required CSV column is missing."""


@dataclass(frozen=True)
class FigureSpec:
    input_csv: str
    metric: str
    output: str
    overlay: frozenset = frozenset(OVERLAYS)

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {', '.join(METRICS)}")
        unknown = set(self.overlay) - set(OVERLAYS)
        if unknown:
            raise ValueError(f"unknown overlay: {', '.join(sorted(unknown))}")


def overlay_segments(overlay) -> dict:
    """Axis-intercept segments ((x0, y0), (x1, y1)) of the requested lines."""
    return {name: _SEGMENTS[name] for name in OVERLAYS if name in overlay}


def load_cells(path: str, metric: str):
    """Read the CSV into (xs, ys, grid, regions).

    xs and ys are the sorted distinct coordinates; grid[i, j] is the
    metric at (xs[i], ys[j]) with nan for absent or infeasible cells,
    and regions carries the label column with the same layout.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in ("x", "y", metric, "region"):
            if col not in header:
                raise ColumnError(f"missing column '{col}' in {path}")
        rows = list(reader)
    if not rows:
        raise ColumnError(f"no data rows in {path}")
    xs = sorted({float(r["x"]) for r in rows})
    ys = sorted({float(r["y"]) for r in rows})
    xi = {v: k for k, v in enumerate(xs)}
    yi = {v: k for k, v in enumerate(ys)}
    grid = np.full((len(xs), len(ys)), np.nan)
    regions = np.full((len(xs), len(ys)), "", dtype=object)
    for r in rows:
        i, j = xi[float(r["x"])], yi[float(r["y"])]
        grid[i, j] = float(r[metric])
        regions[i, j] = r["region"]
    return np.array(xs), np.array(ys), grid, regions


def _edges(centers: np.ndarray) -> np.ndarray:
    """Cell boundaries from cell centers; a single cell gets width 1."""
    if centers.size == 1:
        c = centers[0]
        return np.array([c - 0.5, c + 0.5])
    mids = 0.5 * (centers[:-1] + centers[1:])
    first = centers[0] - (mids[0] - centers[0])
    last = centers[-1] + (centers[-1] - mids[-1])
    return np.concatenate([[first], mids, [last]])


def render_phase_diagram(spec: FigureSpec) -> str:
    """Write the heatmap to ``spec.output`` and return the path."""
    xs, ys, grid, _ = load_cells(spec.input_csv, spec.metric)
    xe, ye = _edges(xs), _edges(ys)

    fig, ax = plt.subplots(figsize=(6.4, 5.2))
    # hatched backdrop: masked (infeasible) cells let it show through
    ax.add_patch(Rectangle((xe[0], ye[0]), xe[-1] - xe[0], ye[-1] - ye[0],
                           facecolor="0.85", hatch="///", edgecolor="0.6",
                           linewidth=0, zorder=0))
    masked = np.ma.masked_invalid(grid.T)  # pcolormesh wants (ny, nx)
    mesh = ax.pcolormesh(xe, ye, masked, cmap="viridis", vmin=0.0, vmax=1.0,
                         zorder=1)
    fig.colorbar(mesh, ax=ax, label=spec.metric)

    styles = {"exact_line": dict(color="tab:blue", linestyle="-"),
              "almost_exact_line": dict(color="tab:red", linestyle="-"),
              "conjecture_line": dict(color="black", linestyle="--")}
    for name, ((x0, y0), (x1, y1)) in overlay_segments(spec.overlay).items():
        ax.plot([x0, x1], [y0, y1], zorder=2, linewidth=1.5, **styles[name])

    ax.set_xlim(xe[0], xe[-1])
    ax.set_ylim(ye[0], ye[-1])
    ax.set_xlabel(r"$\rho^2 n / \log n$")
    ax.set_ylabel(r"$\eta^2 d / \log n$")
    ax.set_title(spec.metric.replace("_", " "))
    fig.tight_layout()
    # strip the software metadata chunk so repeated renders are byte-identical
    fig.savefig(spec.output, dpi=150, metadata={"Software": None})
    plt.close(fig)
    return spec.output


def _parse_overlay(text: str) -> frozenset:
    if text == "all":
        return frozenset(OVERLAYS)
    if text == "none":
        return frozenset()
    return frozenset(part.strip() for part in text.split(",") if part.strip())


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render", description="Render a sweep CSV as a phase-diagram heatmap.")
    parser.add_argument("--csv", required=True, help="input sweep CSV")
    parser.add_argument("--metric", default="exact_rate", choices=METRICS)
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--overlay", default="all",
                        help="all, none, or a comma list of "
                             + ", ".join(OVERLAYS))
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec(args.csv, args.metric, args.out,
                          _parse_overlay(args.overlay))
        render_phase_diagram(spec)
    except (ColumnError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def entry():
    raise SystemExit(main())
