"""Five-curve scan figures and bound-comparison bar charts.

Consumes only the documented scan CSV schema
    t,variant,g11_over_t2,g11_partial_over_t2,status
and the bounds JSON records; computes no physics. Rendering is a pure
function of the input file and the fixed style below, so re-rendering the
same CSV yields byte-identical images.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

SCHEMA = ("t", "variant", "g11_over_t2", "g11_partial_over_t2", "status")
VARIANTS = (1, 2, 3)
DPI = 150

# role-based styles: solid for the finite-memory kernel, dotted for the
# Born-Markov constants, gray for the parallel-noise model whose two series
# coincide; red carries "noise known", blue "noise as nuisance"
CURVE_STYLES = (
    (1, "g11_over_t2", dict(color="tab:red", linestyle="-",
                            label="variant 1, noise known")),
    (1, "g11_partial_over_t2", dict(color="tab:blue", linestyle="-",
                                    label="variant 1, noise as nuisance")),
    (2, "g11_over_t2", dict(color="tab:red", linestyle=":",
                            label="variant 2, noise known")),
    (2, "g11_partial_over_t2", dict(color="tab:blue", linestyle=":",
                                    label="variant 2, noise as nuisance")),
    (3, "g11_over_t2", dict(color="gray", linestyle="-",
                            label="variant 3 (both series coincide)")),
)


class SchemaMismatch(Exception):
    """CSV header or cells do not follow the scan schema."""


class MissingVariant(Exception):
    """A required noise variant has no rows in the CSV."""


@dataclass(frozen=True)
class PlotSpec:
    input_csv: Path
    preset: str
    output: Path
    log_inset: bool = True


@dataclass(frozen=True)
class ScanColumns:
    t: list
    g11_over_t2: list
    g11_partial_over_t2: list
    status: list

    def column(self, name):
        return getattr(self, name)


def load_scan(path):
    """Parse a scan CSV into per-variant columns; raises SchemaMismatch."""
    path = Path(path)
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaMismatch(f"{path}: empty file")
            if tuple(header) != SCHEMA:
                raise SchemaMismatch(
                    f"{path}: header {header!r} does not match {','.join(SCHEMA)}")
            data = {v: ScanColumns([], [], [], []) for v in VARIANTS}
            for lineno, row in enumerate(reader, start=2):
                if len(row) != len(SCHEMA):
                    raise SchemaMismatch(f"{path}:{lineno}: expected {len(SCHEMA)} cells")
                try:
                    t = float(row[0])
                    variant = int(row[1])
                    full = float(row[2])
                    partial = float(row[3])
                except ValueError as exc:
                    raise SchemaMismatch(f"{path}:{lineno}: {exc}") from exc
                if variant not in data:
                    raise SchemaMismatch(f"{path}:{lineno}: unknown variant {variant}")
                cols = data[variant]
                cols.t.append(t)
                cols.g11_over_t2.append(full)
                cols.g11_partial_over_t2.append(partial)
                cols.status.append(row[4])
    except OSError as exc:
        raise SchemaMismatch(f"{path}: {exc}") from exc
    return data


def _kept(cols, field):
    xs, ys = [], []
    for t, value, status in zip(cols.t, cols.column(field), cols.status):
        if status == "ok" and not math.isnan(value):
            xs.append(t)
            ys.append(value)
    return xs, ys


def _draw_curves(ax, data):
    for variant, field, style in CURVE_STYLES:
        xs, ys = _kept(data[variant], field)
        ax.plot(xs, ys, linewidth=1.4, **style)


def render_fig1(spec: PlotSpec):
    """Render the five-curve figure for one preset; returns the Figure.

    Saves a PNG at the spec's output path. The main axes carry exactly the
    CSV values (status-flagged rows dropped), so the plotted series can be
    diffed against the file.
    """
    data = load_scan(spec.input_csv)
    for v in VARIANTS:
        if not data[v].t:
            raise MissingVariant(f"{spec.input_csv}: no rows for variant {v}")

    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=DPI)
    _draw_curves(ax, data)
    ax.set_xlabel("t")
    ax.set_ylabel("Fisher information about the frequency / t$^2$")
    ax.set_title(f"{spec.preset}: known noise vs nuisance-limited information")
    ax.legend(fontsize=7, loc="upper right")

    if spec.log_inset:
        inset = ax.inset_axes([0.46, 0.38, 0.5, 0.42])
        _draw_curves(inset, data)
        inset.set_xscale("log")
        inset.set_yscale("log")
        inset.tick_params(labelsize=6)

    fig.savefig(spec.output, dpi=DPI)
    return fig


def render_bounds_bar(bounds_json, output):
    """Bar chart of the scalar entries in a bounds JSON record."""
    with open(bounds_json, encoding="utf-8") as fh:
        record = json.load(fh)
    entries = [(k, v) for k, v in sorted(record.get("bounds", {}).items())
               if isinstance(v, (int, float))]
    if not entries:
        raise SchemaMismatch(f"{bounds_json}: no scalar bounds to plot")
    labels = [k for k, _ in entries]
    values = [v for _, v in entries]
    fig, ax = plt.subplots(figsize=(6.4, 3.6), dpi=DPI)
    ax.bar(range(len(values)), values, color="tab:blue")
    ax.set_xticks(range(len(values)))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=7)
    ax.set_ylabel("bound value")
    ax.set_title(f"model {record.get('model', '?')} at theta={record.get('theta')}")
    fig.tight_layout()
    fig.savefig(output, dpi=DPI)
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="scanfig",
                                     description="Render a scan CSV into a figure")
    parser.add_argument("--input", required=True)
    parser.add_argument("--preset", default="scan",
                        help="preset name used in the figure title")
    parser.add_argument("--out", required=True)
    parser.add_argument("--log-inset", action="store_true", default=False)
    args = parser.parse_args(argv)
    try:
        fig = render_fig1(PlotSpec(input_csv=Path(args.input), preset=args.preset,
                                   output=Path(args.out), log_inset=args.log_inset))
        plt.close(fig)
    except (SchemaMismatch, MissingVariant) as exc:
        parser.exit(2, f"error: {exc}\n")
    return 0


def bounds_bar_main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="scanfig-bounds-bar",
                                     description="Bar chart from a bounds JSON record")
    parser.add_argument("--input", required=True)
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    try:
        fig = render_bounds_bar(args.input, args.out)
        plt.close(fig)
    except SchemaMismatch as exc:
        parser.exit(2, f"error: {exc}\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
