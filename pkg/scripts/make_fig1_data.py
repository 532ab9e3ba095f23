#!/usr/bin/env python3
"""Generate the three figure-preset scan CSVs (and figures, if the renderer
is installed).

Usage:
    python scripts/make_fig1_data.py [--outdir out] [--tcount 200]
"""
import argparse
import sys
from pathlib import Path

from qnuisance.cli import main as cli_main


def run(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default="out")
    parser.add_argument("--tcount", type=int, default=200)
    args = parser.parse_args(argv)

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_paths = {}
    for preset in ("fig1a", "fig1b", "fig1c"):
        path = outdir / f"{preset}.csv"
        code = cli_main(["scan", "--preset", preset, "--tcount", str(args.tcount),
                         "--out", str(path)])
        if code != 0:
            return code
        csv_paths[preset] = path
        print(f"wrote {path}")

    try:
        from scanfig import PlotSpec, render_fig1
        import matplotlib.pyplot as plt
    except ImportError:
        print("renderer not installed; CSVs only (pip install -e plots/)")
        return 0
    for preset, path in csv_paths.items():
        image = outdir / f"{preset}.png"
        fig = render_fig1(PlotSpec(input_csv=path, preset=preset, output=image,
                                   log_inset=True))
        plt.close(fig)
        print(f"wrote {image}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
