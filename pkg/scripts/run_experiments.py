"""Regenerate the CSV data of every standard experiment.

Usage: python3 scripts/run_experiments.py [--out results] [--large] [names...]

Each name maps to a config in scripts/configs and a CLI subcommand. The
output of every run lands in its own subdirectory of --out. A short summary
(iterations to tolerance and final error per file) is printed at the end.
"""

import argparse
import os
import sys
import time

import numpy as np

from rdarnoldi.cli import main as cli_main
from rdarnoldi.experiments import read_csv

HERE = os.path.dirname(os.path.abspath(__file__))

RUNS = {
    "residual": ("residual", "residual.cfg"),
    "large_step": ("converge", "large_step.cfg"),
    "small_step": ("converge", "small_step.cfg"),
    "window": ("window", "window.cfg"),
    "tau_factors": ("converge", "tau_factors.cfg"),
    "calibrate": ("calibrate", "calibrate.cfg"),
}


def summarize(directory):
    for name in sorted(os.listdir(directory)):
        if not name.endswith(".csv") or name in ("window.csv", "calibrate.csv"):
            continue
        _, header, data = read_csv(os.path.join(directory, name))
        col = header.index("true_error") if "true_error" in header else header.index("residual")
        err = data[:, col]
        hit = np.flatnonzero(err <= 1e-12)
        m_hit = int(data[hit[0], 0]) if hit.size else None
        print(f"  {name:32s} steps={int(data[-1, 0]):3d} first<=1e-12 at m={m_hit} final {header[col]}={err[-1]:.2e}")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("names", nargs="*", help=f"subset of {', '.join(RUNS)} (default: all)")
    p.add_argument("--out", default="results")
    p.add_argument("--large", action="store_true", help="M=1000, bounds and residual only (converge runs)")
    args = p.parse_args(argv)
    unknown = set(args.names) - set(RUNS)
    if unknown:
        p.error(f"unknown run(s): {', '.join(sorted(unknown))}")
    status = 0
    for name in args.names or list(RUNS):
        cmd, cfg = RUNS[name]
        out = os.path.join(args.out, name)
        argv_cli = [cmd, "--config", os.path.join(HERE, "configs", cfg), "--out", out]
        if args.large and cmd == "converge":
            argv_cli.append("--large")
        t0 = time.perf_counter()
        print(f"[{name}] rdarnoldi {' '.join(argv_cli)}")
        code = cli_main(argv_cli)
        print(f"[{name}] exit {code} in {time.perf_counter() - t0:.1f}s")
        status = status or code
        if code == 0 and os.path.isdir(out):
            summarize(out)
    return status


if __name__ == "__main__":
    sys.exit(main())
