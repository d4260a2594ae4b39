"""Command-line driver: ``rdarnoldi <subcommand> [--config PATH] [--out DIR] ...``.

Exit status is 0 on success, 1 for configuration errors and 2 for numerical
failures (a diagnostic goes to stderr).
"""

import argparse
import os
import sys

import numpy as np

from .errors import ConfigError, NumericalError, RDArnoldiError
from .experiments import (
    ExperimentConfig,
    run_calibration,
    run_convergence_experiment,
    run_phi,
    run_residual_experiment,
    run_sector,
    run_window_experiment,
    write_csv,
)

SUBCOMMANDS = ("converge", "residual", "window", "calibrate", "sector", "phi")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parser():
    p = _Parser(prog="rdarnoldi", description="Rational Arnoldi experiments for phi_k(hL)v.")
    p.add_argument("command", choices=SUBCOMMANDS)
    p.add_argument("--config", metavar="PATH", help="key = value configuration file")
    p.add_argument("--out", metavar="DIR", help="output directory (overrides config)")
    p.add_argument("--oracle", choices=("on", "off"), help="compute the dense reference solution")
    p.add_argument("--seed", type=int, help="recorded in outputs; runs are deterministic")
    p.add_argument("--large", action="store_true", help="M=1000 without the oracle column")
    return p


def load_config(args):
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    kw = {}
    if args.out is not None:
        kw["out"] = args.out
    if args.oracle is not None:
        kw["oracle"] = args.oracle == "on"
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.large:
        kw["large"] = True
    return cfg.replace(**kw) if kw else cfg


def _dispatch(cmd, cfg, out):
    if cmd == "converge":
        for rec in run_convergence_experiment(cfg):
            status = "converged" if rec.converged else "not converged"
            print(f"k={rec.k} c={rec.c:g} tau={rec.tau:.6g} m={rec.report.m[-1]} {status} -> {rec.path}", file=out)
    elif cmd == "residual":
        for rec in run_residual_experiment(cfg):
            print(f"k={rec.k} c={rec.c:g} tau={rec.tau:.6g} m={rec.report.m[-1]} -> {rec.path}", file=out)
    elif cmd == "window":
        path, _ = run_window_experiment(cfg)
        print(path, file=out)
    elif cmd == "calibrate":
        rows = []
        for c, k, pol in run_calibration(cfg):
            lo, hi = pol.bounds
            computed = int(pol.window is not None)
            print(f"c={c:g} k={k} theta={pol.theta:.6f} target_m={pol.target_m} tau={pol.tau_opt:.6f} "
                  f"window=[{lo:.6f}, {hi:.6f}]" + ("" if computed else " (default tau/2..2tau)"), file=out)
            rows.append((c, int(k), pol.theta, int(pol.target_m), pol.tau_opt, lo, hi, computed))
        header = ["c", "k", "theta", "target_m", "tau", "window_lo", "window_hi", "computed"]
        write_csv(os.path.join(cfg.out, "calibrate.csv"), header, rows, cfg.describe())
    elif cmd == "sector":
        for c in cfg.c:
            info = run_sector(cfg, c)
            print(f"c={c:g} M={cfg.effective_M()} theta={info.theta:.6f} R={info.radius:.6e}", file=out)
    elif cmd == "phi":
        for c in cfg.c:
            for k in cfg.k:
                res, tau = run_phi(cfg, c, k)
                os.makedirs(cfg.out, exist_ok=True)
                path = os.path.join(cfg.out, f"phi_k{k}_c{c:g}.txt")
                np.savetxt(path, np.atleast_1d(res.y), fmt="%.17e", header=f"{cfg.describe()} tau={tau!r} m={res.m}")
                print(f"k={k} c={c:g} m={res.m} -> {path}", file=out)


def main(argv=None, out=None):
    out = out or sys.stdout
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args)
        _dispatch(args.command, cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, RDArnoldiError, ArithmeticError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
