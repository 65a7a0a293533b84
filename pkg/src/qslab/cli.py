"""Command line interface.

Subcommands: ``run`` (single epsilon), ``sweep``, ``check``, ``dump-profile``.
Exit codes: 0 success, 2 config error, 3 invariant violation, 4 solver
non-convergence.  QSL_THREADS caps sweep workers.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .errors import ConfigError, ConvergenceError, InvariantViolation
from .harness import RunConfig, default_config, run_single, sweep
from .profiles import f_uni, quasi_dist_uni, wave_profile


def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_json_file(args.config) if args.config else default_config()
    if getattr(args, "out", None):
        cfg.out_dir = args.out
    if getattr(args, "jobs", None):
        cfg.jobs = args.jobs
    if getattr(args, "snapshot_every", None):
        cfg.snapshot_every = args.snapshot_every
    return cfg


def _cmd_run(args) -> int:
    cfg = _load_config(args)
    eps = args.eps if args.eps is not None else cfg.eps_list[0]
    out = cfg.out_dir
    run_dir = os.path.join(out, f"eps_{eps:g}") if out else None
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "config.json"), "w") as fh:
            fh.write(cfg.to_json() + "\n")
    result = run_single(cfg, eps, out_dir=run_dir)
    term = result.terminal
    print(
        f"eps={eps:g} steps={result.n_steps} E(T)={term.E:.6g} "
        f"E_vol(T)={term.E_vol:.6g} R={term.R_measured:.4f} maxQ={term.maxQ:.4f}"
    )
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    summary = sweep(cfg, out_dir=cfg.out_dir)
    print(json.dumps(summary.to_dict()["flags"], indent=2, sort_keys=True))
    if "E_total" in summary.fits:
        fit = summary.fits["E_total"]
        print(f"E(T)+E_vol(T) ~ eps^{fit.slope:.3f} (r2={fit.r2:.4f})")
    return 0 if not summary.failed else 3


def _cmd_check(_args) -> int:
    from .checks import run_checks

    return 0 if run_checks() else 3


def _cmd_dump_profile(args) -> int:
    cfg = _load_config(args)
    params = cfg.params()
    out = cfg.out_dir or "."
    os.makedirs(out, exist_ok=True)
    zs = np.linspace(-8.0, 8.0, 801)
    ss = np.linspace(0.0, params.s_plus, 801)
    path = os.path.join(out, "profile_tables.csv")
    with open(path, "w") as fh:
        fh.write("z,S,s,f,g\n")
        wave = wave_profile(zs, params)
        fs = f_uni(ss, params)
        gs = quasi_dist_uni(ss, params)
        for z, w, s, f, g in zip(zs, wave, ss, fs, gs):
            fh.write(f"{z!r},{w!r},{s!r},{f!r},{g!r}\n")
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qslab",
        description="Diffuse-interface Q-tensor laboratory: run, sweep, verify.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_eps=False):
        p.add_argument("--config", help="JSON config file (defaults are built in)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--jobs", type=int, help="parallel runs for sweeps")
        p.add_argument("--snapshot-every", type=int, dest="snapshot_every",
                       help="diagnostics cadence in steps")
        if with_eps:
            p.add_argument("--eps", type=float, help="interface width epsilon")

    common(sub.add_parser("run", help="single run at one epsilon"), with_eps=True)
    common(sub.add_parser("sweep", help="full epsilon sweep with rate fits"))
    sub.add_parser("check", help="fast built-in verification suite")
    common(sub.add_parser("dump-profile", help="emit S, f, g tables as CSV"))
    return parser


_DISPATCH = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "check": _cmd_check,
    "dump-profile": _cmd_dump_profile,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"invariant violation: {exc.args[0]}", file=sys.stderr)
        return 3
    except ConvergenceError as exc:
        print(f"solver non-convergence: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
