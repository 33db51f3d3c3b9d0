"""Command line entry point.

Subcommands:
    run <config>   execute one experiment from a config file
    sweep          privacy-budget grid on the spaced-means bias setup
    correct        print the corrected rejection threshold gamma(alpha)
    selftest       run the fast invariant suite

Exit codes: 0 success, 2 configuration error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import sys

from .harness import (
    ConfigError,
    EPS_SWEEP_DEFAULT,
    ExperimentConfig,
    load_config,
    run_experiment,
    run_selftest,
)
from .stats import MaxInfoParams


def _overrides(pairs: list[str]) -> dict[str, str]:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dpbandit",
        description="Differentially private bandit experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config file")
    p_run.add_argument("config", help="path to a key = value config file")
    p_run.add_argument("--threads", type=int, default=None,
                       help="replication parallelism degree")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override any config key")

    p_sweep = sub.add_parser("sweep", help="grid over eps on the bias setup")
    p_sweep.add_argument("--eps-grid", default=",".join(map(str, EPS_SWEEP_DEFAULT)))
    p_sweep.add_argument("--K", type=int, default=20)
    p_sweep.add_argument("--T", type=int, default=500)
    p_sweep.add_argument("--gap", type=float, default=0.05)
    p_sweep.add_argument("--reps", type=int, default=200)
    p_sweep.add_argument("--base-seed", type=int, default=0)
    p_sweep.add_argument("--threads", type=int, default=1)
    p_sweep.add_argument("--out", default="out/sweep")

    p_corr = sub.add_parser("correct", help="print the corrected threshold")
    p_corr.add_argument("--alpha", type=float, required=True)
    p_corr.add_argument("--beta", type=float, required=True)
    p_corr.add_argument("--eps", type=float, required=True)
    p_corr.add_argument("--T", type=int, required=True)

    sub.add_parser("selftest", help="run the fast invariant suite")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            overrides = _overrides(args.set)
            if args.threads is not None:
                overrides["threads"] = str(args.threads)
            if args.out is not None:
                overrides["out"] = args.out
            cfg = load_config(args.config, overrides)
        elif args.command == "sweep":
            cfg = ExperimentConfig(
                kind="sweep",
                K=args.K,
                T=args.T,
                gap=args.gap,
                policy="privucb",
                eps=1.0,  # per-grid values come from eps_grid
                eps_grid=tuple(float(x) for x in args.eps_grid.split(",")),
                reps=args.reps,
                base_seed=args.base_seed,
                threads=args.threads,
                out=args.out,
            )
        elif args.command == "correct":
            params = MaxInfoParams(args.eps, args.T, args.beta)
            print(f"{params.gamma(args.alpha):.10g}")
            return 0
        else:  # selftest
            ok, lines = run_selftest()
            print("\n".join(lines))
            return 0 if ok else 3
    except (ConfigError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        output = run_experiment(cfg)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {output.out_dir}/manifest.json "
          f"(hash {output.manifest['content_hash'][:12]})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
