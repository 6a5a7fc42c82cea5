"""Command-line entry points.

Subcommands: simulate | analytic | ts | compare | regret | selftest, all
driven by a flat key=value config file (or a bundled preset name) with
--set overrides. Results are written as CSV plus a manifest.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import analytics, __version__
from .bandit import run_ts
from .config import emit_results, load_config
from .geometry import sample_ppp
from .montecarlo import (
    Mode,
    compare_analytic_empirical,
    estimate_block_controllability,
    estimate_meta_empirical,
    run_regret_study,
    window_quadrature,
)
from .selftest import run_selftest


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):  # includes numpy scalars; plain repr round-trips
        return repr(float(x))
    return str(x)


def _csv(header: list[str], rows: list[list]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(cell) for cell in row))
    return "\n".join(lines) + "\n"


def _cmd_simulate(config, args) -> dict[str, str]:
    results = estimate_block_controllability(config)
    rows = [
        [r.protocol.value, r.system, r.q, r.estimate, r.half_width_95, r.analytic]
        for r in results
    ]
    return {"sweep.csv": _csv(
        ["protocol", "system", "q", "estimate", "ci95", "analytic"], rows
    )}


def _cmd_analytic(config, args) -> dict[str, str]:
    quad = window_quadrature(config.ppp)
    lam = config.ppp.intensity_lambda
    r0 = config.ppp.typical_distance_r0
    rows = []
    for protocol in config.protocols:
        for q in config.q_values:
            value = analytics.prob_block_controllable_restless(
                config.T, config.v, q, lam, config.channel, quad, protocol, r0=r0
            )
            rows.append([protocol.value, q, lam, config.T, config.v, None, value, None])
        for beta in config.beta_values:
            for q in config.q_values:
                query = analytics.MetaQuery(
                    config.v, beta, config.T, q, lam, config.channel, r0
                )
                value = analytics.meta_distribution_rested(query, quad, protocol)
                rows.append([protocol.value, q, lam, config.T, config.v, beta, value, None])
    return {"analytic.csv": _csv(
        ["protocol", "q", "lambda", "T", "v", "beta", "value", "abs_err_estimate"], rows
    )}


def _cmd_ts(config, args) -> dict[str, str]:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(config.seed)))
    realization = sample_ppp(config.ppp, rng)
    protocol = config.protocols[0]
    trace, history = run_ts(
        realization, config.arms, protocol, config.channel, config.T, config.K, rng
    )
    rows = [
        [k + 1, int(trace.arm_indices[k]), config.arms[int(trace.arm_indices[k])],
         float(trace.block_rewards[k]), float(trace.cumulative[k])]
        for k in range(config.K)
    ]
    artifacts = {
        "ts.csv": _csv(["k", "arm", "q", "block_reward", "cumulative_regret"], rows),
        "posteriors.json": json.dumps(
            {
                "oracle_arm_index": trace.oracle_arm_index,
                "arm_pull_counts": {str(k): v for k, v in trace.arm_pull_counts.items()},
                "snapshots": history,
            },
            indent=2,
        ) + "\n",
    }
    return artifacts


def _cmd_compare(config, args) -> dict[str, str]:
    artifacts = {}
    if "restless" in config.systems:
        rows = [
            [r.protocol.value, r.system, r.q, r.empirical, r.analytic, r.abs_diff,
             int(r.passes)]
            for r in compare_analytic_empirical(config)
        ]
        artifacts["compare.csv"] = _csv(
            ["protocol", "system", "q", "empirical", "analytic", "abs_diff", "passes"],
            rows,
        )
    if "rested" in config.systems and config.beta_values:
        quad = window_quadrature(config.ppp)
        lam = config.ppp.intensity_lambda
        r0 = config.ppp.typical_distance_r0
        rows = []
        root = np.random.SeedSequence(config.seed)
        seeds = root.spawn(len(config.protocols) * len(config.beta_values) * len(config.q_values))
        i = 0
        for protocol in config.protocols:
            for beta in config.beta_values:
                for q in config.q_values:
                    query = analytics.MetaQuery(
                        config.v, beta, config.T, q, lam, config.channel, r0
                    )
                    analytic = analytics.meta_distribution_rested(query, quad, protocol)
                    empirical = estimate_meta_empirical(
                        config, protocol, q, beta, seed_seq=seeds[i]
                    )
                    diff = abs(analytic - empirical)
                    rows.append([
                        protocol.value, "rested", q, empirical, analytic, diff,
                        int(diff <= 0.02), beta,
                    ])
                    i += 1
        artifacts["compare_meta.csv"] = _csv(
            ["protocol", "system", "q", "empirical", "analytic", "abs_diff",
             "passes", "beta"],
            rows,
        )
    return artifacts


def _cmd_regret(config, args) -> dict[str, str]:
    study = run_regret_study(config)
    rows = [
        [k + 1, float(study.mean_cumulative[k]), float(study.envelope[k])]
        for k in range(len(study.mean_cumulative))
    ]
    return {"regret.csv": _csv(["k", "mean_regret", "envelope"], rows)}


_COMMANDS = {
    "simulate": (_cmd_simulate, Mode.CONTROLLABILITY_SWEEP),
    "analytic": (_cmd_analytic, Mode.ANALYTIC_COMPARE),
    "ts": (_cmd_ts, Mode.TS_RUN),
    "compare": (_cmd_compare, Mode.ANALYTIC_COMPARE),
    "regret": (_cmd_regret, Mode.REGRET_STUDY),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alohactrl",
        description="Simulate and analyze ALOHA access for Poisson networks of control loops",
    )
    parser.add_argument("--version", action="version", version=f"alohactrl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*_COMMANDS, "selftest"):
        p = sub.add_parser(name)
        if name == "selftest":
            continue
        p.add_argument("--config", required=True,
                       help="config file path or preset name (fig2..fig5)")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a config key")
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--force", action="store_true",
                       help="overwrite existing output files")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "selftest":
        return run_selftest()

    overrides = list(args.overrides)
    if args.threads is not None:
        overrides.append(f"threads = {args.threads}")
    if args.seed is not None:
        overrides.append(f"seed = {args.seed}")
    try:
        config = load_config(args.config, overrides)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    handler, mode = _COMMANDS[args.command]
    from dataclasses import replace

    config = replace(config, mode=mode)
    start = time.perf_counter()
    artifacts = handler(config, args)
    elapsed = time.perf_counter() - start
    try:
        written = emit_results(
            artifacts, args.out, config, force=args.force, wall_time_s=elapsed
        )
    except FileExistsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
