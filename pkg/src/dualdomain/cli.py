"""Command line entry point: ``dualdomain {resolutions,trial,sweep}``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from .config import (
    REFERENCE_CASES,
    ConfigError,
    SystemConfig,
    load_config,
    reference_scenario,
    resolutions,
    validate,
)
from .experiments import (
    STEADY_TARGETS,
    SweepSpec,
    TrialOptions,
    default_beta_grid,
    evaluate_trial,
    prepare_trial,
    received_sensing_dd,
    run_sweep,
    transmit_grid,
)
from .numerics import save_grid, save_power_csv


def _parse_cases(text: str) -> list[tuple[int, int]]:
    cases = []
    for item in text.split(","):
        try:
            m, n = item.lower().split("x")
            cases.append((int(m), int(n)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad case {item!r}, expected MxN") from None
    return cases


def _load(args) -> tuple[SystemConfig, object]:
    if args.config:
        config, scenario = load_config(args.config)
    else:
        config, scenario = SystemConfig(), reference_scenario()
    if getattr(args, "seed", None) is not None:
        config = dataclasses.replace(config, rng_seed=args.seed)
    return config, scenario


def _options(args) -> TrialOptions:
    opts = STEADY_TARGETS if args.steady_targets else TrialOptions()
    if args.perfect_csi:
        opts = dataclasses.replace(opts, perfect_csi=True)
    return opts


def _dump(path: str, grid: np.ndarray) -> None:
    if Path(path).suffix == ".bin":
        save_grid(path, grid)
    else:
        save_power_csv(path, grid)


def cmd_resolutions(args) -> int:
    config, _ = _load(args)
    cases = args.cases or list(REFERENCE_CASES)
    table = [(M, N, resolutions(validate(config.with_grid(M, N)))) for M, N in cases]
    print(f"{'M':>6} {'N':>5} {'dtau_ns':>9} {'dnu_Hz':>9} {'dR_m':>8} {'dV_ms':>8} {'Rmax_m':>9} {'Vmax_ms':>8}")
    for M, N, res in table:
        print(
            f"{M:6d} {N:5d} {res.delta_tau * 1e9:9.4f} {res.delta_nu:9.3f} {res.delta_R:8.4f} "
            f"{res.delta_V:8.4f} {res.R_max_unambiguous:9.2f} {res.V_max_unambiguous:8.3f}"
        )
    return 0


def cmd_trial(args) -> int:
    config, scenario = _load(args)
    M, N = args.case
    config = config.with_grid(M, N)
    ctx = prepare_trial(config, scenario, args.trial_index, _options(args))
    result = evaluate_trial(ctx, args.beta)
    if args.dump_txft:
        _dump(args.dump_txft, transmit_grid(ctx, args.beta))
    if args.dump_ydd:
        _dump(args.dump_ydd, received_sensing_dd(ctx, args.beta))

    print(f"case M={M} N={N} beta={args.beta} trial={args.trial_index}")
    print(f"sensing SNR (DD): {result.snr_dd_db:.2f} dB; peaks: {result.peaks}")
    for u, user in enumerate(scenario.users):
        print(
            f"  UE{u}: BER={result.ber[u] if result.ber.size else float('nan'):.3e} "
            f"SNR_FT={result.snr_ft_db[u] if result.snr_ft_db.size else float('nan'):.2f} dB  "
            f"R={user.range_m:.2f} -> {result.range_hat[u]:.3f} m  "
            f"V={user.velocity_ms:.2f} -> {result.velocity_hat[u]:.3f} m/s"
        )
    return 0


def cmd_sweep(args) -> int:
    config, scenario = _load(args)
    spec = SweepSpec(
        beta_grid=default_beta_grid(args.beta_points, args.beta_min, args.beta_max),
        cases=args.cases or [(1024, 64)],
        trials_per_point=args.trials,
        scenario=scenario,
        config=config,
        options=_options(args),
        output_path=args.out,
        workers=args.workers,
    )
    result = run_sweep(spec)
    failed = sum(len(p.failures) for p in result.points)
    print(f"wrote {len(result.points)} points to {args.out}" + (f" ({failed} failed trials)" if failed else ""))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualdomain", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with SystemConfig fields and a 'users' list")

    rx = argparse.ArgumentParser(add_help=False)
    rx.add_argument("--seed", type=int, help="master seed (overrides rng_seed)")
    rx.add_argument("--steady-targets", action="store_true",
                    help="non-fluctuating echoes and a unit-amplitude pulse")
    rx.add_argument("--perfect-csi", action="store_true", help="equalize with the true channel")

    p = sub.add_parser("resolutions", parents=[common], help="print delay/Doppler/range/velocity resolutions")
    p.add_argument("--cases", type=_parse_cases, help="comma-separated MxN list")
    p.set_defaults(func=cmd_resolutions)

    p = sub.add_parser("trial", parents=[common, rx], help="run one trial and optionally dump grids")
    p.add_argument("--case", type=lambda s: _parse_cases(s)[0], default=(1024, 128))
    p.add_argument("--beta", type=float, default=-1e-3)
    p.add_argument("--trial-index", type=int, default=0)
    p.add_argument("--dump-txft", metavar="PATH", help="|X_FT|^2 as CSV (or complex dump if PATH ends in .bin)")
    p.add_argument("--dump-ydd", metavar="PATH", help="|Y_DD|^2 as CSV (or complex dump if PATH ends in .bin)")
    p.set_defaults(func=cmd_trial)

    p = sub.add_parser("sweep", parents=[common, rx], help="Monte Carlo sweep over beta and (M, N)")
    p.add_argument("--cases", type=_parse_cases, help="comma-separated MxN list (default 1024x64)")
    p.add_argument("--beta-min", type=float, default=-5e-3)
    p.add_argument("--beta-max", type=float, default=-1e-4)
    p.add_argument("--beta-points", type=int, default=12)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="sweep.csv")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"dualdomain: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
