"""Command line entry point: ``lrmimo {ber,gain,reduce,selftest}``.

Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 selftest failure.
"""
import argparse
import sys
from pathlib import Path

import numpy as np

from . import harness
from .harness import ConfigInvalid, Timer, load_config
from .lattice import ReductionParams, lll_reduce
from .linalg import RankDeficient, qr_decompose

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_SELFTEST = 0, 1, 2, 3


def _add_sim_flags(p):
    p.add_argument("--config", type=Path, help="key = value config file")
    p.add_argument("--n-t", type=int)
    p.add_argument("--n-r", type=int)
    p.add_argument("--m-s", type=int)
    p.add_argument("--snr-db-grid", help="comma separated list, e.g. 0,5,10")
    p.add_argument("--k-start-list", help="comma separated real-model start columns")
    p.add_argument("--detectors", help="subset of ZF,LR-ZF")
    p.add_argument("--trials-per-point", type=int)
    p.add_argument("--symbols-per-trial", type=int)
    p.add_argument("--master-seed", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--output-dir", help=f"defaults to ${harness.OUTPUT_DIR_ENV} or ./results")
    p.add_argument("--workers", type=int)
    p.add_argument("--noiseless", action="store_true", default=None, help="diagnostic: zero noise")
    p.add_argument("--name", help="output file stem (default: ber_<dim> / gain_<dim>)")


def _config_from_args(args):
    flags = {}
    for key in ("n_t", "n_r", "m_s", "trials_per_point", "symbols_per_trial", "master_seed",
                "delta", "output_dir", "workers", "noiseless"):
        flags[key] = getattr(args, key)
    raw = {k: getattr(args, k) for k in ("snr_db_grid", "k_start_list", "detectors") if getattr(args, k)}
    flags.update(harness.parse_config_values(raw))
    return load_config(args.config, **flags)


def _run_experiment(args, kind):
    config = _config_from_args(args)
    timer = Timer()
    with timer("run"):
        if kind == "ber":
            results = harness.run_ber_experiment(config)
        else:
            results = harness.run_gain_experiment(config)
    out = Path(config.output_dir)
    stem = args.name or f"{kind}_{config.dimension}"
    csv_path = harness.emit_csv(results, out / f"{stem}.csv", kind=kind)
    written = [csv_path]
    if kind == "ber":
        written.append(harness.emit_plot_script(results, out / f"{stem}_plot.py", csv_path))
    written.append(harness.write_manifest(
        out / f"{stem}_manifest.txt", config, timer.durations,
        {"partial": str(results.partial).lower(), "channel_redraws": results.redraws},
    ))
    _print_summary(results, kind)
    for p in written:
        print(f"wrote {p}")
    return EXIT_OK


def _print_summary(results, kind):
    if kind == "gain":
        print(f"{'k_start':>7} {'mean_flops':>12} {'gain_%':>8} {'mean_swaps':>10}")
        for r in results:
            print(f"{r.k_start:>7} {r.mean_flops:>12.1f} {r.gain_percent:>8.2f} {r.mean_swaps:>10.2f}")
    else:
        print(f"# {harness.SNR_CONVENTION}")
        for r in results:
            print(f"{r.variant:>10} {r.snr_db:>6.1f} dB  BER {r.ber:.3e}  mean_flops {r.mean_flops:.1f}")
    if results.partial:
        print("interrupted: partial results written", file=sys.stderr)


def _reduce(args):
    try:
        h = np.loadtxt(args.matrix, ndmin=2)
    except (OSError, ValueError) as exc:
        print(f"error: cannot read matrix {args.matrix}: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        q, r = qr_decompose(h)
        params = ReductionParams(args.delta, args.k_start)
        out = lll_reduce(q, r, params)
    except (RankDeficient, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    np.set_printoptions(precision=6, suppress=True, linewidth=120)
    for name, mat in (("Q_tilde", out.q_tilde), ("R_tilde", out.r_tilde), ("T", out.t.astype(np.int64))):
        print(f"{name} =")
        print(mat)
    print(f"swaps = {out.swap_count}")
    print(f"iterations = {out.iteration_count}")
    print(f"flops = {out.ledger.total}")
    print(f"capped = {str(out.capped).lower()}")
    return EXIT_OK


def _selftest(args):
    from .selftest import run_selftest

    ok = run_selftest(verbose=not args.quiet, trials=args.trials, seed=args.seed)
    return EXIT_OK if ok else EXIT_SELFTEST


def build_parser():
    parser = argparse.ArgumentParser(prog="lrmimo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ber", help="BER vs SNR for ZF and LR-aided ZF")
    _add_sim_flags(p)
    p = sub.add_parser("gain", help="mean LLL flops and gain per k_start")
    _add_sim_flags(p)

    p = sub.add_parser("reduce", help="reduce one real matrix read from a text file")
    p.add_argument("matrix", type=Path, help="whitespace separated rows")
    p.add_argument("--k-start", type=int, default=2)
    p.add_argument("--delta", type=float, default=0.75)

    p = sub.add_parser("selftest", help="run the built-in invariant checks")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command in ("ber", "gain"):
            return _run_experiment(args, args.command)
        if args.command == "reduce":
            return _reduce(args)
        return _selftest(args)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
