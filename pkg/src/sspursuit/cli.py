"""Command-line front end: run Monte Carlo sweeps and render reports."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .experiments import (
    emit_csv,
    emit_plot_data,
    format_experiment_config,
    load_experiment_config,
    parse_algorithms,
    parse_snr_spec,
    read_result_csv,
    run_experiment,
    summarize,
)
from .pilots import OverheadReport


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sspursuit",
        description="superimposed-pilot channel estimation studies",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an NMSE-versus-SNR Monte Carlo sweep")
    run.add_argument("--config", required=True, type=Path, help="experiment config file")
    run.add_argument("--snr", help="override the SNR grid: 'a:b:step' or a comma list")
    run.add_argument("--trials", type=int, help="override the trial count")
    run.add_argument("--seed", type=int, help="override the master seed")
    run.add_argument(
        "--out",
        type=Path,
        help="output directory (default: the config's `out`, else the working directory)",
    )
    run.add_argument("--algorithms", help="override the algorithm list, e.g. 'ssp@1,oracle'")

    report = sub.add_parser("report", help="summarize a results CSV and render its figure")
    report.add_argument("--in", dest="infile", required=True, type=Path, help="results CSV")
    report.add_argument(
        "--config",
        type=Path,
        help="experiment config for the pilot-overhead summary "
        "(default: config.txt next to the CSV)",
    )
    report.add_argument("--fig", type=Path, help="figure path (default: CSV with .png)")
    return parser


def _overhead_text(cfg):
    return OverheadReport(N=cfg.N, N_p=cfg.N_p, M=cfg.M, K=cfg.K).format()


def cmd_run(args):
    from .plotting import render_curves

    cfg = load_experiment_config(args.config)
    if args.snr is not None:
        cfg = replace(cfg, snr_db=parse_snr_spec(args.snr))
    if args.trials is not None:
        cfg = replace(cfg, trials=args.trials)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.algorithms is not None:
        cfg = replace(cfg, algorithms=parse_algorithms(args.algorithms))
    if args.out is not None:
        cfg = replace(cfg, out=str(args.out))

    table = run_experiment(cfg, progress=lambda msg: print(msg, flush=True))
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    emit_csv(table, out / "results.csv")
    emit_plot_data(table, out / "results.dat")
    render_curves(table, out / "results.png")
    (out / "config.txt").write_text(format_experiment_config(cfg))
    print()
    print(summarize(table), end="")
    print()
    for name in ("results.csv", "results.dat", "results.gp", "results.png", "config.txt"):
        print(f"wrote {out / name}")


def cmd_report(args):
    from .plotting import render_curves

    table = read_result_csv(args.infile)
    print(summarize(table), end="")
    print()
    config_path = args.config or args.infile.parent / "config.txt"
    if config_path.exists():
        print(_overhead_text(load_experiment_config(config_path)), end="")
    else:
        print(f"note: no config at {config_path}, skipping the overhead summary")
    fig = args.fig or args.infile.with_suffix(".png")
    render_curves(table, fig)
    print(f"wrote {fig}")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cmd_run(args)
        else:
            cmd_report(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
