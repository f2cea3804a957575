"""Command-line entry point: ``quadwf <subcommand> --config cfg.json --out results.csv``."""
import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ExperimentConfig, default_config
from .experiments import run_experiment, summarize, transition_midpoint

SUBCOMMANDS = {
    "init-closeness": "init_closeness",
    "phase-transition": "phase_transition",
    "image": "image_recovery",
    "init-compare": "init_comparison",
    "bench-init": "bench_init",
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="quadwf",
        description="Recover complex signals from random quadratic measurements and run the "
                    "batch experiments.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-trial progress")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, kind in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"run the {kind} experiment")
        p.add_argument("--config", type=Path, help="JSON experiment config (defaults if omitted)")
        p.add_argument("--out", type=Path, help="output CSV path (overrides output_path)")
        p.add_argument("--full", action="store_true",
                       help="full-scale defaults (n = 100, 100 trials); ignored with --config")
        p.add_argument("--seed", type=int, help="override base_seed")
        p.add_argument("--jobs", type=int, help="worker processes (overrides n_jobs)")
        if kind == "image_recovery":
            p.add_argument("--image", type=Path, help="P3 PPM image (bundled logo if omitted)")
    return parser


def load_config(kind, config_path=None, full=False):
    if config_path is None:
        return default_config(kind, full=full)
    data = json.loads(Path(config_path).read_text())
    data.setdefault("kind", kind)
    if data["kind"] != kind:
        raise ValueError(f"config kind {data['kind']!r} does not match subcommand ({kind!r})")
    return ExperimentConfig.from_dict(data)


def _report(cfg, records):
    if cfg.kind == "image_recovery":
        for r in records:
            print(f"m/n={r.m_over_n:g} channel={r.channel}: init rel err {r.init_rel_error:.3f}, "
                  f"final rel err {r.final_rel_error:.3e}, final rel dist {r.final_rel_distance:.3e}")
        return
    rows = summarize(records)
    for row in rows:
        print(f"q={row['q']:g} m/n={row['m_over_n']:g} n={row['n']} {row['init_method']}: "
              f"init {row['mean_init_rel_distance']:.4f} final {row['mean_final_rel_distance']:.3e} "
              f"success {row['success_rate']:.2f} time {row['mean_wall_time_ms']:.1f} ms")
    if cfg.kind == "phase_transition":
        for q in cfg.q_values:
            cell = [r for r in rows if r["q"] == q]
            mid = transition_midpoint([r["m_over_n"] for r in cell], [r["success_rate"] for r in cell])
            print(f"q={q:g}: transition midpoint m/n = {mid}")


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    kind = SUBCOMMANDS[args.command]
    try:
        cfg = load_config(kind, args.config, args.full)
        cfg = cfg.with_overrides(
            output_path=None if args.out is None else str(args.out),
            base_seed=args.seed, n_jobs=args.jobs)
        records = run_experiment(cfg, image_path=getattr(args, "image", None))
    except (ValueError, OSError) as exc:
        print(f"quadwf: error: {exc}", file=sys.stderr)
        return 2
    _report(cfg, records)
    print(f"wrote {cfg.output_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
