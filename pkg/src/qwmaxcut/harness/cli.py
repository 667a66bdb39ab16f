"""Command-line entry point: instance generation, experiment runs, reports.

Exit codes: 0 success, 1 validation/configuration error, 2 partial failure
(some instances of a batch failed; the rest were written normally).
"""

from __future__ import annotations

import argparse
import sys

from ..graphs import DEFAULT_EDGE_PROBABILITY, GraphError, gen_binomial, gen_regular, to_json
from .config import ConfigError, load_config
from .experiments import run_experiment
from .report import ReportError, render_table


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qwmaxcut",
        description="Continuous-time quantum walk experiments for MAX-CUT")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a problem graph as JSON on stdout")
    gen.add_argument("--family", choices=("binomial", "regular"), required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--p", type=float, default=DEFAULT_EDGE_PROBABILITY,
                     help="edge probability (binomial)")
    gen.add_argument("--d", type=int, default=3, help="degree (regular)")
    gen.add_argument("--seed", type=int, default=0)

    run = sub.add_parser("run", help="run an experiment from a TOML config")
    run.add_argument("--config", required=True)
    run.add_argument("--threads", type=int, default=None,
                     help="cap worker processes (overrides the config)")

    rep = sub.add_parser("report", help="aggregate result CSVs into a summary table")
    rep.add_argument("--in", dest="result_dir", required=True)
    rep.add_argument("--table", required=True)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            if args.family == "binomial":
                g = gen_binomial(args.n, args.p, args.seed)
            else:
                g = gen_regular(args.n, args.d, args.seed)
            print(to_json(g))
            return 0
        if args.command == "run":
            cfg = load_config(args.config)
            if args.threads is not None:
                if args.threads < 1:
                    raise ConfigError("--threads must be at least 1")
                object.__setattr__(cfg, "threads", args.threads)
            manifest = run_experiment(cfg)
            n_fail = len(manifest["failures"])
            if n_fail:
                print(f"{n_fail}/{manifest['n_tasks']} instances failed; "
                      f"see {cfg.output_dir}/manifest.json", file=sys.stderr)
                return 2
            print(f"wrote {cfg.output_dir}")
            return 0
        if args.command == "report":
            print(render_table(args.result_dir, args.table), end="")
            return 0
    except (GraphError, ConfigError, ReportError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 1


if __name__ == "__main__":
    sys.exit(main())
