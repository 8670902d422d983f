"""Command line: ``oftpl run|report|probe``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import config as cfgmod
from . import report as reportmod
from . import runner


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="oftpl", description="OFTPL experiments")
    sub = p.add_subparsers(dest="cmd", required=True)
    env_threads = int(os.environ.get(cfgmod.THREADS_ENV, "0")) or None

    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("config")
    r.add_argument("--threads", type=int, default=env_threads)
    r.add_argument("--seed-override", type=int, default=None, help="run this single seed instead")
    r.add_argument("--out", default=None, help="output directory")

    rep = sub.add_parser("report", help="plot run CSVs as SVG")
    rep.add_argument("csv", nargs="*")
    rep.add_argument("--out", default="plots")

    pr = sub.add_parser("probe", help="stability or monotonicity probe")
    pr.add_argument("which", choices=["stability", "monotonicity"])
    pr.add_argument("config")
    pr.add_argument("--threads", type=int, default=env_threads)
    pr.add_argument("--out", default=None)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        if args.cmd == "report":
            for path in reportmod.report(args.csv, args.out):
                print(path)
            return 0
        cfg = cfgmod.load(args.config)
        if args.cmd == "probe" and cfg.kind != f"probe_{args.which}":
            raise cfgmod.ConfigError(f"kind is {cfg.kind}, expected probe_{args.which}", None, args.config)
        if args.threads:
            cfg.threads = args.threads
        seeds = [args.seed_override] if getattr(args, "seed_override", None) is not None else None
        summary = runner.run(cfg, cfg.threads, seeds, args.out)
    except cfgmod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except reportmod.SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    brief = {k: summary[k] for k in ("name", "kind", "fit", "min_inner_product", "within_bound", "paths")
             if k in summary}
    print(json.dumps(brief, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
