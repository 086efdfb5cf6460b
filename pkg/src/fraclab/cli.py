"""Command line entry point: ``fraclab <experiment> --config <file>``."""
from __future__ import annotations

import argparse
import logging
import sys

from .errors import FraclabError
from .experiments import EXPERIMENTS, RunOptions, load_config, run

EXIT_FAILED = 1
EXIT_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fraclab", description="Run a named fractal-dimension experiment.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", required=True, help="YAML or JSON config file")
    p.add_argument("--out", default=None, help="directory for report.json and tables")
    p.add_argument("--threads", type=int, default=1, help="worker cap; results do not depend on it")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-cells", type=int, default=None, help="cap on cylinders or product tuples")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("fraclab: --threads must be at least 1", file=sys.stderr)
        return EXIT_ERROR
    try:
        config = load_config(args.config)
        result = run(args.experiment, config,
                     RunOptions(seed=args.seed, threads=args.threads, max_cells=args.max_cells))
    except (FraclabError, OSError, ValueError) as exc:
        print(f"fraclab: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.out:
        result.write(args.out)
    rep = result.report
    for check in rep.get("checks", []):
        status = "PASS" if check["passed"] else "FAIL"
        print(f"[{status}] {check['name']}: {check['value']}")
    if "estimate" in rep:
        print(f"claim: {rep.get('claim', '')}")
        print(f"target: {rep.get('target')}  estimate: {rep['estimate']}")
    print("passed" if result.passed else "failed")
    return 0 if result.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
