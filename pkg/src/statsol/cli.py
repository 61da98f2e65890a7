"""Command-line driver: ``statsol run|study|validate <config>``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .checks import NUMERICAL_ERRORS, Context, run_check
from .config import ConfigError, ExperimentConfig, load_config
from .measure import MeasureError, SamplerError

log = logging.getLogger("statsol")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


def build_context(cfg: ExperimentConfig, halvings: int | None = None) -> Context:
    model = cfg.build_model()
    try:
        mu0 = cfg.build_measure(model)
    except (MeasureError, SamplerError) as exc:
        raise ConfigError(f"initial_measure: {exc}") from exc
    return Context(cfg, model, mu0, cfg.build_dictionary(model), halvings)


def execute(cfg: ExperimentConfig, report: Path, threads: int = 1,
            halvings: int | None = None) -> int:
    """Run every check, write the NDJSON report, return the exit status."""
    ctx = build_context(cfg, halvings)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(lambda c: run_check(ctx, c.name, c.params), cfg.checks))
    records = [r for recs, _ in results for r in recs]
    report.parent.mkdir(parents=True, exist_ok=True)
    with open(report, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r, allow_nan=False) + "\n")
    for r in records:
        log.info("%-18s %-5s value=%s tol=%s order=%s", r["check"], "PASS" if r["pass"] else "FAIL",
                 r["value"], r["tolerance"], r["order_estimate"])
    if any(numerical for _, numerical in results):
        return EXIT_NUMERICAL
    return EXIT_OK if all(r["pass"] for r in records) else EXIT_FAILED


def _threads(arg: int | None) -> int:
    env = os.environ.get("STATSOL_THREADS")
    if env:
        return int(env)
    return arg or 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="statsol", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads for checks (STATSOL_THREADS overrides)")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="solve and verify, write an NDJSON report")
    p_run.add_argument("config")
    p_run.add_argument("--report", help="override the report path")
    p_study = sub.add_parser("study", help="rerun checks over successive dt halvings")
    p_study.add_argument("config")
    p_study.add_argument("--halvings", type=int, required=True)
    p_study.add_argument("--report", help="override the report path")
    p_val = sub.add_parser("validate", help="check a config without solving")
    p_val.add_argument("config")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")

    try:
        cfg = load_config(args.config)
        if args.command == "validate":
            build_context(cfg)
            print(f"{args.config}: ok ({len(cfg.checks)} checks)")
            return EXIT_OK
        if args.command == "study":
            if args.halvings < 2:
                raise ConfigError("--halvings must be at least 2")
            report = Path(args.report or Path(cfg.report).with_suffix(".study.ndjson"))
            status = execute(cfg, report, _threads(args.threads), args.halvings)
        else:
            report = Path(args.report or cfg.report)
            status = execute(cfg, report, _threads(args.threads))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"report written to {report} (exit {status})")
    return status


if __name__ == "__main__":
    sys.exit(main())
