"""Run every bundled config and print one summary line per check record."""

import argparse
import json
import time
from pathlib import Path

from statsol.cli import execute
from statsol.config import load_config

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("configs", nargs="*", help="defaults to configs/*.json")
    ap.add_argument("--out", default=str(ROOT / "out"))
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    paths = [Path(p) for p in args.configs] or sorted((ROOT / "configs").glob("*.json"))
    worst = 0
    for path in paths:
        cfg = load_config(path)
        report = Path(args.out) / f"{cfg.name}.ndjson"
        start = time.perf_counter()
        status = execute(cfg, report, args.threads)
        elapsed = time.perf_counter() - start
        worst = max(worst, status)
        print(f"== {cfg.name}: exit {status} in {elapsed:.2f}s -> {report}")
        for line in report.read_text().splitlines():
            r = json.loads(line)
            tag = r["params"].get("phi", r["params"].get("psi", ""))
            order = "-" if r["order_estimate"] is None else f"{r['order_estimate']:.3f}"
            print(f"   {'PASS' if r['pass'] else 'FAIL'} {r['check']:<18} {tag:<14} "
                  f"value={r['value']!s:<24} tol={r['tolerance']!s:<24} order={order}")
    return worst


if __name__ == "__main__":
    raise SystemExit(main())
