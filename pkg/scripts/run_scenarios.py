#!/usr/bin/env python3
"""Run every bundled scenario and print a one-line summary per batch.

Usage:
    python scripts/run_scenarios.py [--seed N]
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from oilchain import scenario  # noqa: E402

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "scenarios"


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args()

    for path in sorted(SCENARIO_DIR.glob("*.json")):
        started = time.perf_counter()
        result = scenario.run_scenario_file(path, seed=args.seed)
        elapsed = time.perf_counter() - started
        for batch in result.report["batches"]:
            totals = batch["violation_totals"]
            flagged = ", ".join(f"{k}={v}" for k, v in totals.items() if v)
            print(
                f"{path.stem:<24} batch {batch['batch_id']}"
                f" {'CLEAN' if batch['clean'] else 'VIOLATIONS: ' + flagged:<28}"
                f" stage={batch['distribution_state']['current_trace']:<10}"
                f" blocks={result.report['chains'][0]['blocks']:<5}"
                f" {elapsed:.2f}s"
            )
    return 0


if __name__ == "__main__":
    sys.exit(main())
