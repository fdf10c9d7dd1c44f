#!/usr/bin/env python3
"""Sweep sensor noise amplitude and report how many violations each level flags.

With amplitude 0 every reading sits on its setpoint and the trace stays
clean; each extra unit of noise pushes more readings out of band. Useful for
eyeballing how sensitive the monitoring contract is to sensor jitter.

Usage:
    python scripts/noise_sweep.py [--seed N] [--max-amplitude A]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from oilchain import scenario  # noqa: E402

SCENARIO = Path(__file__).resolve().parents[1] / "scenarios" / "happy_path.json"


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--max-amplitude", type=int, default=4)
    args = parser.parse_args()

    base = scenario.load_scenario(SCENARIO)
    print(f"{'amplitude':>9} {'violations':>10} {'accurate':>9}")
    for amplitude in range(args.max_amplitude + 1):
        batches = []
        for batch in base.batches:
            hops = tuple(
                scenario.HopSpec(
                    seller=h.seller, buyer=h.buyer, price=h.price, quantity=h.quantity,
                    accept_method=h.accept_method, passphrase=h.passphrase,
                    telemetry=scenario.TelemetrySpec(
                        duration=h.telemetry.duration,
                        noise_amplitude=amplitude,
                        kinds=h.telemetry.kinds,
                        extra_setpoints=h.telemetry.extra_setpoints,
                        faults=h.telemetry.faults,
                        max_silence_ticks=h.telemetry.max_silence_ticks,
                    ),
                )
                for h in batch.hops
            )
            batches.append(scenario.BatchSpec(
                batch_id=batch.batch_id, oil_name=batch.oil_name,
                setpoints=batch.setpoints, hops=hops,
            ))
        swept = scenario.Scenario(
            name=f"{base.name}-amp{amplitude}", seed=base.seed,
            validator_count=base.validator_count,
            faulty_validators=base.faulty_validators,
            roles=base.roles, batches=tuple(batches), eth_usd=base.eth_usd,
        )
        result = scenario.run_scenario(swept, seed=args.seed)
        violations = sum(
            sum(b["violation_totals"].values()) for b in result.report["batches"]
        )
        accurate = sum(
            h["accurate_readings"]
            for b in result.report["batches"] for h in b["hops"]
        )
        print(f"{amplitude:>9} {violations:>10} {accurate:>9}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
