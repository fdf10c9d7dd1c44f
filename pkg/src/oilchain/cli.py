"""Command-line entry point.

Subcommands:

    run         replay a scenario file, print its report, optionally persist
    trace       rebuild a batch's provenance report from a persisted store
    gas-report  print the per-function gas and fiat cost table
    verify      re-verify every chain in a persisted store

Exit codes: 0 on success with nothing flagged, 1 on operational errors
(bad input, corrupt store, unknown batch), 2 when violations are found.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import ledger, provenance, runtime, scenario, store
from .errors import OilchainError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATIONS = 2


def _persist_run(result: scenario.RunResult, root: Path) -> None:
    store.save_store(root, result.supply.all_chains())
    (root / "report.json").write_text(scenario.report_to_json(result.report))


def _cmd_run(args) -> int:
    result = scenario.run_scenario_file(args.scenario, seed=args.seed,
                                        eth_usd=args.eth_usd)
    if args.store:
        _persist_run(result, Path(args.store))
    if args.format == "structured":
        sys.stdout.write(scenario.report_to_json(result.report))
    else:
        sys.stdout.write(scenario.report_to_text(result.report))
    return EXIT_VIOLATIONS if result.violations_found else EXIT_OK


def _cmd_trace(args) -> int:
    chains = store.load_store(Path(args.store))
    consortium = None
    for chain in chains.values():
        if chain.chain_class is ledger.ChainClass.CONSORTIUM:
            consortium = chain
            break
    if consortium is None:
        print("error: store holds no consortium chain", file=sys.stderr)
        return EXIT_ERROR
    report = provenance.build_report(consortium, args.batch_id)
    if args.format == "structured":
        sys.stdout.write(json.dumps(report.to_dict(), indent=2) + "\n")
    else:
        sys.stdout.write(report.to_text())
    return EXIT_OK if report.clean else EXIT_VIOLATIONS


def _cmd_gas_report(args) -> int:
    rows = runtime.gas_report(eth_usd=args.eth_usd or runtime.DEFAULT_ETH_USD)
    if args.format == "structured":
        doc = {
            "schema_version": scenario.RUN_REPORT_SCHEMA_VERSION,
            "eth_usd": args.eth_usd or runtime.DEFAULT_ETH_USD,
            "gas_prices_gwei": runtime.GAS_PRICES_GWEI,
            "functions": rows,
        }
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
        return EXIT_OK
    header = (f"{'function':<18} {'exec gas':>9} {'tx gas':>9}"
              f" {'slow':>10} {'avg':>10} {'fast':>10} {'fastest':>10}")
    print(header)
    print("-" * len(header))
    for row in rows:
        print(
            f"{row['function']:<18} {row['execution_gas']:>9} {row['transaction_gas']:>9}"
            f" {row['usd_slow']:>10.5f} {row['usd_avg']:>10.5f}"
            f" {row['usd_fast']:>10.5f} {row['usd_fastest']:>10.5f}"
        )
    return EXIT_OK


def _cmd_verify(args) -> int:
    chains = store.load_store(Path(args.store))
    lines = []
    ok = True
    for name, chain in chains.items():
        quorum = ledger.verify_endorsement_quorum(chain)
        ok = ok and quorum
        status = "ok" if quorum else "QUORUM FAILED"
        lines.append({
            "chain": name,
            "class": chain.chain_class.value,
            "blocks": len(chain),
            "tip_hash": chain.tip_hash.hex(),
            "status": status,
        })
    if args.format == "structured":
        sys.stdout.write(json.dumps({"chains": lines}, indent=2) + "\n")
    else:
        for line in lines:
            print(f"{line['chain']:<20} {line['class']:<11} blocks={line['blocks']:<5}"
                  f" {line['status']}")
    return EXIT_OK if ok else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oilchain",
        description="Deterministic permissioned-ledger simulator for oil supply chains.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="replay a scenario file")
    p_run.add_argument("scenario", help="path to a scenario JSON file")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the scenario's seed")
    p_run.add_argument("--store", default=None,
                       help="directory to persist ledgers and the report into")
    p_run.add_argument("--eth-usd", type=float, default=None,
                       help="override the fiat conversion rate")
    p_run.add_argument("--format", choices=("text", "structured"), default="text")
    p_run.set_defaults(fn=_cmd_run)

    p_trace = sub.add_parser("trace", help="trace a batch through a persisted store")
    p_trace.add_argument("batch_id")
    p_trace.add_argument("--store", required=True)
    p_trace.add_argument("--format", choices=("text", "structured"), default="text")
    p_trace.set_defaults(fn=_cmd_trace)

    p_gas = sub.add_parser("gas-report", help="print the gas calibration table")
    p_gas.add_argument("--eth-usd", type=float, default=None)
    p_gas.add_argument("--format", choices=("text", "structured"), default="text")
    p_gas.set_defaults(fn=_cmd_gas_report)

    p_verify = sub.add_parser("verify", help="re-verify a persisted store")
    p_verify.add_argument("--store", required=True)
    p_verify.add_argument("--format", choices=("text", "structured"), default="text")
    p_verify.set_defaults(fn=_cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except OilchainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
