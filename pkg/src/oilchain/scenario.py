"""Scenario files in, deterministic run reports out.

A scenario is a JSON document (schema_version 1) describing the topology,
one or more batches, the hops each batch takes, per-hop telemetry profiles
with optional injected faults, and how each buyer accepts. Running one
replays the whole custody workflow; the resulting report is a pure function
of (scenario, seed) and is compared byte-for-byte in tests.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import identity, runtime, telemetry
from .errors import OilchainError, ParseError, ValidationError
from .identity import Role, address_hex
from .telemetry import FaultSpec, ReadingKind, SensorProfile
from .workflow import Setpoints, SupplyChain, TermSheet, Topology

SCENARIO_SCHEMA_VERSION = 1
RUN_REPORT_SCHEMA_VERSION = 1

_ROLE_BY_NAME = {role.value: role for role in Role}
_KIND_BY_NAME = {kind.value: kind for kind in ReadingKind}


@dataclass(frozen=True)
class TelemetrySpec:
    duration: int
    noise_amplitude: int
    kinds: tuple[ReadingKind, ...]
    extra_setpoints: dict[ReadingKind, int | tuple[int, int]] = field(default_factory=dict)
    faults: tuple[FaultSpec, ...] = ()
    max_silence_ticks: int | None = None


@dataclass(frozen=True)
class HopSpec:
    seller: Role
    buyer: Role
    price: int
    quantity: int
    accept_method: str                  # "signature" or "passphrase"
    passphrase: str | None
    telemetry: TelemetrySpec


@dataclass(frozen=True)
class BatchSpec:
    batch_id: str
    oil_name: str
    setpoints: Setpoints
    hops: tuple[HopSpec, ...]


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    validator_count: int
    faulty_validators: int
    roles: tuple[Role, ...]
    batches: tuple[BatchSpec, ...]
    eth_usd: float = runtime.DEFAULT_ETH_USD


@dataclass
class RunResult:
    report: dict
    supply: SupplyChain
    violations_found: bool


# --- parsing ---------------------------------------------------------------------

def _need(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ValidationError(f"{where}: missing required field {key!r}")
    return mapping[key]


def _role(name, where: str) -> Role:
    if name not in _ROLE_BY_NAME:
        raise ValidationError(f"{where}: unknown role {name!r}")
    return _ROLE_BY_NAME[name]


def _kind(name, where: str) -> ReadingKind:
    if name not in _KIND_BY_NAME:
        raise ValidationError(f"{where}: unknown reading kind {name!r}")
    return _KIND_BY_NAME[name]


def _positive_int(value, where: str, minimum: int = 0) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ValidationError(f"{where}: expected an integer >= {minimum}, got {value!r}")
    return value


def load_scenario(path: str | Path) -> Scenario:
    """Parse and validate a scenario file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return parse_scenario(doc, where=str(path.name))


def parse_scenario(doc: dict, where: str = "scenario") -> Scenario:
    if not isinstance(doc, dict):
        raise ValidationError(f"{where}: document must be an object")
    version = _need(doc, "schema_version", where)
    if version != SCENARIO_SCHEMA_VERSION:
        raise ValidationError(
            f"{where}: schema_version {version!r} unsupported"
            f" (expected {SCENARIO_SCHEMA_VERSION})"
        )
    name = _need(doc, "name", where)
    seed = _positive_int(_need(doc, "seed", where), f"{where}.seed")

    topo = _need(doc, "topology", where)
    validators = _positive_int(_need(topo, "validators", f"{where}.topology"),
                               f"{where}.topology.validators", minimum=1)
    if (validators - 1) % 3 != 0:
        raise ValidationError(
            f"{where}.topology.validators: count must be 3f+1, got {validators}"
        )
    faulty = _positive_int(topo.get("faulty_validators", 0),
                           f"{where}.topology.faulty_validators")
    roles = tuple(
        _role(r, f"{where}.topology.roles[{i}]")
        for i, r in enumerate(_need(topo, "roles", f"{where}.topology"))
    )
    if len(set(roles)) != len(roles):
        raise ValidationError(f"{where}.topology.roles: duplicate role")

    batches = []
    for bi, batch_doc in enumerate(_need(doc, "batches", where)):
        bw = f"{where}.batches[{bi}]"
        setp = _need(batch_doc, "setpoints", bw)
        setpoints = Setpoints(
            temperature=_positive_int(_need(setp, "temperature", f"{bw}.setpoints"),
                                      f"{bw}.setpoints.temperature"),
            humidity=_positive_int(_need(setp, "humidity", f"{bw}.setpoints"),
                                   f"{bw}.setpoints.humidity"),
            pressure=_positive_int(_need(setp, "pressure", f"{bw}.setpoints"),
                                   f"{bw}.setpoints.pressure"),
        )
        hops = []
        for hi, hop_doc in enumerate(_need(batch_doc, "hops", bw)):
            hw = f"{bw}.hops[{hi}]"
            accept = hop_doc.get("accept", {"method": "signature"})
            method = accept.get("method", "signature")
            if method not in ("signature", "passphrase"):
                raise ValidationError(f"{hw}.accept.method: unknown method {method!r}")
            passphrase = accept.get("passphrase")
            if method == "passphrase" and not passphrase:
                raise ValidationError(f"{hw}.accept: passphrase method needs a passphrase")
            hops.append(HopSpec(
                seller=_role(_need(hop_doc, "seller", hw), f"{hw}.seller"),
                buyer=_role(_need(hop_doc, "buyer", hw), f"{hw}.buyer"),
                price=_positive_int(_need(hop_doc, "price", hw), f"{hw}.price"),
                quantity=_positive_int(_need(hop_doc, "quantity", hw), f"{hw}.quantity"),
                accept_method=method,
                passphrase=passphrase,
                telemetry=_parse_telemetry(_need(hop_doc, "telemetry", hw),
                                           f"{hw}.telemetry"),
            ))
        batches.append(BatchSpec(
            batch_id=str(_need(batch_doc, "batch_id", bw)),
            oil_name=_need(batch_doc, "oil_name", bw),
            setpoints=setpoints,
            hops=tuple(hops),
        ))
    if not batches:
        raise ValidationError(f"{where}.batches: at least one batch required")

    eth_usd = doc.get("report", {}).get("eth_usd", runtime.DEFAULT_ETH_USD)
    if not isinstance(eth_usd, (int, float)) or eth_usd <= 0:
        raise ValidationError(f"{where}.report.eth_usd: must be a positive number")

    return Scenario(
        name=name,
        seed=seed,
        validator_count=validators,
        faulty_validators=faulty,
        roles=roles,
        batches=tuple(batches),
        eth_usd=float(eth_usd),
    )


def _parse_telemetry(doc: dict, where: str) -> TelemetrySpec:
    duration = _positive_int(_need(doc, "duration", where), f"{where}.duration", minimum=1)
    amplitude = _positive_int(doc.get("noise_amplitude", 0), f"{where}.noise_amplitude")
    kinds = tuple(
        _kind(k, f"{where}.kinds[{i}]") for i, k in enumerate(_need(doc, "kinds", where))
    )
    extra = {}
    for key, value in doc.get("extra_setpoints", {}).items():
        kind = _kind(key, f"{where}.extra_setpoints")
        if kind is ReadingKind.LOCATION:
            if (not isinstance(value, list) or len(value) != 2
                    or not all(isinstance(v, int) for v in value)):
                raise ValidationError(
                    f"{where}.extra_setpoints.Location: expected [lat, lon] integers"
                )
            extra[kind] = (value[0], value[1])
        else:
            extra[kind] = _positive_int(value, f"{where}.extra_setpoints.{key}")
    faults = []
    for fi, fault_doc in enumerate(doc.get("faults", [])):
        fw = f"{where}.faults[{fi}]"
        offset = _need(fault_doc, "offset", fw)
        if not isinstance(offset, int) or isinstance(offset, bool):
            raise ValidationError(f"{fw}.offset: expected an integer")
        faults.append(FaultSpec(
            kind=_kind(_need(fault_doc, "kind", fw), f"{fw}.kind"),
            start=_positive_int(_need(fault_doc, "start", fw), f"{fw}.start"),
            end=_positive_int(_need(fault_doc, "end", fw), f"{fw}.end"),
            offset=offset,
        ))
    silence = doc.get("max_silence_ticks")
    if silence is not None:
        silence = _positive_int(silence, f"{where}.max_silence_ticks")
    return TelemetrySpec(
        duration=duration,
        noise_amplitude=amplitude,
        kinds=kinds,
        extra_setpoints=extra,
        faults=tuple(faults),
        max_silence_ticks=silence,
    )


# --- running ----------------------------------------------------------------------

def _profile_for(hop_spec: HopSpec, setpoints: Setpoints) -> SensorProfile:
    values: dict[ReadingKind, int | tuple[int, int]] = {}
    base = {
        ReadingKind.TEMPERATURE: setpoints.temperature,
        ReadingKind.HUMIDITY: setpoints.humidity,
        ReadingKind.PRESSURE: setpoints.pressure,
    }
    for kind in hop_spec.telemetry.kinds:
        if kind in base:
            values[kind] = base[kind]
        elif kind in hop_spec.telemetry.extra_setpoints:
            values[kind] = hop_spec.telemetry.extra_setpoints[kind]
        else:
            raise ValidationError(
                f"telemetry kind {kind.value} needs an extra_setpoints entry"
            )
    return SensorProfile(
        duration=hop_spec.telemetry.duration,
        setpoints=values,
        noise_amplitude=hop_spec.telemetry.noise_amplitude,
    )


def run_scenario(scenario: Scenario, seed: int | None = None,
                 eth_usd: float | None = None) -> RunResult:
    """Replay a scenario end to end and assemble its report."""
    seed = scenario.seed if seed is None else seed
    eth_usd = scenario.eth_usd if eth_usd is None else eth_usd

    topology = Topology.from_seed(list(scenario.roles), scenario.validator_count, seed)
    faulty = frozenset(
        v.address for v in topology.validators[-scenario.faulty_validators:]
    ) if scenario.faulty_validators else frozenset()
    supply = SupplyChain(topology, seed, faulty)

    for batch_spec in scenario.batches:
        batch = supply.register_batch(batch_spec.batch_id, batch_spec.oil_name,
                                      batch_spec.setpoints)
        predecessor = None
        for hop_spec in batch_spec.hops:
            terms = TermSheet(
                oil_id=batch_spec.batch_id,
                oil_name=batch_spec.oil_name,
                quantity=hop_spec.quantity,
                price=hop_spec.price,
                setpoints=batch_spec.setpoints,
                passphrase=hop_spec.passphrase,
                max_silence_ticks=hop_spec.telemetry.max_silence_ticks,
            )
            hop = supply.initiate_hop(batch, hop_spec.seller, hop_spec.buyer,
                                      terms, predecessor=predecessor)
            predecessor = hop.tracking_contract

            if hop_spec.accept_method == "signature":
                signature = identity.sign(supply.accept_digest(hop),
                                          hop.buyer.private_key)
                credential = identity.signature_credential(signature)
            else:
                credential = identity.passphrase_attempt(hop_spec.passphrase)
            supply.accept_shipment(hop, credential)

            profile = _profile_for(hop_spec, batch_spec.setpoints)
            readings = telemetry.generate_readings(
                profile,
                telemetry.stream_seed(seed, batch.batch_id, hop.index),
                source=hop.data_address,
            )
            for fault in hop_spec.telemetry.faults:
                readings = telemetry.inject_fault(readings, fault)
            supply.queue_telemetry(hop, readings)
            supply.feed_hop(hop)
            supply.deliver(hop)
            supply.settle(hop)

    report = build_run_report(scenario, supply, seed, eth_usd)
    violations = any(not b["clean"] for b in report["batches"])
    return RunResult(report=report, supply=supply, violations_found=violations)


def run_scenario_file(path: str | Path, seed: int | None = None,
                      eth_usd: float | None = None) -> RunResult:
    return run_scenario(load_scenario(path), seed=seed, eth_usd=eth_usd)


# --- reporting ----------------------------------------------------------------------

def build_run_report(scenario: Scenario, supply: SupplyChain, seed: int,
                     eth_usd: float) -> dict:
    chains = []
    for chain in supply.all_chains():
        chains.append({
            "name": chain.name,
            "class": chain.chain_class.value,
            "blocks": len(chain),
            "tip_hash": chain.tip_hash.hex(),
        })

    batches = []
    for batch_spec in scenario.batches:
        batch = supply.batches[batch_spec.batch_id]
        trace = supply.trace(batch.batch_id)
        trace_by_index = {h.index: h for h in trace.hops}
        hops = []
        for hop in batch.hops:
            summary = trace_by_index[hop.index]
            tracking_state = supply.consortium_rt.state_of(hop.tracking_contract)
            hops.append({
                "index": hop.index,
                "seller_role": hop.seller.role.value,
                "buyer_role": hop.buyer.role.value,
                "seller": address_hex(hop.seller.address),
                "buyer": address_hex(hop.buyer.address),
                "status": hop.status.name.title().replace("_", ""),
                "product_contract": address_hex(hop.product_contract),
                "tracking_contract": address_hex(hop.tracking_contract),
                "predecessor": address_hex(hop.predecessor) if hop.predecessor else None,
                "readings_fed": hop.readings_fed,
                "weight_delta": hop.weight_delta,
                "settlement_tick": hop.settlement_tick,
                "final_state": {
                    "temperature": tracking_state["temp_stage"],
                    "humidity": tracking_state["humidity_stage"],
                    "pressure": tracking_state["pressure_stage"],
                    "violation_type": tracking_state["violation_type"],
                },
                "violations": [v.to_dict() for v in summary.violations],
                "accurate_readings": summary.accurate_readings,
                "distribution_events": [d.to_dict() for d in summary.distribution_events],
            })
        batches.append({
            "batch_id": batch.batch_id,
            "oil_name": batch.oil_name,
            "clean": trace.clean,
            "violation_totals": trace.violation_totals,
            "distribution_state": supply.distribution_state(batch.batch_id),
            "hops": hops,
        })

    total_tx_gas = 0
    total_exec_gas = 0
    calls = 0
    for chain in supply.all_chains():
        for block in chain.blocks:
            for tx in block.transactions:
                calls += 1
                total_tx_gas += tx.gas_used
                total_exec_gas += runtime.metered_cost(tx.function).execution
    fiat = {
        speed: runtime.fiat_cost(total_exec_gas, price, eth_usd)
        for speed, price in runtime.GAS_PRICES_GWEI.items()
    }

    settlements = [
        {
            "batch_id": s.batch_id,
            "hop": s.hop_index,
            "payer": address_hex(s.payer),
            "payee": address_hex(s.payee),
            "amount": s.amount,
            "tick": s.tick,
        }
        for s in supply.settlements
    ]

    return {
        "schema_version": RUN_REPORT_SCHEMA_VERSION,
        "scenario": scenario.name,
        "seed": seed,
        "eth_usd": eth_usd,
        "chains": chains,
        "batches": batches,
        "gas": {
            "calls": calls,
            "total_execution_gas": total_exec_gas,
            "total_transaction_gas": total_tx_gas,
            "fiat_usd": fiat,
        },
        "settlements": settlements,
    }


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def report_to_text(report: dict) -> str:
    lines = [
        f"scenario {report['scenario']} (seed {report['seed']})",
        f"eth_usd rate: {report['eth_usd']}",
        "",
        "chains:",
    ]
    for chain in report["chains"]:
        lines.append(
            f"  {chain['name']:<12} {chain['class']:<11} blocks={chain['blocks']:<5}"
            f" tip={chain['tip_hash'][:16]}..."
        )
    for batch in report["batches"]:
        lines.append("")
        lines.append(
            f"batch {batch['batch_id']} ({batch['oil_name']}):"
            f" {'CLEAN' if batch['clean'] else 'VIOLATIONS FOUND'}"
        )
        totals = batch["violation_totals"]
        lines.append(
            "  violations: "
            + ", ".join(f"{k}={v}" for k, v in totals.items())
        )
        lines.append(
            f"  custody stage: {batch['distribution_state']['current_trace']}"
        )
        for hop in batch["hops"]:
            lines.append(
                f"  hop {hop['index']}: {hop['seller_role']} -> {hop['buyer_role']}"
                f"  status={hop['status']}  fed={hop['readings_fed']}"
                f"  violations={len(hop['violations'])}"
            )
            for v in hop["violations"]:
                lines.append(
                    f"    [tick {v['tick']}] {v['kind']} {v['stage']}: {v['message']}"
                )
    gas = report["gas"]
    lines.append("")
    lines.append(
        f"gas: {gas['calls']} calls,"
        f" execution={gas['total_execution_gas']},"
        f" transaction={gas['total_transaction_gas']}"
    )
    fiat = gas["fiat_usd"]
    lines.append(
        "fiat (execution gas): "
        + ", ".join(f"{speed}=${fiat[speed]:.5f}" for speed in fiat)
    )
    lines.append(f"settlements: {len(report['settlements'])}")
    return "\n".join(lines) + "\n"


__all__ = [
    "BatchSpec",
    "HopSpec",
    "OilchainError",
    "RunResult",
    "Scenario",
    "TelemetrySpec",
    "build_run_report",
    "load_scenario",
    "parse_scenario",
    "report_to_json",
    "report_to_text",
    "run_scenario",
    "run_scenario_file",
]
