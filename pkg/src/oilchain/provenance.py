"""Reverse traceability: rebuild a batch's history from ledger contents alone.

The walk starts at the batch's final hop and follows predecessor links back
to the first, so the report covers the whole custody chain or fails loudly.
Everything here is read-only and derived from the consortium chain: hop
linkage from deployment records, condition history from violation events,
custody movement from distribution events.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import ledger
from .contracts.distribution import DISTRIBUTION_EVENTS
from .encoding import canon_decode
from .errors import CorruptLedger, UnknownBatch
from .identity import address_hex

REPORT_SCHEMA_VERSION = 1

VIOLATION_EVENTS = {
    "TemperatureViolation": "Temperature",
    "HumidityViolation": "Humidity",
    "PressureViolation": "Pressure",
}

_STAGE_FROM_WORD = {"Higher": "High", "Lower": "Low", "Accurate": "Accurate"}

# which hop (by seller role) each distribution event belongs to
_EVENT_SELLER_ROLE = {
    "InitiateDist": "Driller",
    "FactoryDistribution": "Refinery",
    "StorageWholesale": "Storage",
    "PumpOilSold": "Pump",
}


@dataclass(frozen=True)
class ViolationEntry:
    kind: str
    stage: str          # High or Low
    tick: int
    message: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "stage": self.stage, "tick": self.tick,
                "message": self.message}


@dataclass(frozen=True)
class DistributionEntry:
    name: str
    tick: int
    actor: str
    message: str

    def to_dict(self) -> dict:
        return {"name": self.name, "tick": self.tick, "actor": self.actor,
                "message": self.message}


@dataclass
class HopSummary:
    index: int
    seller_role: str
    buyer_role: str
    seller: str
    buyer: str
    product_contract: str
    tracking_contract: str
    predecessor: str | None
    violations: list[ViolationEntry] = field(default_factory=list)
    accurate_readings: int = 0
    distribution_events: list[DistributionEntry] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "seller_role": self.seller_role,
            "buyer_role": self.buyer_role,
            "seller": self.seller,
            "buyer": self.buyer,
            "product_contract": self.product_contract,
            "tracking_contract": self.tracking_contract,
            "predecessor": self.predecessor,
            "violations": [v.to_dict() for v in self.violations],
            "accurate_readings": self.accurate_readings,
            "distribution_events": [d.to_dict() for d in self.distribution_events],
        }


@dataclass
class ProvenanceReport:
    batch_id: str
    hops: list[HopSummary]
    violation_totals: dict[str, int]
    clean: bool

    def to_dict(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "batch_id": self.batch_id,
            "clean": self.clean,
            "violation_totals": dict(self.violation_totals),
            "hops": [h.to_dict() for h in self.hops],
        }

    def to_text(self) -> str:
        lines = [
            f"batch {self.batch_id}: {'CLEAN' if self.clean else 'VIOLATIONS FOUND'}",
            "violation totals: "
            + ", ".join(f"{k}={v}" for k, v in self.violation_totals.items()),
        ]
        for hop in self.hops:
            lines.append(
                f"  hop {hop.index}: {hop.seller_role} -> {hop.buyer_role}"
                f"  tracking={hop.tracking_contract}"
            )
            lines.append(
                f"    accurate readings: {hop.accurate_readings},"
                f" violations: {len(hop.violations)}"
            )
            for v in hop.violations:
                lines.append(f"    [tick {v.tick}] {v.kind} {v.stage}: {v.message}")
            for d in hop.distribution_events:
                lines.append(f"    [tick {d.tick}] {d.name}: {d.message}")
        return "\n".join(lines) + "\n"


def _deployment_records(chain: ledger.Chain):
    """(meta, contract_address) for every annotated deployment on the chain."""
    for block in chain.blocks:
        for tx in block.transactions:
            if tx.function != "constructor":
                continue
            record = canon_decode(tx.args)
            meta = record.get("meta")
            if meta:
                yield meta, tx.contract


def build_report(chain: ledger.Chain, batch_id: str) -> ProvenanceReport:
    """Assemble the batch's report by walking predecessor links backwards."""
    tracking_meta: dict[bytes, dict] = {}
    distribution_contract: bytes | None = None
    for meta, address in _deployment_records(chain):
        if meta.get("batch") != batch_id:
            continue
        if meta.get("record") == "tracking":
            tracking_meta[address] = meta
        elif meta.get("record") == "distribution":
            distribution_contract = address

    if not tracking_meta:
        raise UnknownBatch(f"no hops recorded for batch {batch_id!r}")

    # the final hop is the one no other hop points back to
    referenced = {
        meta["predecessor"] for meta in tracking_meta.values() if meta["predecessor"]
    }
    tips = [addr for addr in tracking_meta if addr not in referenced]
    if len(tips) != 1:
        raise CorruptLedger(
            f"batch {batch_id!r} predecessor links do not form a single chain"
        )

    ordered: list[bytes] = []
    cursor: bytes | None = tips[0]
    while cursor:
        if cursor in ordered:
            raise CorruptLedger(f"batch {batch_id!r} predecessor links form a cycle")
        ordered.append(cursor)
        if cursor not in tracking_meta:
            raise CorruptLedger(
                f"batch {batch_id!r} predecessor link leads outside the batch"
            )
        cursor = tracking_meta[cursor]["predecessor"] or None
    if len(ordered) != len(tracking_meta):
        raise CorruptLedger(
            f"batch {batch_id!r} has hops unreachable from the final hop"
        )
    ordered.reverse()

    summaries = []
    by_tracking: dict[bytes, HopSummary] = {}
    for addr in ordered:
        meta = tracking_meta[addr]
        summary = HopSummary(
            index=meta["hop"],
            seller_role=meta["seller_role"],
            buyer_role=meta["buyer_role"],
            seller=address_hex(meta["seller"]),
            buyer=address_hex(meta["buyer"]),
            product_contract=address_hex(meta["product"]),
            tracking_contract=address_hex(addr),
            predecessor=address_hex(meta["predecessor"]) if meta["predecessor"] else None,
        )
        summaries.append(summary)
        by_tracking[addr] = summary
    by_seller_role = {s.seller_role: s for s in summaries}

    totals = {"Temperature": 0, "Humidity": 0, "Pressure": 0}
    for block, _tx, event in ledger.iter_events(chain):
        if event.name in VIOLATION_EVENTS and event.emitter in by_tracking:
            message = str(event.arg("msg"))
            stage = _STAGE_FROM_WORD[message.split(" ", 1)[0]]
            summary = by_tracking[event.emitter]
            if stage == "Accurate":
                summary.accurate_readings += 1
            else:
                kind = VIOLATION_EVENTS[event.name]
                summary.violations.append(ViolationEntry(
                    kind=kind, stage=stage, tick=block.timestamp, message=message,
                ))
                totals[kind] += 1
        elif (event.name in DISTRIBUTION_EVENTS
              and distribution_contract is not None
              and event.emitter == distribution_contract):
            summary = by_seller_role.get(_EVENT_SELLER_ROLE[event.name])
            if summary is not None:
                summary.distribution_events.append(DistributionEntry(
                    name=event.name,
                    tick=block.timestamp,
                    actor=str(event.arg("ad")),
                    message=str(event.arg("msg")),
                ))

    clean = not any(totals.values())
    return ProvenanceReport(batch_id=batch_id, hops=summaries,
                            violation_totals=totals, clean=clean)
