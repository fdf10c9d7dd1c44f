"""Sensor streams for shipments in transit.

Readings are integers generated around per-kind setpoints with seeded
uniform noise, so a stream is a pure function of its profile and seed.
Temperature, humidity, and pressure readings drive the hop's tracking
contract; location, weight, leak-alarm, and RFID readings are appended as
plain records to the seller's private chain. Faults are injected by
offsetting a tick window of one kind, which is how out-of-band conditions
are simulated.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Sequence

from . import ledger
from .encoding import canon_decode, digest
from .errors import StaleTelemetry, Unauthorized, WindowOutOfRange, WrongStatus

if TYPE_CHECKING:
    from .workflow import Hop, SupplyChain


class ReadingKind(Enum):
    TEMPERATURE = "Temperature"
    HUMIDITY = "Humidity"
    PRESSURE = "Pressure"
    LOCATION = "Location"
    WEIGHT = "Weight"
    LEAK_ALARM = "LeakAlarm"
    RFID_SCAN = "RfidScan"


# kinds whose readings go through the tracking contract
CHECKED_KINDS = (ReadingKind.TEMPERATURE, ReadingKind.HUMIDITY, ReadingKind.PRESSURE)

CHECK_FUNCTION = {
    ReadingKind.TEMPERATURE: "CheckTemperature",
    ReadingKind.HUMIDITY: "CheckHumidity",
    ReadingKind.PRESSURE: "CheckPressure",
}

RECORD_FUNCTION = "recordTelemetry"

# fixed dispatch order for kinds sharing a tick
_KIND_ORDER = {kind: i for i, kind in enumerate(ReadingKind)}

Value = int | tuple[int, int]


@dataclass(frozen=True)
class SensorReading:
    kind: ReadingKind
    tick: int
    value: Value
    source: bytes


@dataclass(frozen=True)
class SensorProfile:
    """What a hop's gateway emits: one reading per (tick, kind).

    Location setpoints are (lat, lon) pairs in micro-degrees; noise applies
    to each component independently.
    """

    duration: int
    setpoints: dict[ReadingKind, Value]
    noise_amplitude: int = 0


@dataclass(frozen=True)
class FaultSpec:
    """Additive offset applied to one kind over an inclusive tick window."""

    kind: ReadingKind
    start: int
    end: int
    offset: int


@dataclass(frozen=True)
class LocationRecord:
    tick: int
    lat: int
    lon: int
    source: bytes


def stream_seed(scenario_seed: int, batch_id: str, hop_index: int) -> int:
    """Per-hop sub-seed so streams stay stable as scenarios grow."""
    return int.from_bytes(
        digest(["telemetry", batch_id, hop_index, scenario_seed])[:8], "big"
    )


def generate_readings(profile: SensorProfile, seed: int, source: bytes,
                      ) -> list[SensorReading]:
    """Deterministic stream: setpoint plus uniform noise in [-amp, +amp]."""
    rng = random.Random(seed)
    amp = profile.noise_amplitude
    kinds = sorted(profile.setpoints, key=_KIND_ORDER.__getitem__)
    out = []
    for tick in range(profile.duration):
        for kind in kinds:
            setpoint = profile.setpoints[kind]
            if kind is ReadingKind.LOCATION:
                lat, lon = setpoint
                value: Value = (
                    lat + (rng.randint(-amp, amp) if amp else 0),
                    lon + (rng.randint(-amp, amp) if amp else 0),
                )
            else:
                value = setpoint + (rng.randint(-amp, amp) if amp else 0)
            out.append(SensorReading(kind=kind, tick=tick, value=value, source=source))
    return out


def inject_fault(readings: Sequence[SensorReading], fault: FaultSpec,
                 ) -> list[SensorReading]:
    """Offset every reading of fault.kind inside [start, end].

    The window must lie inside the stream's tick range.
    """
    if not readings:
        raise WindowOutOfRange("cannot inject a fault into an empty stream")
    ticks = [r.tick for r in readings]
    lo, hi = min(ticks), max(ticks)
    if fault.start > fault.end or fault.start < lo or fault.end > hi:
        raise WindowOutOfRange(
            f"fault window [{fault.start}, {fault.end}] outside stream range [{lo}, {hi}]"
        )
    out = []
    for r in readings:
        if r.kind is fault.kind and fault.start <= r.tick <= fault.end:
            if r.kind is ReadingKind.LOCATION:
                value: Value = (r.value[0] + fault.offset, r.value[1] + fault.offset)
            else:
                value = r.value + fault.offset
            out.append(SensorReading(r.kind, r.tick, value, r.source))
        else:
            out.append(r)
    return out


# --- feeding ------------------------------------------------------------------

def feed(readings: Sequence[SensorReading], hop: "Hop", supply: "SupplyChain",
         ) -> list:
    """Dispatch a stream into the hop's contracts, in tick order.

    Checked kinds become tracking-contract calls made by the gateway
    address; everything else is recorded on the seller's private chain. The
    hop moves to InTransit on its first feed. Returns the per-check call
    results in dispatch order.
    """
    from .workflow import HopStatus

    if hop.status not in (HopStatus.ACCEPTED, HopStatus.IN_TRANSIT):
        raise WrongStatus(
            f"hop {hop.index} is {hop.status.name}, telemetry needs an accepted shipment"
        )
    for r in readings:
        if r.source != hop.data_address:
            raise Unauthorized(
                f"reading sourced from an address that is not hop {hop.index}'s gateway"
            )

    ordered = sorted(readings, key=lambda r: (r.tick, _KIND_ORDER[r.kind]))
    if hop.max_silence_ticks is not None and ordered:
        last = ordered[0].tick
        for r in ordered:
            if r.tick - last > hop.max_silence_ticks:
                raise StaleTelemetry(
                    f"gap of {r.tick - last} ticks exceeds budget {hop.max_silence_ticks}"
                )
            last = r.tick

    if ordered:
        hop.status = HopStatus.IN_TRANSIT

    seller_rt = supply.private_runtime(hop.seller.address)
    results = []
    for r in ordered:
        if r.kind in CHECK_FUNCTION:
            result = supply.consortium_rt.call(
                hop.tracking_contract,
                CHECK_FUNCTION[r.kind],
                {"value": r.value},
                caller=hop.data_address,
            )
            results.append(result)
        else:
            value = list(r.value) if isinstance(r.value, tuple) else r.value
            seller_rt.record(
                caller=hop.seller.address,
                contract=hop.product_contract,
                function=RECORD_FUNCTION,
                payload={
                    "kind": r.kind.value,
                    "tick": r.tick,
                    "value": value,
                    "source": r.source,
                },
            )
        hop.readings_fed += 1
    return results


def track_location(readings: Sequence[SensorReading], hop: "Hop",
                   supply: "SupplyChain") -> int:
    """Feed only the location fixes from a stream; returns how many."""
    fixes = [r for r in readings if r.kind is ReadingKind.LOCATION]
    feed(fixes, hop, supply)
    return len(fixes)


# --- reading back ----------------------------------------------------------------

def telemetry_records(chain: ledger.Chain, product_contract: bytes,
                      querier: bytes, kind: ReadingKind | None = None) -> list[dict]:
    """Decoded raw-telemetry records for one product contract, oldest first.

    Reading a private chain requires the querier to be on its ACL.
    """
    ledger.require_read_access(chain, querier)
    out = []
    for block in chain.blocks:
        for tx in block.transactions:
            if tx.function != RECORD_FUNCTION or tx.contract != product_contract:
                continue
            payload = canon_decode(tx.args)
            if kind is not None and payload.get("kind") != kind.value:
                continue
            out.append(payload)
    return out


def location_history(chain: ledger.Chain, product_contract: bytes,
                     querier: bytes) -> list[LocationRecord]:
    """Location fixes recorded for one product contract, oldest first."""
    records = telemetry_records(chain, product_contract, querier, ReadingKind.LOCATION)
    return [
        LocationRecord(tick=rec["tick"], lat=rec["value"][0], lon=rec["value"][1],
                       source=rec["source"])
        for rec in records
    ]
