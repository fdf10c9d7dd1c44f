"""Hop-by-hop custody workflow over the two ledgers.

Each hop pairs two adjacent actors. Initiating it deploys two monitoring
contracts: a product-info instance on the seller's private chain (readable
by seller and buyer only) and a tracking instance on the consortium chain,
linked to the previous hop's tracking contract. The buyer accepts with a
signature over the hop's canonical digest, or with a passphrase; acceptance
records the settlement transfer. Delivery advances the batch's distribution
contract one stage.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from enum import IntEnum

from . import identity, ledger, telemetry
from .contracts.distribution import TraceStage  # noqa: F401  (re-exported)
from .encoding import digest
from .errors import (
    BadCredential,
    InvalidRolePair,
    MissingPredecessor,
    ValidationError,
    WrongStage,
    WrongStatus,
)
from .identity import Actor, Credential, CredentialKind, KeyPair, Role, address_hex
from .runtime import CallStatus, LogicalClock, Runtime


class HopStatus(IntEnum):
    PROPOSED = 0
    ACCEPTED = 1
    IN_TRANSIT = 2
    DELIVERED = 3
    SETTLED = 4


# who may sell to whom, one step down the custody chain
ADJACENT_ROLES = {
    (Role.DRILLER, Role.REFINERY),
    (Role.REFINERY, Role.STORAGE),
    (Role.STORAGE, Role.PUMP),
    (Role.STORAGE, Role.OTHER_FACTORY),
    (Role.PUMP, Role.CONSUMER),
}

# distribution transition fired when a hop with this seller role delivers;
# an OtherFactory buyer ends the branch, so the pump sale never fires there
_DELIVERY_TRANSITION = {
    Role.DRILLER: "readyToFactory",
    Role.REFINERY: "readyToStorage",
    Role.STORAGE: "oilInOilStorage",
    Role.PUMP: "pumpSoldOil",
}

_REQUIRED_ROLES = (Role.DRILLER, Role.REFINERY, Role.STORAGE, Role.PUMP)


@dataclass(frozen=True)
class Setpoints:
    temperature: int
    humidity: int
    pressure: int


@dataclass(frozen=True)
class TermSheet:
    """Commercial terms of one hop."""

    oil_id: str
    oil_name: str
    quantity: int
    price: int
    setpoints: Setpoints
    passphrase: str | None = None
    max_silence_ticks: int | None = None


@dataclass
class Hop:
    index: int
    batch_id: str
    seller: Actor
    buyer: Actor
    terms: TermSheet
    product_contract: bytes
    tracking_contract: bytes
    predecessor: bytes | None
    gateway: KeyPair
    status: HopStatus = HopStatus.PROPOSED
    stored_passphrase: Credential | None = None
    max_silence_ticks: int | None = None
    queued_readings: list[telemetry.SensorReading] = dc_field(default_factory=list)
    readings_fed: int = 0
    weight_delta: int | None = None
    settlement_tick: int | None = None
    delivery_tick: int | None = None

    @property
    def data_address(self) -> bytes:
        return self.gateway.address


@dataclass
class BatchRecord:
    batch_id: str
    oil_name: str
    setpoints: Setpoints
    distribution_contract: bytes
    hops: list[Hop] = dc_field(default_factory=list)


@dataclass(frozen=True)
class Settlement:
    batch_id: str
    hop_index: int
    payer: bytes
    payee: bytes
    amount: int
    tick: int


@dataclass
class Topology:
    """One actor per role plus the consortium validator set."""

    actors: dict[Role, Actor]
    validators: list[KeyPair]

    @classmethod
    def from_seed(cls, roles: list[Role], validator_count: int, seed: int) -> "Topology":
        ledger.quorum_fault_bound(validator_count)
        actors = {role: identity.generate_actor(role, seed) for role in roles}
        validators = [
            identity.generate_device(f"validator:{i}", seed)
            for i in range(validator_count)
        ]
        return cls(actors=actors, validators=validators)


class SupplyChain:
    """Owns the ledgers, runtimes, actors, and batches of one scenario."""

    def __init__(self, topology: Topology, seed: int,
                 faulty_validators: frozenset[bytes] | set[bytes] = frozenset()):
        self.topology = topology
        self.seed = seed
        self.clock = LogicalClock()
        self.batches: dict[str, BatchRecord] = {}
        self.settlements: list[Settlement] = []

        validator_keys = list(topology.validators)
        faulty = frozenset(faulty_validators)

        def endorse(candidate: bytes):
            return ledger.collect_endorsements(candidate, validator_keys, faulty)

        consortium = ledger.new_consortium_chain(
            "consortium", [v.address for v in validator_keys]
        )
        self.consortium_rt = Runtime(consortium, self.clock, endorse)

        self._private_rt: dict[bytes, Runtime] = {}
        for role in sorted(topology.actors, key=lambda r: r.value):
            actor = topology.actors[role]
            chain = ledger.new_private_chain(role.value.lower(), {actor.address})
            self._private_rt[actor.address] = Runtime(chain, self.clock)

    # --- plumbing ---------------------------------------------------------------

    @property
    def consortium_chain(self) -> ledger.Chain:
        return self.consortium_rt.chain

    def private_runtime(self, owner: bytes) -> Runtime:
        return self._private_rt[owner]

    def private_chain(self, owner: bytes) -> ledger.Chain:
        return self._private_rt[owner].chain

    def all_chains(self) -> list[ledger.Chain]:
        chains = [self.consortium_chain]
        chains.extend(rt.chain for rt in self._private_rt.values())
        return chains

    def actor(self, role: Role) -> Actor:
        try:
            return self.topology.actors[role]
        except KeyError:
            raise ValidationError(f"topology has no {role.value} actor") from None

    # --- batch ------------------------------------------------------------------

    def register_batch(self, batch_id: str, oil_name: str,
                       setpoints: Setpoints) -> BatchRecord:
        """Deploy the batch's distribution contract (driller-owned)."""
        if batch_id in self.batches:
            raise ValidationError(f"batch {batch_id!r} already registered")
        for role in _REQUIRED_ROLES:
            if role not in self.topology.actors:
                raise ValidationError(
                    f"topology must include a {role.value} actor to register a batch"
                )
        driller = self.actor(Role.DRILLER)
        address = self.consortium_rt.deploy(
            "OilDistribution",
            {
                "driller": driller.address,
                "factory": self.actor(Role.REFINERY).address,
                "storage": self.actor(Role.STORAGE).address,
                "pump": self.actor(Role.PUMP).address,
                "accurate_hum": setpoints.humidity,
            },
            deployer=driller.address,
            annotations={"record": "distribution", "batch": batch_id},
        )
        record = BatchRecord(batch_id=batch_id, oil_name=oil_name,
                             setpoints=setpoints, distribution_contract=address)
        self.batches[batch_id] = record
        return record

    # --- hop lifecycle -------------------------------------------------------------

    def initiate_hop(self, batch: BatchRecord, seller_role: Role, buyer_role: Role,
                     terms: TermSheet, predecessor: bytes | None = None) -> Hop:
        """Open a hop: contracts deployed, terms entered, status Proposed."""
        if (seller_role, buyer_role) not in ADJACENT_ROLES:
            raise InvalidRolePair(
                f"{seller_role.value} cannot sell to {buyer_role.value}"
            )
        if batch.hops:
            prev = batch.hops[-1]
            if predecessor is None:
                raise MissingPredecessor(
                    f"hop {len(batch.hops) + 1} needs the previous tracking contract"
                )
            if predecessor != prev.tracking_contract:
                raise ValidationError(
                    "predecessor must be the immediately previous hop's tracking contract"
                )
            if prev.buyer.role is not seller_role:
                raise InvalidRolePair(
                    f"custody continuity broken: hop {prev.index} buyer is"
                    f" {prev.buyer.role.value}, not {seller_role.value}"
                )
        elif predecessor is not None:
            raise ValidationError("the first hop of a batch has no predecessor")
        elif seller_role is not Role.DRILLER:
            raise InvalidRolePair("a batch's first hop must be sold by the driller")

        seller = self.actor(seller_role)
        buyer = self.actor(buyer_role)
        index = len(batch.hops) + 1
        gateway = identity.generate_device(
            f"gateway:{batch.batch_id}:{index}", self.seed
        )

        seller_rt = self.private_runtime(seller.address)
        seller_rt.chain.acl.add(buyer.address)

        enter_args = {
            "name": terms.oil_name,
            "oil_id": terms.oil_id,
            "amt": terms.quantity,
            "price": terms.price,
            "actualTemp": terms.setpoints.temperature,
            "actualHum": terms.setpoints.humidity,
            "actualPress": terms.setpoints.pressure,
        }

        product = seller_rt.deploy(
            "CheckProgress",
            {"data_source": gateway.address},
            deployer=seller.address,
            annotations={"record": "product", "batch": batch.batch_id, "hop": index},
        )
        result = seller_rt.call(product, "EnterOil", enter_args, caller=seller.address)
        if result.status is not CallStatus.OK:
            raise ValidationError(f"product terms rejected: {result.revert_reason}")

        tracking = self.consortium_rt.deploy(
            "CheckProgress",
            {"data_source": gateway.address},
            deployer=seller.address,
            annotations={
                "record": "tracking",
                "batch": batch.batch_id,
                "hop": index,
                "seller": seller.address,
                "buyer": buyer.address,
                "seller_role": seller_role.value,
                "buyer_role": buyer_role.value,
                "predecessor": predecessor if predecessor is not None else b"",
                "product": product,
            },
        )
        result = self.consortium_rt.call(
            tracking, "EnterOil", enter_args, caller=seller.address
        )
        if result.status is not CallStatus.OK:
            raise ValidationError(f"tracking terms rejected: {result.revert_reason}")

        stored = None
        if terms.passphrase is not None:
            salt = digest(["hop-salt", batch.batch_id, index, self.seed])[:16]
            stored = identity.make_passphrase_credential(terms.passphrase, salt)

        hop = Hop(
            index=index,
            batch_id=batch.batch_id,
            seller=seller,
            buyer=buyer,
            terms=terms,
            product_contract=product,
            tracking_contract=tracking,
            predecessor=predecessor,
            gateway=gateway,
            stored_passphrase=stored,
            max_silence_ticks=terms.max_silence_ticks,
        )
        batch.hops.append(hop)
        return hop

    def accept_digest(self, hop: Hop) -> bytes:
        """What the buyer signs: hop terms plus both contract addresses."""
        return digest([
            "hop-acceptance",
            hop.batch_id,
            hop.index,
            hop.terms.oil_id,
            hop.terms.oil_name,
            hop.terms.quantity,
            hop.terms.price,
            hop.terms.setpoints.temperature,
            hop.terms.setpoints.humidity,
            hop.terms.setpoints.pressure,
            hop.product_contract,
            hop.tracking_contract,
        ])

    def accept_shipment(self, hop: Hop, credential: Credential) -> Hop:
        """Buyer acceptance: verify the credential, record the settlement.

        A failed credential raises BadCredential and leaves every chain and
        the hop untouched.
        """
        if hop.status is not HopStatus.PROPOSED:
            raise WrongStatus(f"hop {hop.index} is {hop.status.name}, not PROPOSED")

        if credential.kind is CredentialKind.SIGNATURE:
            ok = identity.verify(self.accept_digest(hop), credential.payload,
                                 hop.buyer.public_key)
        elif credential.kind is CredentialKind.PASSPHRASE:
            if hop.stored_passphrase is None:
                ok = False
            else:
                try:
                    attempt = credential.payload.decode("utf-8")
                except UnicodeDecodeError:
                    attempt = ""
                ok = identity.check_passphrase(hop.stored_passphrase, attempt)
        else:
            ok = False
        if not ok:
            raise BadCredential(f"hop {hop.index} acceptance rejected")

        seller_rt = self.private_runtime(hop.seller.address)
        seller_rt.record(
            caller=hop.buyer.address,
            contract=hop.product_contract,
            function="settlement",
            payload={
                "batch": hop.batch_id,
                "hop": hop.index,
                "payer": hop.buyer.address,
                "payee": hop.seller.address,
                "amount": hop.terms.price,
            },
        )
        tick = seller_rt.chain.blocks[-1].timestamp
        self.settlements.append(Settlement(
            batch_id=hop.batch_id,
            hop_index=hop.index,
            payer=hop.buyer.address,
            payee=hop.seller.address,
            amount=hop.terms.price,
            tick=tick,
        ))
        hop.settlement_tick = tick
        hop.status = HopStatus.ACCEPTED
        return hop

    # --- telemetry ------------------------------------------------------------------

    def queue_telemetry(self, hop: Hop, readings: list[telemetry.SensorReading]) -> None:
        hop.queued_readings.extend(readings)

    def feed_hop(self, hop: Hop, readings: list[telemetry.SensorReading] | None = None):
        """Feed explicit readings, or drain the hop's queue."""
        from_queue = readings is None
        if from_queue:
            readings = list(hop.queued_readings)
        results = telemetry.feed(readings, hop, self)
        if from_queue:
            hop.queued_readings.clear()
        return results

    # --- delivery -------------------------------------------------------------------

    def deliver(self, hop: Hop) -> Hop:
        """Close transit: fire the batch's distribution transition."""
        if hop.status not in (HopStatus.ACCEPTED, HopStatus.IN_TRANSIT):
            raise WrongStatus(
                f"hop {hop.index} is {hop.status.name}, cannot deliver"
            )
        if hop.queued_readings:
            raise WrongStatus(
                f"hop {hop.index} still has {len(hop.queued_readings)} unfed readings"
            )

        batch = self.batches[hop.batch_id]
        transition = _DELIVERY_TRANSITION.get(hop.seller.role)
        if transition is not None:
            if transition == "readyToFactory":
                args = {
                    "oil_id": hop.terms.oil_id,
                    "name": hop.terms.oil_name,
                    "price": hop.terms.price,
                    "quantity": hop.terms.quantity,
                }
            else:
                args = {"price": hop.terms.price, "quantity": hop.terms.quantity}
            # the pump sale is triggered by the buying consumer; every other
            # transition is the selling actor's own call
            caller = hop.buyer.address if transition == "pumpSoldOil" else hop.seller.address
            result = self.consortium_rt.call(
                batch.distribution_contract, transition, args, caller=caller
            )
            if result.status is not CallStatus.OK:
                raise WrongStage(result.revert_reason)
            hop.delivery_tick = self.clock.upcoming - 1

        weights = telemetry.telemetry_records(
            self.private_chain(hop.seller.address), hop.product_contract,
            querier=hop.seller.address, kind=telemetry.ReadingKind.WEIGHT,
        )
        if weights:
            hop.weight_delta = weights[-1]["value"] - weights[0]["value"]

        hop.status = HopStatus.DELIVERED
        return hop

    def settle(self, hop: Hop) -> Hop:
        """Final bookkeeping step once delivery is done."""
        if hop.status is not HopStatus.DELIVERED:
            raise WrongStatus(f"hop {hop.index} is {hop.status.name}, not DELIVERED")
        hop.status = HopStatus.SETTLED
        return hop

    # --- audit ---------------------------------------------------------------------

    def trace(self, batch_id: str):
        from .provenance import build_report

        return build_report(self.consortium_chain, batch_id)

    def distribution_state(self, batch_id: str) -> dict:
        batch = self.batches[batch_id]
        return self.consortium_rt.state_of(batch.distribution_contract)


def format_party(actor: Actor) -> str:
    return f"{actor.role.value} {address_hex(actor.address)}"
