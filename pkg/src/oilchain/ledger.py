"""Hash-chained block ledgers: private (ACL-gated) and consortium (endorsed).

A block's hash covers every field except the hash itself, via the canonical
encoding, so any byte of recorded history that changes breaks verification
from that block onward. Consortium blocks additionally carry validator
endorsements: signatures over the candidate body (everything except the
endorsements and the hash), checked against a 2f+1 quorum of a 3f+1
validator set.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Sequence

from . import identity
from .encoding import canon_encode
from .errors import AccessDenied, InvalidValidatorSet, QuorumNotMet

HASH_LEN = 32
GENESIS_PREV_HASH = b"\x00" * HASH_LEN


class ChainClass(Enum):
    PRIVATE = "Private"
    CONSORTIUM = "Consortium"


# --- record types -----------------------------------------------------------

@dataclass(frozen=True)
class Event:
    """A contract emission: name, emitting contract, ordered (name, value) args.

    Arg values are strings or ints only; addresses appear in their 0x-hex
    form so records serialize without guessing types.
    """

    name: str
    emitter: bytes
    args: tuple[tuple[str, str | int], ...]

    def arg(self, name: str) -> str | int:
        for key, value in self.args:
            if key == name:
                return value
        raise KeyError(name)

    def canonical(self) -> list:
        return [self.name, self.emitter, [[k, v] for k, v in self.args]]


@dataclass(frozen=True)
class Transaction:
    """One recorded call: caller, target contract, function, canonical args,
    metered gas, and the events it emitted."""

    caller: bytes
    contract: bytes
    function: str
    args: bytes
    gas_used: int
    events: tuple[Event, ...] = ()

    def canonical(self) -> list:
        return [
            self.caller,
            self.contract,
            self.function,
            self.args,
            self.gas_used,
            [e.canonical() for e in self.events],
        ]


@dataclass(frozen=True)
class Endorsement:
    """A validator's signature over a block's candidate digest.

    Carries the raw public key so quorum can be re-verified from persisted
    data alone; the validator's address is re-derived from it.
    """

    public_key: bytes
    signature: bytes

    @property
    def validator(self) -> bytes:
        return identity.derive_address(self.public_key)

    def canonical(self) -> list:
        return [self.public_key, self.signature]


@dataclass(frozen=True)
class Block:
    index: int
    prev_hash: bytes
    timestamp: int
    transactions: tuple[Transaction, ...]
    endorsements: tuple[Endorsement, ...]
    hash: bytes


@dataclass
class Chain:
    """An append-only block sequence plus its access policy."""

    chain_class: ChainClass
    name: str
    acl: set[bytes] = field(default_factory=set)          # Private only
    validators: tuple[bytes, ...] = ()                     # Consortium only
    blocks: list[Block] = field(default_factory=list)

    @property
    def tip_hash(self) -> bytes:
        return self.blocks[-1].hash

    def __len__(self) -> int:
        return len(self.blocks)


@dataclass(frozen=True)
class VerificationReport:
    valid: bool
    first_bad_index: int | None = None


# --- hashing ----------------------------------------------------------------

def candidate_digest(index: int, prev_hash: bytes, timestamp: int,
                     transactions: Sequence[Transaction]) -> bytes:
    """What validators endorse: everything except endorsements and hash."""
    body = [index, prev_hash, timestamp, [t.canonical() for t in transactions]]
    return hashlib.sha256(canon_encode(body)).digest()


def compute_block_hash(index: int, prev_hash: bytes, timestamp: int,
                       transactions: Sequence[Transaction],
                       endorsements: Sequence[Endorsement]) -> bytes:
    body = [
        index,
        prev_hash,
        timestamp,
        [t.canonical() for t in transactions],
        [e.canonical() for e in endorsements],
    ]
    return hashlib.sha256(canon_encode(body)).digest()


def _sealed_block(index: int, prev_hash: bytes, timestamp: int,
                  transactions: Sequence[Transaction],
                  endorsements: Sequence[Endorsement]) -> Block:
    return Block(
        index=index,
        prev_hash=prev_hash,
        timestamp=timestamp,
        transactions=tuple(transactions),
        endorsements=tuple(endorsements),
        hash=compute_block_hash(index, prev_hash, timestamp, transactions, endorsements),
    )


# --- chain construction -------------------------------------------------------

def quorum_fault_bound(validator_count: int) -> int:
    """f such that validator_count == 3f+1; raises InvalidValidatorSet otherwise."""
    if validator_count < 1 or (validator_count - 1) % 3 != 0:
        raise InvalidValidatorSet(
            f"validator count must be 3f+1, got {validator_count}"
        )
    return (validator_count - 1) // 3


def new_private_chain(name: str, acl: Iterable[bytes]) -> Chain:
    chain = Chain(chain_class=ChainClass.PRIVATE, name=name, acl=set(acl))
    chain.blocks.append(_sealed_block(0, GENESIS_PREV_HASH, 0, (), ()))
    return chain


def new_consortium_chain(name: str, validators: Sequence[bytes]) -> Chain:
    quorum_fault_bound(len(validators))
    chain = Chain(
        chain_class=ChainClass.CONSORTIUM,
        name=name,
        validators=tuple(sorted(validators)),
    )
    chain.blocks.append(_sealed_block(0, GENESIS_PREV_HASH, 0, (), ()))
    return chain


# --- endorsement ------------------------------------------------------------

def collect_endorsements(digest: bytes,
                         validator_keys: Sequence[identity.KeyPair],
                         faulty: frozenset[bytes] | set[bytes] = frozenset(),
                         ) -> list[Endorsement]:
    """Each non-faulty validator signs the candidate digest.

    `faulty` holds addresses of validators simulated as silent; ordering
    follows the given key sequence so output is deterministic.
    """
    out = []
    for kp in validator_keys:
        if kp.address in faulty:
            continue
        out.append(Endorsement(public_key=kp.public_key,
                               signature=identity.sign(digest, kp.private_key)))
    return out


def count_valid_endorsements(digest: bytes, endorsements: Sequence[Endorsement],
                             validators: Sequence[bytes]) -> int:
    """Distinct validators with a correct signature over the digest.

    Raises QuorumNotMet if any endorsement is malformed, signed by a
    non-validator, or carries a bad signature.
    """
    validator_set = set(validators)
    seen: set[bytes] = set()
    for e in endorsements:
        addr = e.validator
        if addr not in validator_set:
            raise QuorumNotMet(f"endorsement from non-validator {identity.address_hex(addr)}")
        if not identity.verify(digest, e.signature, e.public_key):
            raise QuorumNotMet(f"invalid endorsement signature from {identity.address_hex(addr)}")
        seen.add(addr)
    return len(seen)


# --- append / verify ----------------------------------------------------------

def append_block(chain: Chain, transactions: Sequence[Transaction], timestamp: int,
                 endorsements: Sequence[Endorsement] = ()) -> Block:
    """Append a sealed block after policy checks.

    Private chains require every transaction caller to be on the ACL.
    Consortium chains require >= 2f+1 valid, distinct validator endorsements
    over the candidate digest.
    """
    index = len(chain.blocks)
    prev_hash = chain.tip_hash

    if chain.chain_class is ChainClass.PRIVATE:
        for tx in transactions:
            if tx.caller not in chain.acl:
                raise AccessDenied(
                    f"caller {identity.address_hex(tx.caller)} is not on the"
                    f" access list of chain {chain.name!r}"
                )
        endorsements = ()
    else:
        f = quorum_fault_bound(len(chain.validators))
        digest = candidate_digest(index, prev_hash, timestamp, transactions)
        valid = count_valid_endorsements(digest, endorsements, chain.validators)
        if valid < 2 * f + 1:
            raise QuorumNotMet(
                f"need {2 * f + 1} endorsements, got {valid} valid"
            )

    block = _sealed_block(index, prev_hash, timestamp, transactions, endorsements)
    chain.blocks.append(block)
    return block


def verify_chain(chain: Chain) -> VerificationReport:
    """Recompute every hash and link. Valid iff nothing was altered.

    first_bad_index is the earliest block whose stored fields no longer match
    what its contents imply.
    """
    for i, block in enumerate(chain.blocks):
        if block.index != i:
            return VerificationReport(False, i)
        expected_prev = GENESIS_PREV_HASH if i == 0 else chain.blocks[i - 1].hash
        if block.prev_hash != expected_prev:
            return VerificationReport(False, i)
        recomputed = compute_block_hash(
            block.index, block.prev_hash, block.timestamp,
            block.transactions, block.endorsements,
        )
        if recomputed != block.hash:
            return VerificationReport(False, i)
    return VerificationReport(True, None)


def verify_endorsement_quorum(chain: Chain) -> bool:
    """Re-verify every non-genesis consortium block's endorsement quorum."""
    if chain.chain_class is not ChainClass.CONSORTIUM:
        return True
    f = quorum_fault_bound(len(chain.validators))
    for block in chain.blocks[1:]:
        digest = candidate_digest(block.index, block.prev_hash,
                                  block.timestamp, block.transactions)
        try:
            valid = count_valid_endorsements(digest, block.endorsements, chain.validators)
        except QuorumNotMet:
            return False
        if valid < 2 * f + 1:
            return False
    return True


# --- queries ----------------------------------------------------------------

def require_read_access(chain: Chain, querier: bytes | None) -> None:
    """Private chains may only be read by ACL members; consortium reads are open."""
    if chain.chain_class is ChainClass.PRIVATE:
        if querier is None or querier not in chain.acl:
            raise AccessDenied(
                f"querier is not on the access list of chain {chain.name!r}"
            )


def iter_events(chain: Chain) -> Iterator[tuple[Block, Transaction, Event]]:
    """Every event in block order (no access check; internal use)."""
    for block in chain.blocks:
        for tx in block.transactions:
            for event in tx.events:
                yield block, tx, event


def query_events(chain: Chain, contract: bytes | None = None,
                 event_name: str | None = None,
                 block_range: tuple[int, int] | None = None,
                 querier: bytes | None = None) -> list[Event]:
    """Events matching the filters, in block order.

    block_range is an inclusive (start, end) pair of block indices. Reading a
    private chain requires querier to be on its ACL.
    """
    require_read_access(chain, querier)
    out = []
    for block, _tx, event in iter_events(chain):
        if block_range is not None and not (block_range[0] <= block.index <= block_range[1]):
            continue
        if contract is not None and event.emitter != contract:
            continue
        if event_name is not None and event.name != event_name:
            continue
        out.append(event)
    return out
