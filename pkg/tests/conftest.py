"""Shared fixtures: deterministic actors, chains, and a wired supply chain."""

from __future__ import annotations

import random
from dataclasses import replace
from pathlib import Path

import pytest

from oilchain import identity, ledger
from oilchain.identity import Role
from oilchain.runtime import LogicalClock, Runtime
from oilchain.workflow import Setpoints, SupplyChain, TermSheet, Topology

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "scenarios"

FIVE_ROLES = [Role.DRILLER, Role.REFINERY, Role.STORAGE, Role.PUMP, Role.CONSUMER]


@pytest.fixture
def topology() -> Topology:
    return Topology.from_seed(FIVE_ROLES, validator_count=4, seed=7)


@pytest.fixture
def supply(topology) -> SupplyChain:
    return SupplyChain(topology, seed=7)


@pytest.fixture
def setpoints() -> Setpoints:
    return Setpoints(temperature=22, humidity=10, pressure=8)


def standard_terms(setpoints: Setpoints, price: int = 100, quantity: int = 10,
                   passphrase: str | None = None) -> TermSheet:
    return TermSheet(oil_id="101", oil_name="Petrol", quantity=quantity,
                     price=price, setpoints=setpoints, passphrase=passphrase)


def make_validators(count: int, seed: int = 99) -> list[identity.KeyPair]:
    return [identity.generate_device(f"validator:{i}", seed) for i in range(count)]


def make_consortium(count: int = 4, seed: int = 99):
    """(chain, validator keypairs) with a fresh genesis block."""
    validators = make_validators(count, seed)
    chain = ledger.new_consortium_chain("consortium", [v.address for v in validators])
    return chain, validators


def consortium_runtime(count: int = 4, seed: int = 99):
    """(runtime, validators, clock) over a fresh consortium chain."""
    chain, validators = make_consortium(count, seed)
    clock = LogicalClock()

    def endorse(digest: bytes):
        return ledger.collect_endorsements(digest, validators)

    return Runtime(chain, clock, endorse), validators, clock


# --- random chains and single-byte mutations ---------------------------------------
#
# Used by the tamper-evidence tests: build a chain with arbitrary content,
# flip one byte (or one integer bit) somewhere, and expect verification to
# point at or before the mutated block.

def build_random_chain(rng: random.Random, n_blocks: int,
                       consortium: bool = False) -> ledger.Chain:
    callers = [bytes([i]) * 20 for i in range(1, 4)]
    if consortium:
        validators = make_validators(4, seed=rng.randrange(2**31))
        chain = ledger.new_consortium_chain("consortium", [v.address for v in validators])
    else:
        chain = ledger.new_private_chain("scratch", set(callers))
    for b in range(n_blocks - 1):
        txs = []
        for _ in range(rng.randint(1, 3)):
            events = tuple(
                ledger.Event(
                    name=rng.choice(["PressureViolation", "InitiateDist", "oilAdded"]),
                    emitter=rng.randbytes(20),
                    args=(("addr", "0x" + rng.randbytes(4).hex()),
                          ("msg", rng.choice(["Lower Pressure", "Accurate Humidity"]))),
                )
                for _ in range(rng.randint(0, 2))
            )
            txs.append(ledger.Transaction(
                caller=rng.choice(callers),
                contract=rng.randbytes(20),
                function=rng.choice(["CheckPressure", "EnterOil", "settlement"]),
                args=rng.randbytes(rng.randint(1, 24)),
                gas_used=rng.randint(21000, 140000),
                events=events,
            ))
        timestamp = b + 1
        if consortium:
            digest = ledger.candidate_digest(len(chain.blocks), chain.tip_hash,
                                             timestamp, txs)
            ledger.append_block(chain, txs, timestamp,
                                ledger.collect_endorsements(digest, validators))
        else:
            ledger.append_block(chain, txs, timestamp)
    return chain


def _flip_bytes(data: bytes, rng: random.Random) -> bytes:
    pos = rng.randrange(len(data))
    return data[:pos] + bytes([data[pos] ^ (1 << rng.randrange(8))]) + data[pos + 1:]


def _flip_str(text: str, rng: random.Random) -> str:
    pos = rng.randrange(len(text))
    replacement = "x" if text[pos] != "x" else "y"
    return text[:pos] + replacement + text[pos + 1:]


def _mutate_event(event: ledger.Event, rng: random.Random) -> ledger.Event:
    choice = rng.choice(["name", "emitter", "arg"])
    if choice == "name":
        return replace(event, name=_flip_str(event.name, rng))
    if choice == "emitter":
        return replace(event, emitter=_flip_bytes(event.emitter, rng))
    idx = rng.randrange(len(event.args))
    key, value = event.args[idx]
    new_value = _flip_str(value, rng) if isinstance(value, str) else value ^ 1
    args = list(event.args)
    args[idx] = (key, new_value)
    return replace(event, args=tuple(args))


def _mutate_tx(tx: ledger.Transaction, rng: random.Random) -> ledger.Transaction:
    fields = ["caller", "contract", "function", "gas_used"]
    if tx.args:
        fields.append("args")
    if tx.events:
        fields.append("events")
    choice = rng.choice(fields)
    if choice == "caller":
        return replace(tx, caller=_flip_bytes(tx.caller, rng))
    if choice == "contract":
        return replace(tx, contract=_flip_bytes(tx.contract, rng))
    if choice == "function":
        return replace(tx, function=_flip_str(tx.function, rng))
    if choice == "gas_used":
        return replace(tx, gas_used=tx.gas_used ^ 1)
    if choice == "args":
        return replace(tx, args=_flip_bytes(tx.args, rng))
    events = list(tx.events)
    idx = rng.randrange(len(events))
    events[idx] = _mutate_event(events[idx], rng)
    return replace(tx, events=tuple(events))


def mutate_chain(chain: ledger.Chain, rng: random.Random) -> tuple[ledger.Chain, int]:
    """Copy the chain with a single-byte mutation somewhere in one block.

    Returns (mutated_chain, index of the mutated block).
    """
    blocks = list(chain.blocks)
    i = rng.randrange(len(blocks))
    block = blocks[i]
    fields = ["index", "prev_hash", "timestamp", "hash"]
    if block.transactions:
        fields.append("transactions")
    if block.endorsements:
        fields.append("endorsements")
    choice = rng.choice(fields)
    if choice == "index":
        block = replace(block, index=block.index ^ 1)
    elif choice == "prev_hash":
        block = replace(block, prev_hash=_flip_bytes(block.prev_hash, rng))
    elif choice == "timestamp":
        block = replace(block, timestamp=block.timestamp ^ 1)
    elif choice == "hash":
        block = replace(block, hash=_flip_bytes(block.hash, rng))
    elif choice == "transactions":
        txs = list(block.transactions)
        idx = rng.randrange(len(txs))
        txs[idx] = _mutate_tx(txs[idx], rng)
        block = replace(block, transactions=tuple(txs))
    else:
        endorsements = list(block.endorsements)
        idx = rng.randrange(len(endorsements))
        e = endorsements[idx]
        if rng.random() < 0.5:
            endorsements[idx] = replace(e, public_key=_flip_bytes(e.public_key, rng))
        else:
            endorsements[idx] = replace(e, signature=_flip_bytes(e.signature, rng))
        block = replace(block, endorsements=tuple(endorsements))
    blocks[i] = block
    mutated = ledger.Chain(
        chain_class=chain.chain_class,
        name=chain.name,
        acl=set(chain.acl),
        validators=chain.validators,
        blocks=blocks,
    )
    return mutated, i
