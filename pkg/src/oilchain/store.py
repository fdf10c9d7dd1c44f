"""Ledger persistence: one directory per chain, JSON manifest + JSONL blocks.

Layout under a store root:

    <root>/<chain-dir>/manifest.json   chain class, name, ACL or validators, tip
    <root>/<chain-dir>/blocks.jsonl    one self-describing block record per line

Loading re-verifies every chain and refuses anything that fails: a parse
error or a hash/link mismatch raises CorruptLedger naming the first bad
block where one exists.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from . import ledger
from .errors import CorruptLedger

STORE_SCHEMA_VERSION = 1
_MANIFEST = "manifest.json"
_BLOCKS = "blocks.jsonl"


def chain_dir_name(chain: ledger.Chain) -> str:
    if chain.chain_class is ledger.ChainClass.CONSORTIUM:
        return "consortium"
    return f"private-{chain.name}" if not chain.name.startswith("private-") else chain.name


# --- record conversion --------------------------------------------------------

def _event_to_record(e: ledger.Event) -> dict:
    return {"name": e.name, "emitter": e.emitter.hex(), "args": [[k, v] for k, v in e.args]}


def _event_from_record(rec: dict) -> ledger.Event:
    return ledger.Event(
        name=rec["name"],
        emitter=bytes.fromhex(rec["emitter"]),
        args=tuple((k, v) for k, v in rec["args"]),
    )


def _tx_to_record(tx: ledger.Transaction) -> dict:
    return {
        "caller": tx.caller.hex(),
        "contract": tx.contract.hex(),
        "function": tx.function,
        "args": tx.args.hex(),
        "gas_used": tx.gas_used,
        "events": [_event_to_record(e) for e in tx.events],
    }


def _tx_from_record(rec: dict) -> ledger.Transaction:
    return ledger.Transaction(
        caller=bytes.fromhex(rec["caller"]),
        contract=bytes.fromhex(rec["contract"]),
        function=rec["function"],
        args=bytes.fromhex(rec["args"]),
        gas_used=rec["gas_used"],
        events=tuple(_event_from_record(e) for e in rec["events"]),
    )


def block_to_record(block: ledger.Block) -> dict:
    return {
        "index": block.index,
        "prev_hash": block.prev_hash.hex(),
        "timestamp": block.timestamp,
        "transactions": [_tx_to_record(t) for t in block.transactions],
        "endorsements": [
            {"public_key": e.public_key.hex(), "signature": e.signature.hex()}
            for e in block.endorsements
        ],
        "hash": block.hash.hex(),
    }


def block_from_record(rec: dict) -> ledger.Block:
    return ledger.Block(
        index=rec["index"],
        prev_hash=bytes.fromhex(rec["prev_hash"]),
        timestamp=rec["timestamp"],
        transactions=tuple(_tx_from_record(t) for t in rec["transactions"]),
        endorsements=tuple(
            ledger.Endorsement(
                public_key=bytes.fromhex(e["public_key"]),
                signature=bytes.fromhex(e["signature"]),
            )
            for e in rec["endorsements"]
        ),
        hash=bytes.fromhex(rec["hash"]),
    )


# --- save / load ---------------------------------------------------------------

def save_chain(root: Path, chain: ledger.Chain) -> Path:
    directory = root / chain_dir_name(chain)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "schema_version": STORE_SCHEMA_VERSION,
        "class": chain.chain_class.value,
        "name": chain.name,
        "tip_hash": chain.tip_hash.hex(),
    }
    if chain.chain_class is ledger.ChainClass.PRIVATE:
        manifest["acl"] = sorted(a.hex() for a in chain.acl)
    else:
        manifest["validators"] = [v.hex() for v in chain.validators]
    (directory / _MANIFEST).write_text(json.dumps(manifest, indent=2) + "\n")
    with (directory / _BLOCKS).open("w") as fh:
        for block in chain.blocks:
            fh.write(json.dumps(block_to_record(block), separators=(",", ":")) + "\n")
    return directory


def save_store(root: Path, chains: Iterable[ledger.Chain]) -> None:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    for chain in chains:
        save_chain(root, chain)


def load_chain(directory: Path) -> ledger.Chain:
    """Load and re-verify one chain directory. Raises CorruptLedger on any
    parse failure, hash mismatch, or manifest/tip disagreement."""
    directory = Path(directory)
    try:
        manifest = json.loads((directory / _MANIFEST).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CorruptLedger(f"unreadable manifest in {directory.name}: {exc}") from exc

    blocks = []
    try:
        with (directory / _BLOCKS).open() as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                blocks.append(block_from_record(json.loads(line)))
    except (OSError, json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
        raise CorruptLedger(f"unreadable block record in {directory.name}: {exc}") from exc

    if manifest.get("class") == ledger.ChainClass.PRIVATE.value:
        chain = ledger.Chain(
            chain_class=ledger.ChainClass.PRIVATE,
            name=manifest["name"],
            acl={bytes.fromhex(a) for a in manifest.get("acl", [])},
            blocks=blocks,
        )
    else:
        chain = ledger.Chain(
            chain_class=ledger.ChainClass.CONSORTIUM,
            name=manifest["name"],
            validators=tuple(bytes.fromhex(v) for v in manifest.get("validators", [])),
            blocks=blocks,
        )

    report = ledger.verify_chain(chain)
    if not report.valid:
        raise CorruptLedger(
            f"chain {chain.name!r} failed verification,"
            f" first_bad_index={report.first_bad_index}",
            first_bad_index=report.first_bad_index,
        )
    if not blocks or manifest.get("tip_hash") != chain.tip_hash.hex():
        raise CorruptLedger(
            f"chain {chain.name!r} manifest tip does not match block file"
        )
    return chain


def load_store(root: Path) -> dict[str, ledger.Chain]:
    """Load every chain directory under root, keyed by directory name."""
    root = Path(root)
    if not root.is_dir():
        raise CorruptLedger(f"store directory {root} does not exist")
    chains = {}
    for directory in sorted(p for p in root.iterdir() if p.is_dir()):
        if (directory / _MANIFEST).exists():
            chains[directory.name] = load_chain(directory)
    if not chains:
        raise CorruptLedger(f"store directory {root} holds no chains")
    return chains
