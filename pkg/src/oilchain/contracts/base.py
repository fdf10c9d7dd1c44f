"""Shared surface for contract state machines.

A contract is a plain Python object the runtime drives: it validates a call,
mutates its own fields, and returns (return_value, emissions). Emissions are
(event_name, ((arg_name, value), ...)) pairs; the runtime stamps the
emitting address on them. Handlers must validate everything before mutating
anything so a revert leaves state untouched.
"""

from __future__ import annotations

from ..errors import UnknownFunction
from ..identity import ADDRESS_LEN

Emission = tuple[str, tuple[tuple[str, str | int], ...]]


class ContractBase:
    KIND: str = ""
    FUNCTIONS: tuple[str, ...] = ()

    def resolve_function(self, name: str) -> str:
        """Map a (case-insensitive) name to its canonical function name."""
        lowered = name.lower()
        for fn in self.FUNCTIONS:
            if fn.lower() == lowered:
                return fn
        raise UnknownFunction(f"{self.KIND} has no function {name!r}")

    def apply(self, function: str, args: dict, caller: bytes, tick: int):
        handler = getattr(self, "_fn_" + self.resolve_function(function).lower())
        return handler(args, caller, tick)

    def snapshot(self) -> dict:
        raise NotImplementedError


def require_address(value, label: str) -> bytes:
    from ..errors import BadInitArgs

    if not isinstance(value, bytes) or len(value) != ADDRESS_LEN:
        raise BadInitArgs(f"{label} must be a {ADDRESS_LEN}-byte address")
    return value
