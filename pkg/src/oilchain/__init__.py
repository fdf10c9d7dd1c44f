"""Deterministic permissioned-ledger simulator for oil supply chains.

The package follows one oil batch from driller to pump across two kinds of
ledger: per-participant private chains for commercial records and raw
telemetry, and a validator-endorsed consortium chain for everything the
whole supply chain must agree on. Contract state machines monitor shipment
conditions and custody stages, calls are gas-metered from a fixed
calibration table, and every run is a pure function of (scenario, seed).
"""

from .errors import OilchainError

__version__ = "0.1.0"

__all__ = ["OilchainError", "__version__"]
