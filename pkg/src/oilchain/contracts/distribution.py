"""Custody spine for one oil batch: driller to factory to storage to pump.

One instance follows one batch through four monotone stage transitions, each
callable once, in order, by the actor fixed at deployment (the pump sale is
public but still stage-gated). Each transition stamps its date field with
the logical tick of the call and emits one distribution event.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

from ..errors import Unauthorized, WrongStage
from ..identity import address_hex
from .base import ContractBase, Emission, require_address


class TraceStage(IntEnum):
    CREATED = 0
    AT_DRILLER = 1
    AT_FACTORY = 2
    AT_STORAGE = 3
    AT_PUMP = 4
    SOLD = 5


STAGE_LABEL = {
    TraceStage.CREATED: "Created",
    TraceStage.AT_DRILLER: "AtDriller",
    TraceStage.AT_FACTORY: "AtFactory",
    TraceStage.AT_STORAGE: "AtStorage",
    TraceStage.AT_PUMP: "AtPump",
    TraceStage.SOLD: "Sold",
}

MSG_TO_FACTORY = "Crude Oil is Ready to go to the Factory."
MSG_TO_STORAGE = "Refined Oil is Ready to go to the Storage."
MSG_IN_STORAGE = "Oil is stored in the Oil Storage."
MSG_SOLD = "Oil has been Sold at the Pump."

DISTRIBUTION_EVENTS = (
    "InitiateDist",
    "FactoryDistribution",
    "StorageWholesale",
    "PumpOilSold",
)


@dataclass
class OilDistribution(ContractBase):
    """State machine for one batch's custody chain."""

    owner: bytes
    driller_address: bytes
    factory_address: bytes
    storage_address: bytes
    pump_address: bytes
    accurate_hum: int = 0

    current_trace: TraceStage = TraceStage.CREATED
    oil_id: str = ""
    oil_name: str = ""
    drilling_date: int = 0
    factory_dist_start_date: int = 0
    refiner_start_date: int = 0
    pump_start_date: int = 0
    drill_price: int = 0
    factory_price: int = 0
    storage_price: int = 0
    pump_price: int = 0
    driller_sold_amount: int = 0
    factory_sold_amount: int = 0
    storage_sold_amount: int = 0
    pump_sold_amount: int = 0

    KIND = "OilDistribution"
    FUNCTIONS = (
        "readyToFactory",
        "readyToStorage",
        "oilInOilStorage",
        "pumpSoldOil",
    )

    @classmethod
    def create(cls, deployer: bytes, init_args: dict) -> "OilDistribution":
        from ..errors import BadInitArgs

        for key in ("driller", "factory", "storage", "pump"):
            if key not in init_args:
                raise BadInitArgs(f"OilDistribution needs a {key} address")
        hum = init_args.get("accurate_hum", 0)
        if not isinstance(hum, int):
            raise BadInitArgs("accurate_hum must be an integer")
        return cls(
            owner=deployer,
            driller_address=require_address(init_args["driller"], "driller"),
            factory_address=require_address(init_args["factory"], "factory"),
            storage_address=require_address(init_args["storage"], "storage"),
            pump_address=require_address(init_args["pump"], "pump"),
            accurate_hum=hum,
        )

    # --- transitions ----------------------------------------------------------

    def _fn_readytofactory(self, args: dict, caller: bytes, tick: int):
        if caller != self.driller_address:
            raise Unauthorized("only the driller may release oil to the factory")
        if self.current_trace is not TraceStage.CREATED:
            raise WrongStage("batch has already left the driller")
        self.oil_id = args["oil_id"]
        self.oil_name = args["name"]
        self.drill_price = args["price"]
        self.driller_sold_amount = args["quantity"]
        self.drilling_date = tick
        self.current_trace = TraceStage.AT_DRILLER
        return self._emit("InitiateDist", self.driller_address, MSG_TO_FACTORY)

    def _fn_readytostorage(self, args: dict, caller: bytes, tick: int):
        if caller != self.factory_address:
            raise Unauthorized("only the factory may release oil to storage")
        if self.current_trace is not TraceStage.AT_DRILLER:
            raise WrongStage("batch is not at the factory gate")
        self.factory_price = args["price"]
        self.factory_sold_amount = args["quantity"]
        self.factory_dist_start_date = tick
        self.current_trace = TraceStage.AT_FACTORY
        return self._emit("FactoryDistribution", self.factory_address, MSG_TO_STORAGE)

    def _fn_oilinoilstorage(self, args: dict, caller: bytes, tick: int):
        if caller != self.storage_address:
            raise Unauthorized("only the storage operator may book oil in")
        if self.current_trace is not TraceStage.AT_FACTORY:
            raise WrongStage("batch has not arrived from the factory")
        self.storage_price = args["price"]
        self.storage_sold_amount = args["quantity"]
        self.refiner_start_date = tick
        self.current_trace = TraceStage.AT_STORAGE
        return self._emit("StorageWholesale", self.storage_address, MSG_IN_STORAGE)

    def _fn_pumpsoldoil(self, args: dict, caller: bytes, tick: int):
        # public: anyone may trigger the sale, but only from AtStorage
        if self.current_trace is not TraceStage.AT_STORAGE:
            raise WrongStage("batch is not at storage, cannot be sold yet")
        self.pump_price = args["price"]
        self.pump_sold_amount = args["quantity"]
        self.pump_start_date = tick
        self.current_trace = TraceStage.SOLD
        return self._emit("PumpOilSold", self.pump_address, MSG_SOLD)

    def _emit(self, event: str, actor: bytes, message: str):
        emission: Emission = (event, (("ad", address_hex(actor)), ("msg", message)))
        return message, [emission]

    def snapshot(self) -> dict:
        return {
            "kind": self.KIND,
            "owner": address_hex(self.owner),
            "driller_address": address_hex(self.driller_address),
            "factory_address": address_hex(self.factory_address),
            "storage_address": address_hex(self.storage_address),
            "pump_address": address_hex(self.pump_address),
            "accurate_hum": self.accurate_hum,
            "current_trace": STAGE_LABEL[self.current_trace],
            "oil_id": self.oil_id,
            "oil_name": self.oil_name,
            "drilling_date": self.drilling_date,
            "factory_dist_start_date": self.factory_dist_start_date,
            "refiner_start_date": self.refiner_start_date,
            "pump_start_date": self.pump_start_date,
            "drill_price": self.drill_price,
            "factory_price": self.factory_price,
            "storage_price": self.storage_price,
            "pump_price": self.pump_price,
            "driller_sold_amount": self.driller_sold_amount,
            "factory_sold_amount": self.factory_sold_amount,
            "storage_sold_amount": self.storage_sold_amount,
            "pump_sold_amount": self.pump_sold_amount,
        }
