"""Seeded EV fleet generation for a single parking-lot day."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

FLEET_COLUMNS = ("id", "arrival_slot", "initial_soc", "stay_slots", "required_slots")

# Guards ceil() against float noise such as 0.3 * 30 = 9.000000000000002.
_CEIL_EPS = 1e-9


class ConfigError(ValueError):
    """Invalid scenario configuration; ``key`` names the offending field."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class ScenarioConfig:
    n_evs: int = 100
    n_stations: int = 5
    battery_capacity: float = 30.0  # kWh
    charge_power: float = 60.0  # kW
    target_soc: float = 1.0
    slot_minutes: float = 15.0
    n_slots: int = 48
    arrival_mean_min: float = 60.0
    arrival_sd_min: float = 90.0
    stay_mean_min: float = 60.0
    stay_sd_min: float = 30.0
    soc_min: float = 0.2
    soc_max: float = 0.5
    stay_norm_horizon_min: float = 120.0
    admit_only_feasible: bool = False
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for key in ("n_evs", "n_stations", "n_slots", "seed"):
            value = getattr(self, key)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigError(key, f"must be an integer, got {value!r}")
        if self.n_evs < 0:
            raise ConfigError("n_evs", "must be >= 0")
        if self.seed < 0:
            raise ConfigError("seed", "must be >= 0")
        for key in ("n_stations", "n_slots", "battery_capacity", "charge_power",
                    "slot_minutes", "stay_norm_horizon_min"):
            if not getattr(self, key) > 0:
                raise ConfigError(key, "must be > 0")
        for key in ("arrival_sd_min", "stay_sd_min"):
            if getattr(self, key) < 0:
                raise ConfigError(key, "must be >= 0")
        if not 0.0 <= self.soc_min <= self.soc_max <= 1.0:
            raise ConfigError("soc_min", "need 0 <= soc_min <= soc_max <= 1")
        if not self.soc_max < self.target_soc <= 1.0:
            raise ConfigError("target_soc", "must lie in (soc_max, 1]")
        if self.stay_norm_horizon_min < self.slot_minutes:
            raise ConfigError("stay_norm_horizon_min", "must be at least one slot")
        if not isinstance(self.admit_only_feasible, bool):
            raise ConfigError("admit_only_feasible", "must be a boolean")

    @property
    def energy_per_slot(self) -> float:
        return self.charge_power * self.slot_minutes / 60.0

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        known = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, value in data.items():
            if key not in known:
                raise ConfigError(key, "unknown configuration key")
            default = known[key].default
            if isinstance(default, bool):
                if not isinstance(value, bool):
                    raise ConfigError(key, f"expected a boolean, got {value!r}")
            elif isinstance(default, int):
                if isinstance(value, bool) or not (isinstance(value, int) or
                                                   (isinstance(value, float) and value.is_integer())):
                    raise ConfigError(key, f"expected an integer, got {value!r}")
                value = int(value)
            else:
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ConfigError(key, f"expected a number, got {value!r}")
                value = float(value)
            kwargs[key] = value
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "ScenarioConfig":
        """Load a JSON object whose keys are field names."""
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ConfigError("config", f"{path}: top level must be an object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class EvRecord:
    id: int
    arrival_slot: int
    initial_soc: float
    stay_slots: int
    required_slots: int
    weight: Optional[float] = field(default=None, compare=False)

    @property
    def departure_slot(self) -> int:
        """First slot at which the EV is no longer in the lot."""
        return self.arrival_slot + self.stay_slots


def required_slots(initial_soc: float, cfg: ScenarioConfig) -> int:
    if not 0.0 <= initial_soc <= cfg.target_soc:
        raise ValueError(f"initial_soc {initial_soc} outside [0, {cfg.target_soc}]")
    needed = (cfg.target_soc - initial_soc) * cfg.battery_capacity
    return max(0, math.ceil(needed / cfg.energy_per_slot - _CEIL_EPS))


def normalize_inputs(ev: EvRecord, cfg: ScenarioConfig) -> Tuple[float, float]:
    stay = min(1.0, ev.stay_slots * cfg.slot_minutes / cfg.stay_norm_horizon_min)
    return float(ev.initial_soc), float(stay)


def sample_fleet(cfg: ScenarioConfig, seed: Optional[int] = None) -> List[EvRecord]:
    """Draw ``cfg.n_evs`` vehicles; ``seed`` overrides ``cfg.seed``.

    Arrivals are normal minutes after opening, clamped into the open window
    and floored to a slot. Stays are normal minutes clamped to
    ``[slot_minutes, stay_norm_horizon_min]`` and rounded to whole slots; a
    stay never runs past closing.
    """
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    n = cfg.n_evs
    arrivals = rng.normal(cfg.arrival_mean_min, cfg.arrival_sd_min, n)
    stays = rng.normal(cfg.stay_mean_min, cfg.stay_sd_min, n)
    socs = rng.uniform(cfg.soc_min, cfg.soc_max, n)

    last_start = (cfg.n_slots - 1) * cfg.slot_minutes
    arrival_slots = np.floor(np.clip(arrivals, 0.0, last_start) / cfg.slot_minutes).astype(int)
    stays = np.clip(stays, cfg.slot_minutes, cfg.stay_norm_horizon_min)
    stay_slots = np.maximum(1, np.rint(stays / cfg.slot_minutes).astype(int))
    stay_slots = np.minimum(stay_slots, cfg.n_slots - arrival_slots)

    fleet = [
        EvRecord(
            id=i,
            arrival_slot=int(arrival_slots[i]),
            initial_soc=float(socs[i]),
            stay_slots=int(stay_slots[i]),
            required_slots=required_slots(float(socs[i]), cfg),
        )
        for i in range(n)
    ]
    fleet.sort(key=lambda ev: (ev.arrival_slot, ev.id))
    return fleet


def write_fleet_csv(fleet, dest) -> None:
    """Write to a path or an open text stream."""
    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="") as fh:
            write_fleet_csv(fleet, fh)
        return
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(FLEET_COLUMNS)
    for ev in fleet:
        writer.writerow([ev.id, ev.arrival_slot, repr(ev.initial_soc), ev.stay_slots, ev.required_slots])


def fleet_to_csv(fleet) -> str:
    buf = io.StringIO()
    write_fleet_csv(fleet, buf)
    return buf.getvalue()


def read_fleet_csv(src) -> List[EvRecord]:
    if isinstance(src, (str, Path)):
        with open(src, newline="") as fh:
            return read_fleet_csv(fh)
    reader = csv.DictReader(src)
    if tuple(reader.fieldnames or ()) != FLEET_COLUMNS:
        raise ValueError(f"fleet CSV header must be {','.join(FLEET_COLUMNS)}")
    fleet = []
    for row in reader:
        try:
            ev = EvRecord(
                id=int(row["id"]),
                arrival_slot=int(row["arrival_slot"]),
                initial_soc=float(row["initial_soc"]),
                stay_slots=int(row["stay_slots"]),
                required_slots=int(row["required_slots"]),
            )
        except (TypeError, ValueError) as exc:
            raise ValueError(f"bad fleet row {row}: {exc}") from None
        if ev.arrival_slot < 0 or ev.stay_slots < 1 or ev.required_slots < 0:
            raise ValueError(f"bad fleet row {row}")
        fleet.append(ev)
    fleet.sort(key=lambda ev: (ev.arrival_slot, ev.id))
    return fleet
