"""Slot-by-slot allocation of charging stations to waiting EVs.

Within each slot events are processed in a fixed order: finished services
release their station, EVs whose stay ends leave, new arrivals join the wait
set, then idle stations are filled from the wait set. Service is
non-preemptive but an EV that departs mid-charge frees its station and counts
as unserved.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

from .fuzzy import FuzzySystem
from .scenario import EvRecord, ScenarioConfig, normalize_inputs

EVENT_COLUMNS = ("slot", "event", "ev_id", "station_id")

# Weights closer than this are ties; sampled centroids of equal sets can
# differ in the last few ulps.
WEIGHT_DECIMALS = 9


class Scheme(str, enum.Enum):
    FLWC = "flwc"
    FCFS = "fcfs"

    def __str__(self):
        return self.value


@dataclass
class StationState:
    id: int
    busy_until_slot: Optional[int] = None
    current_ev: Optional[int] = None
    service_start: Optional[int] = None
    busy_slots_total: int = 0
    served_count: int = 0

    @property
    def idle(self) -> bool:
        return self.current_ev is None

    def start(self, ev: EvRecord, slot: int) -> None:
        self.current_ev = ev.id
        self.service_start = slot
        self.busy_until_slot = slot + ev.required_slots

    def stop(self, slot: int, completed: bool) -> int:
        ev_id = self.current_ev
        self.busy_slots_total += slot - self.service_start
        if completed:
            self.served_count += 1
        self.current_ev = self.busy_until_slot = self.service_start = None
        return ev_id


@dataclass(frozen=True)
class StationSummary:
    station: int
    served: int
    busy_slots: int
    utilization: float


@dataclass
class SimulationResult:
    scheme: Scheme
    n_slots: int
    served_ids: List[int]
    unserved_ids: List[int]
    stations: List[StationState]
    per_slot_queue_len: List[int]
    weights: Dict[int, float] = field(default_factory=dict)
    events: List[Tuple[int, str, int, Optional[int]]] = field(default_factory=list)

    @property
    def per_station(self) -> List[StationSummary]:
        from .metrics import station_utilization

        return [
            StationSummary(s.id, s.served_count, s.busy_slots_total,
                           station_utilization(s, self.n_slots))
            for s in self.stations
        ]

    @property
    def avg_utilization(self) -> float:
        from .metrics import average_utilization

        return average_utilization(self.stations, self.n_slots)

    @property
    def served(self) -> int:
        return len(self.served_ids)

    @property
    def unserved(self) -> int:
        return len(self.unserved_ids)

    def events_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(EVENT_COLUMNS)
        for slot, event, ev_id, station in self.events:
            writer.writerow([slot, event, ev_id, "" if station is None else station])
        return buf.getvalue()


def assign_weights(fleet: Iterable[EvRecord], cfg: ScenarioConfig, fis: FuzzySystem) -> List[EvRecord]:
    """Copies of ``fleet`` with the fuzzy weight filled in."""
    out = []
    for ev in fleet:
        soc, stay = normalize_inputs(ev, cfg)
        out.append(dataclasses.replace(ev, weight=fis.compute_weight(soc, stay)))
    return out


def _priority(ev: EvRecord, scheme: Scheme):
    if scheme is Scheme.FLWC:
        return (-round(ev.weight, WEIGHT_DECIMALS), ev.arrival_slot, ev.id)
    return (ev.arrival_slot, ev.id)


def select_next(waiting: Iterable[EvRecord], scheme, current_slot: Optional[int] = None) -> int:
    """Id of the EV that gets the next free station.

    FLWC takes the highest weight, FCFS the earliest arrival; both break ties
    by arrival slot and then id.
    """
    scheme = Scheme(scheme)
    waiting = list(waiting)
    if not waiting:
        raise ValueError("select_next called with an empty wait set")
    if scheme is Scheme.FLWC and any(ev.weight is None for ev in waiting):
        raise ValueError("FLWC selection needs weighted EVs")
    return min(waiting, key=lambda ev: _priority(ev, scheme)).id


def run_simulation(
    fleet: Iterable[EvRecord],
    cfg: ScenarioConfig,
    scheme,
    fis: Optional[FuzzySystem] = None,
    record_events: bool = False,
) -> SimulationResult:
    scheme = Scheme(scheme)
    fleet = sorted(fleet, key=lambda ev: (ev.arrival_slot, ev.id))
    if scheme is Scheme.FLWC:
        if fis is None:
            fis = FuzzySystem.default()
        fleet = assign_weights(fleet, cfg, fis)
    ids = [ev.id for ev in fleet]
    if len(set(ids)) != len(ids):
        raise ValueError("fleet contains duplicate EV ids")

    n_slots = cfg.n_slots
    stations = [StationState(i) for i in range(cfg.n_stations)]
    by_id = {ev.id: ev for ev in fleet}
    waiting: Dict[int, EvRecord] = {}
    served: List[int] = []
    unserved: List[int] = []
    queue_len: List[int] = []
    events: List[Tuple[int, str, int, Optional[int]]] = []
    log = events.append if record_events else (lambda _e: None)
    next_arrival = 0

    for t in range(n_slots + 1):
        for st in stations:
            if not st.idle and st.busy_until_slot == t:
                ev_id = st.stop(t, completed=True)
                served.append(ev_id)
                log((t, "complete", ev_id, st.id))

        for st in stations:
            if not st.idle and by_id[st.current_ev].departure_slot == t:
                ev_id = st.stop(t, completed=False)
                unserved.append(ev_id)
                log((t, "expire", ev_id, st.id))
        for ev_id in [i for i, ev in waiting.items() if ev.departure_slot <= t]:
            del waiting[ev_id]
            unserved.append(ev_id)
            log((t, "expire", ev_id, None))

        if t == n_slots:
            break

        while next_arrival < len(fleet) and fleet[next_arrival].arrival_slot <= t:
            ev = fleet[next_arrival]
            next_arrival += 1
            log((t, "arrive", ev.id, None))
            if ev.required_slots == 0:
                served.append(ev.id)
                log((t, "complete", ev.id, None))
            else:
                waiting[ev.id] = ev

        idle = [st for st in stations if st.idle]
        while idle:
            candidates = waiting.values()
            if cfg.admit_only_feasible:
                candidates = [ev for ev in candidates if ev.departure_slot - t >= ev.required_slots]
            candidates = list(candidates)
            if not candidates:
                break
            ev_id = select_next(candidates, scheme, t)
            st = idle.pop(0)
            st.start(waiting.pop(ev_id), t)
            log((t, "assign", ev_id, st.id))
        queue_len.append(len(waiting))

    # horizon reached: cut any unfinished service, drop the rest
    for st in stations:
        if not st.idle:
            unserved.append(st.stop(n_slots, completed=False))
    unserved.extend(waiting)
    unserved.extend(ev.id for ev in fleet[next_arrival:])

    return SimulationResult(
        scheme=scheme,
        n_slots=n_slots,
        served_ids=sorted(served),
        unserved_ids=sorted(unserved),
        stations=stations,
        per_slot_queue_len=queue_len,
        weights={ev.id: ev.weight for ev in fleet} if scheme is Scheme.FLWC else {},
        events=events,
    )
