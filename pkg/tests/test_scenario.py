import io
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flwc.scenario import (
    ConfigError,
    EvRecord,
    ScenarioConfig,
    fleet_to_csv,
    normalize_inputs,
    read_fleet_csv,
    required_slots,
    sample_fleet,
    write_fleet_csv,
)

from oracles import ceil_slots

CFG = ScenarioConfig()


def test_table_defaults():
    assert (CFG.n_evs, CFG.n_stations, CFG.n_slots) == (100, 5, 48)
    assert (CFG.battery_capacity, CFG.charge_power, CFG.slot_minutes) == (30.0, 60.0, 15.0)
    assert CFG.n_slots * CFG.slot_minutes == 12 * 60
    assert (CFG.soc_min, CFG.soc_max) == (0.2, 0.5)
    assert (CFG.arrival_mean_min, CFG.arrival_sd_min) == (60.0, 90.0)
    assert (CFG.stay_mean_min, CFG.stay_sd_min) == (60.0, 30.0)


@pytest.mark.parametrize(
    "changes, key",
    [
        ({"n_stations": 0}, "n_stations"),
        ({"soc_min": 0.6}, "soc_min"),
        ({"target_soc": 0.4}, "target_soc"),
        ({"charge_power": -1.0}, "charge_power"),
        ({"n_evs": 2.5}, "n_evs"),
    ],
)
def test_invalid_config_names_key(changes, key):
    with pytest.raises(ConfigError) as err:
        ScenarioConfig(**changes)
    assert err.value.key == key


def test_config_from_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"n_evs": 20, "charge_power": 40, "admit_only_feasible": True}))
    cfg = ScenarioConfig.from_file(path)
    assert cfg.n_evs == 20 and cfg.charge_power == 40.0 and cfg.admit_only_feasible


@pytest.mark.parametrize(
    "payload, key",
    [({"n_cars": 3}, "n_cars"), ({"n_evs": "many"}, "n_evs"), ({"soc_min": True}, "soc_min")],
)
def test_config_file_errors(tmp_path, payload, key):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(payload))
    with pytest.raises(ConfigError) as err:
        ScenarioConfig.from_file(path)
    assert err.value.key == key


# ---------------------------------------------------------------- required_slots


def test_required_slots_half_full():
    # 15 kWh at 15 kWh per slot
    assert required_slots(0.5, CFG) == 1


def test_required_slots_ceiling():
    # 24 kWh -> 24 min -> 2 slots
    assert required_slots(0.2, CFG) == 2


def test_required_slots_at_target():
    assert required_slots(1.0, CFG) == 0


def test_required_slots_domain():
    with pytest.raises(ValueError):
        required_slots(1.1, CFG)


def test_required_slots_float_noise():
    # 0.3 * 30 is 9.000000000000002 in binary floating point
    cfg = ScenarioConfig(charge_power=36.0)
    assert required_slots(0.7, cfg) == 1


@given(st.floats(0.0, 1.0), st.sampled_from([20.0, 40.0, 50.0, 60.0, 100.0]))
def test_required_slots_matches_arithmetic(soc, power):
    cfg = ScenarioConfig(charge_power=power)
    assert required_slots(soc, cfg) == ceil_slots((1.0 - soc) * 30.0, power, 15.0)


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_required_slots_non_increasing(s1, s2):
    lo, hi = sorted((s1, s2))
    assert required_slots(lo, CFG) >= required_slots(hi, CFG)


# ---------------------------------------------------------------- normalize


def test_normalize_inputs():
    ev = EvRecord(0, 0, 0.2, 4, 2)
    assert normalize_inputs(ev, CFG) == (0.2, 0.5)
    ev8 = EvRecord(1, 0, 0.3, 8, 2)
    assert normalize_inputs(ev8, CFG)[1] == 1.0
    ev12 = EvRecord(2, 0, 0.3, 12, 2)
    assert normalize_inputs(ev12, CFG)[1] == 1.0


# ---------------------------------------------------------------- sample_fleet


def test_empty_fleet():
    assert sample_fleet(CFG.replace(n_evs=0)) == []


@pytest.mark.parametrize("seed", [0, 1, 17, 12345])
def test_fleet_ranges(seed):
    fleet = sample_fleet(CFG, seed)
    assert len(fleet) == 100
    assert all(0.2 <= ev.initial_soc <= 0.5 for ev in fleet)
    assert all(1 <= ev.stay_slots <= 8 for ev in fleet)
    assert all(0 <= ev.arrival_slot < CFG.n_slots for ev in fleet)
    assert all(ev.departure_slot <= CFG.n_slots for ev in fleet)
    assert all(ev.required_slots == required_slots(ev.initial_soc, CFG) for ev in fleet)
    keys = [(ev.arrival_slot, ev.id) for ev in fleet]
    assert keys == sorted(keys)
    assert sorted(ev.id for ev in fleet) == list(range(100))


def test_fleet_deterministic():
    assert sample_fleet(CFG, 5) == sample_fleet(CFG, 5)
    assert sample_fleet(CFG.replace(seed=5)) == sample_fleet(CFG, 5)
    assert sample_fleet(CFG, 5) != sample_fleet(CFG, 6)


def test_fleet_statistics():
    fleet = sample_fleet(CFG.replace(n_evs=10_000), 2024)
    socs = np.array([ev.initial_soc for ev in fleet])
    stays = np.array([ev.stay_slots * CFG.slot_minutes for ev in fleet])
    assert abs(socs.mean() - 0.35) <= 0.02
    assert socs.min() >= 0.2 and socs.max() <= 0.5
    assert abs(stays.mean() - 60.0) <= 5.0
    assert stays.min() >= 15 and stays.max() <= 120


def test_late_arrivals_clamped_to_window():
    cfg = CFG.replace(arrival_mean_min=10_000.0, arrival_sd_min=1.0, n_evs=10)
    fleet = sample_fleet(cfg, 0)
    assert all(ev.arrival_slot == cfg.n_slots - 1 for ev in fleet)
    assert all(ev.stay_slots == 1 for ev in fleet)


# ---------------------------------------------------------------- CSV


def test_fleet_csv_round_trip(tmp_path):
    fleet = sample_fleet(CFG, 3)
    path = tmp_path / "fleet.csv"
    write_fleet_csv(fleet, path)
    assert path.read_text().splitlines()[0] == "id,arrival_slot,initial_soc,stay_slots,required_slots"
    assert read_fleet_csv(path) == fleet


def test_fleet_csv_header_checked():
    with pytest.raises(ValueError):
        read_fleet_csv(io.StringIO("id,arrival,soc\n1,2,0.3\n"))


def test_fleet_csv_rejects_bad_rows():
    with pytest.raises(ValueError):
        read_fleet_csv(io.StringIO(fleet_to_csv([]) + "1,0,0.3,0,2\n"))
