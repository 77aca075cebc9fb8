import json

import pytest

from flwc.cli import UsageError, execute, main, parse_and_validate, render_outputs
from flwc.fuzzy import RuleBase, format_rules
from flwc.scenario import EvRecord, ScenarioConfig, read_fleet_csv, write_fleet_csv


def test_defaults():
    spec = parse_and_validate([])
    assert spec.config == ScenarioConfig()
    assert spec.scheme == "both"
    assert spec.seeds == [0]


def test_override_scheme_and_seed():
    spec = parse_and_validate(["--scheme", "fcfs", "--seed", "7"])
    assert spec.scheme == "fcfs" and spec.seeds == [7]


def test_sweep_must_be_positive():
    with pytest.raises(UsageError, match="--seeds"):
        parse_and_validate(["--seeds", "0"])


def test_seed_and_seeds_exclusive():
    with pytest.raises(UsageError):
        parse_and_validate(["--seed", "1", "--seeds", "3"])


def test_unknown_flag():
    with pytest.raises(UsageError, match="--bogus"):
        parse_and_validate(["--bogus"])


def test_missing_file(tmp_path):
    with pytest.raises(UsageError, match="--rules"):
        parse_and_validate(["--rules", str(tmp_path / "nope.txt")])


def test_bad_config_names_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_stations": -2}))
    with pytest.raises(UsageError, match="n_stations"):
        parse_and_validate(["--config", str(cfg)])


def test_config_seed_used_by_default(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 9, "n_evs": 10}))
    assert parse_and_validate(["--config", str(cfg)]).seeds == [9]


def test_main_usage_exit_code(capsys):
    assert main(["--seeds", "0"]) == 2
    assert "sweep" in capsys.readouterr().err


def test_default_run_writes_four_files(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["fleet.csv", "report.txt", "stations.csv", "summary.csv"]
    summary = (out / "summary.csv").read_text().splitlines()
    assert summary[0] == "scheme,seed,served,unserved,avg_utilization"
    assert [row.split(",")[:2] for row in summary[1:]] == [["flwc", "0"], ["fcfs", "0"]]
    assert len((out / "stations.csv").read_text().splitlines()) == 1 + 2 * 5
    assert "delta served" in (out / "report.txt").read_text()
    assert "FLWC" in capsys.readouterr().out


def test_single_scheme(tmp_path):
    out = tmp_path / "o"
    assert main(["--scheme", "flwc", "--out", str(out)]) == 0
    rows = (out / "summary.csv").read_text().splitlines()[1:]
    assert [r.split(",")[0] for r in rows] == ["flwc"]


def test_fleet_replay(tmp_path):
    fleet = [EvRecord(1, 0, 0.2, 3, 2), EvRecord(2, 0, 0.5, 1, 1)]
    path = tmp_path / "replay.csv"
    write_fleet_csv(fleet, path)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_stations": 1, "n_slots": 8}))
    out = tmp_path / "o"
    assert main(["--config", str(cfg), "--fleet", str(path), "--out", str(out), "--events"]) == 0
    rows = [r.split(",") for r in (out / "summary.csv").read_text().splitlines()[1:]]
    assert [(r[0], r[2], r[3]) for r in rows] == [("flwc", "2", "0"), ("fcfs", "1", "1")]
    assert not (out / "fleet.csv").exists()
    events = (out / "events_flwc_seed0.csv").read_text().splitlines()
    assert events[0] == "slot,event,ev_id,station_id"
    assert "0,assign,2,0" in events


def test_sweep_appends_aggregates(tmp_path):
    out = tmp_path / "o"
    assert main(["--seeds", "3", "--out", str(out)]) == 0
    rows = [r.split(",") for r in (out / "summary.csv").read_text().splitlines()[1:]]
    assert len(rows) == 3 * 2 + 4
    assert [r[1] for r in rows[-4:]] == ["mean", "sd", "mean", "sd"]
    assert not (out / "fleet.csv").exists()


def test_rules_flag_changes_result(tmp_path):
    rules = tmp_path / "flat.txt"
    rules.write_text(format_rules(RuleBase.constant("MW")))
    files = render_outputs(parse_and_validate(["--rules", str(rules)]))
    rows = [r.split(",") for r in files["summary.csv"].splitlines()[1:]]
    assert rows[0][2:] == rows[1][2:]


def test_fleet_csv_output_replays(tmp_path):
    out = tmp_path / "o"
    assert main(["--seed", "3", "--out", str(out)]) == 0
    first = (out / "summary.csv").read_text()
    out2 = tmp_path / "o2"
    assert main(["--fleet", str(out / "fleet.csv"), "--seed", "3", "--out", str(out2)]) == 0
    assert (out2 / "summary.csv").read_text() == first
    assert len(read_fleet_csv(out / "fleet.csv")) == 100


def test_io_failure_leaves_no_partial_output(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    spec = parse_and_validate(["--out", str(blocker / "sub")])
    assert execute(spec) == 1
    assert "I/O error" in capsys.readouterr().err


def test_bad_rule_file_exits_nonzero(tmp_path, capsys):
    rules = tmp_path / "r.txt"
    rules.write_text("VL VS -> HW\n")
    assert main(["--rules", str(rules), "--out", str(tmp_path / "o")]) == 2
    assert "25 rules" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()
