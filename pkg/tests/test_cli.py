import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from congestion_engine.cli import main

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "demos" / "data"
GOLDEN = Path(__file__).parent / "golden"
COMMANDS = ["", "run", "rank", "predict", "parse-event", "regular-harness", "validate"]

OPEN = ("New road incident: Cashel Rd North. LatLon: 53.322340,-6.306612. Maxcapacity: 3. "
        "Maxspeed: 1.5 [km/h]. Time: 2017-05-01T10:00:00Z.")
CLOSE = "Road incident closed: Cashel Rd North. Time: 2017-05-01T11:00:00Z."


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("command", COMMANDS)
def test_help_matches_golden(command, capsys, monkeypatch):
    monkeypatch.setenv("COLUMNS", "80")
    argv = [command, "--help"] if command else ["--help"]
    code, out, _ = run_cli(capsys, *argv)
    assert code == 0
    golden = GOLDEN / f"help_{command or 'main'}.txt"
    if os.environ.get("UPDATE_GOLDEN"):
        golden.parent.mkdir(exist_ok=True)
        golden.write_text(out)
    assert out == golden.read_text()


def test_version(capsys):
    code, out, _ = run_cli(capsys, "--version")
    assert code == 0 and out.strip() == "congestion-engine 0.1.0"


def test_usage_errors(capsys):
    assert run_cli(capsys)[0] == 2
    assert run_cli(capsys, "launch")[0] == 2
    code, _, err = run_cli(capsys, "run", "x.cfg", "--alpha", "1.5")
    assert code == 2 and "must be in (0, 1)" in err
    assert run_cli(capsys, "run", "x.cfg", "--mode", "fast")[0] == 2


def test_runtime_errors(capsys, tmp_path):
    code, _, err = run_cli(capsys, "validate", str(tmp_path / "missing.cfg"))
    assert code == 1 and err.startswith("congestion-engine: error:")
    bad = tmp_path / "bad.cfg"
    bad.write_text("[scenario]\nnetwork = synthetic:five-route\nmode = fast\n")
    code, _, err = run_cli(capsys, "validate", str(bad))
    assert code == 1 and "mode" in err
    code, _, err = run_cli(capsys, "predict", str(DATA / "five_route.edges"), str(DATA / "commuter.trips"), "Q")
    assert code == 1 and "unknown node 'Q'" in err


def test_validate(capsys):
    code, out, _ = run_cli(capsys, "validate", str(DATA / "cashel.cfg"))
    assert code == 0
    assert out.startswith("ok: ") and "5 routes, 1 events, mode controlled" in out


def test_run_writes_csvs_deterministically(capsys, tmp_path):
    outputs = []
    for name in ("a", "b"):
        code, out, _ = run_cli(capsys, "run", str(DATA / "cashel.cfg"), "--duration", "900",
                               "--out-dir", str(tmp_path / name))
        assert code == 0
        paths = [Path(p) for p in out.split()]
        assert sorted(p.name for p in paths) == ["allocations.csv", "decisions.csv", "flows.csv",
                                                 "occupancy.csv"]
        outputs.append({p.name: p.read_bytes() for p in paths})
    assert outputs[0] == outputs[1]
    code, out, _ = run_cli(capsys, "run", str(DATA / "cashel.cfg"), "--duration", "900", "--seed", "8",
                           "--out-dir", str(tmp_path / "c"))
    assert (tmp_path / "c" / "decisions.csv").read_bytes() != outputs[0]["decisions.csv"]


def test_rank(capsys):
    code, out, _ = run_cli(capsys, "rank", str(DATA / "five_route.edges"))
    lines = out.splitlines()
    assert code == 0 and lines[0] == "link_from,link_to,rank"
    n_links = sum(1 for line in open(DATA / "five_route.edges") if line.strip() and not line.startswith("#"))
    assert len(lines) == 1 + n_links
    assert all(float(line.split(",")[2]) > 0 for line in lines[1:])


def test_predict(capsys):
    code, out, _ = run_cli(capsys, "predict", str(DATA / "five_route.edges"), str(DATA / "commuter.trips"), "J")
    assert code == 0
    route, score = out.splitlines()
    assert route == "J A1 M D"
    assert score.startswith("score ")


def test_parse_event(capsys, monkeypatch):
    import io
    monkeypatch.setattr(sys, "stdin", io.StringIO(f"{OPEN}\n\n{CLOSE}\nNew road incident: x\n"))
    code, out, err = run_cli(capsys, "parse-event", "--network", str(DATA / "five_route.edges"),
                             "--nodes", str(DATA / "five_route.nodes"))
    assert code == 1
    first, second = (json.loads(line) for line in out.splitlines())
    assert first["event"] == "open" and first["location"] == "Cashel Rd North"
    assert first["max_capacity"] == 3 and first["max_speed_kmh"] == 1.5
    assert first["link"] == ["J", "A1"] and first["radius_m"] == 575.0
    assert second == {"event": "close", "location": "Cashel Rd North", "time": "2017-05-01T11:00:00Z"}
    assert err.startswith("line 4:")


def test_parse_event_needs_coordinates(capsys, monkeypatch):
    import io
    monkeypatch.setattr(sys, "stdin", io.StringIO(OPEN))
    code, _, err = run_cli(capsys, "parse-event", "--network", str(DATA / "five_route.edges"))
    assert code == 1 and "coordinates" in err


def test_regular_harness(capsys, tmp_path):
    cfg = tmp_path / "h.cfg"
    cfg.write_text("[harness]\ncapacity = 3, 6\nperiods = 4\nperiod_length = 1000\nvehicles = 3\n")
    code, out, _ = run_cli(capsys, "regular-harness", str(cfg), "--out-dir", str(tmp_path))
    lines = out.splitlines()
    assert code == 0 and lines[0] == "capacity,level,spread,min_ybar,max_ybar"
    assert [line.split(",")[0] for line in lines[1:]] == ["3", "6"]
    rows = (tmp_path / "ybar.csv").read_text().splitlines()
    assert rows[0] == "capacity,vehicle,request,ybar" and len(rows) == 1 + 2 * 3 * 8
    code, out, _ = run_cli(capsys, "regular-harness", str(cfg), "--capacity", "5")
    assert [line.split(",")[0] for line in out.splitlines()[1:]] == ["5"]


def test_log_level_from_environment(tmp_path):
    env = dict(os.environ, CONGESTION_ENGINE_LOG="info")
    proc = subprocess.run([sys.executable, "-m", "congestion_engine.cli", "run", str(DATA / "cashel.cfg"),
                           "--duration", "50", "--out-dir", str(tmp_path)],
                          env=env, capture_output=True, text=True)
    assert proc.returncode == 0
    assert "INFO congestion_engine: running" in proc.stderr
    env["CONGESTION_ENGINE_LOG"] = "chatty"
    proc = subprocess.run([sys.executable, "-m", "congestion_engine.cli", "validate", str(DATA / "cashel.cfg")],
                          env=env, capture_output=True, text=True)
    assert proc.returncode == 0 and "ignoring unknown log level" in proc.stderr
