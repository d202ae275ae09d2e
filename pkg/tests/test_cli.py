import json
import threading
import time

import pytest
import uvicorn

from sysmart.backend import records as rec
from sysmart.backend.api import create_app
from sysmart.backend.database import StoreDatabase
from sysmart.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out.strip(), captured.err.strip()


# -- codec subcommands -----------------------------------------------------------


def test_wiegand_encode_decode_round_trip(capsys):
    code, bits, _ = run_cli(capsys, "wiegand", "encode", "0xABCDEF")
    assert code == 0
    assert len(bits) == 26 and set(bits) <= {"0", "1"}
    code, out, _ = run_cli(capsys, "wiegand", "decode", bits, "--json")
    assert code == 0
    assert json.loads(out)["payload"] == 0xABCDEF


def test_wiegand_bad_input_exit_codes(capsys):
    code, _, err = run_cli(capsys, "wiegand", "encode", "0x1FFFFFF")
    assert code == 2 and "range" in err
    code, _, err = run_cli(capsys, "wiegand", "decode", "10101")
    assert code == 2


def test_packet_round_trip(capsys):
    code, hex_out, _ = run_cli(
        capsys, "packet", "encode", "--store", "1", "--cart", "42", "--tag", "ABCDEF"
    )
    assert code == 0 and hex_out == "0001002A414243444546"
    code, out, _ = run_cli(capsys, "packet", "decode", hex_out.lower(), "--json")
    assert json.loads(out) == {"store_id": 1, "cart_id": 42, "tag_id": "ABCDEF"}


# -- tag subcommands ---------------------------------------------------------------


PASSWORD = "secret-pass-20-chars"


def test_tag_lifecycle(tmp_path, capsys):
    tag_file = str(tmp_path / "tag.bin")
    code, _, _ = run_cli(
        capsys,
        "tag", "init", "--file", tag_file, "--password", PASSWORD,
        "--production-date", "2025-01-01T00:00:00Z",
    )
    assert code == 0

    code, _, _ = run_cli(
        capsys, "tag", "set", "--file", tag_file,
        "--field", "expiry_date", "--value", "2025-01-15T00:00:00Z",
    )
    assert code == 0

    # second write to a populated field is a tamper error -> exit 3
    code, _, err = run_cli(
        capsys, "tag", "set", "--file", tag_file,
        "--field", "production_date", "--value", "2025-02-01T00:00:00Z",
    )
    assert code == 3 and "already set" in err

    code, _, _ = run_cli(
        capsys, "tag", "event", "--file", tag_file,
        "--plant", "7", "--kind", "arrival", "--rtc", "2025-01-02T08:00:00Z",
    )
    assert code == 0

    for rtc, temp in (("2025-01-03T00:00:00Z", "4.0"), ("2025-01-03T01:00:00Z", "9.0")):
        code, out, _ = run_cli(
            capsys, "tag", "sample", "--file", tag_file,
            "--temp-c", temp, "--rh", "45", "--rtc", rtc, "--json",
        )
        assert code == 0 and json.loads(out)["appended"] is True

    code, out, _ = run_cli(capsys, "tag", "summary", "--file", tag_file, "--json")
    assert code == 0
    summary = json.loads(out)
    assert summary["log_count"] == 2
    assert summary["production_date"] == "2025-01-01T00:00:00Z"
    assert summary["max_temp_c"] == pytest.approx(9.0, abs=0.05)

    code, out, _ = run_cli(capsys, "tag", "log", "--file", tag_file, "--format", "csv")
    lines = out.splitlines()
    assert lines[0] == "minutes,time,temp_c,rh_pct" and len(lines) == 3

    code, dump_a, _ = run_cli(capsys, "tag", "dump", "--file", tag_file)
    code, dump_b, _ = run_cli(capsys, "tag", "dump", "--file", tag_file)
    assert dump_a == dump_b and dump_a.startswith("534D")  # "SM"

    code, _, err = run_cli(capsys, "tag", "reset", "--file", tag_file, "--password", "x" * 20)
    assert code == 3 and "mismatch" in err
    code, dump_c, _ = run_cli(capsys, "tag", "dump", "--file", tag_file)
    assert dump_c == dump_a  # failed reset left memory byte-identical

    code, _, _ = run_cli(capsys, "tag", "reset", "--file", tag_file, "--password", PASSWORD)
    assert code == 0
    code, _, _ = run_cli(
        capsys, "tag", "init", "--file", tag_file, "--password", "n" * 20
    )
    assert code == 0


def test_tag_init_validation_and_missing_file(tmp_path, capsys):
    code, _, err = run_cli(
        capsys, "tag", "init", "--file", str(tmp_path / "t.bin"), "--password", "short"
    )
    assert code == 2
    code, _, err = run_cli(capsys, "tag", "summary", "--file", str(tmp_path / "no.bin"))
    assert code == 4


def test_tag_double_init_is_state_error(tmp_path, capsys):
    tag_file = str(tmp_path / "tag.bin")
    run_cli(capsys, "tag", "init", "--file", tag_file, "--password", PASSWORD)
    code, _, err = run_cli(capsys, "tag", "init", "--file", tag_file, "--password", PASSWORD)
    assert code == 3


# -- simulate ---------------------------------------------------------------------------


def tiny_scenario():
    return {
        "seed": 3,
        "duration_s": 10.0,
        "tick_s": 0.1,
        "rtc_epoch": 1_735_689_600,
        "sync_period_s": 0,
        "store": {"store_id": 1, "name": "tiny", "lat": 29.0, "lon": 48.0},
        "grid": {"width": 5, "height": 3, "cell_size_m": 1.0, "blocked": []},
        "tags": [
            {"tag_id": "000001", "location_id": "L1", "x": 0.5, "y": 0.5},
            {"tag_id": "000002", "location_id": "L2", "x": 3.5, "y": 0.5},
        ],
        "products": [{"product_id": 1, "name": "thing"}],
        "inventory": [{"product_id": 1, "count": 2, "location_id": "L2"}],
        "lanes": [{"lane_id": 1, "queue": []}],
        "carts": [{"cart_id": 1, "start_cell": [0, 0]}],
        "shoppers": [{"cart_id": 1, "waypoint_products": [1], "speed_mps": 1.0}],
    }


def test_simulate_deterministic_digests(tmp_path, capsys):
    scenario_path = tmp_path / "tiny.json"
    scenario_path.write_text(json.dumps(tiny_scenario()))
    out_path = tmp_path / "events.jsonl"
    code, out_a, _ = run_cli(
        capsys, "simulate", "--scenario", str(scenario_path),
        "--out", str(out_path), "--json",
    )
    assert code == 0
    code, out_b, _ = run_cli(capsys, "simulate", "--scenario", str(scenario_path), "--json")
    a, b = json.loads(out_a), json.loads(out_b)
    assert a["event_digest"] == b["event_digest"]
    assert a["state_digest"] == b["state_digest"]
    lines = out_path.read_text().strip().splitlines()
    assert len(lines) == a["events"]

    code, out_c, _ = run_cli(
        capsys, "simulate", "--scenario", str(scenario_path), "--seed", "99", "--json"
    )
    assert json.loads(out_c)["event_digest"] != a["event_digest"]


def test_simulate_rejects_bad_scenario(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"seed": 1}))
    code, _, err = run_cli(capsys, "simulate", "--scenario", str(bad))
    assert code == 2 and "duration_s" in err


# -- client subcommands against a live server ----------------------------------------------


@pytest.fixture(scope="module")
def live_server():
    db = StoreDatabase()
    db.put_store(rec.StoreRecord(1, "central", 29.33, 48.07))
    db.put_store(rec.StoreRecord(2, "north", 29.40, 48.07))
    db.put_product(rec.ProductRecord(101, "milk"))
    db.put_inventory(rec.InventoryRecord(2, 101, 5, "L001"))
    db.put_lane(rec.LaneRecord(1, 1, [5, 3]))
    db.put_lane(rec.LaneRecord(1, 2, [10]))
    config = uvicorn.Config(create_app(db), host="127.0.0.1", port=0, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("server did not start")
        time.sleep(0.02)
    port = server.servers[0].sockets[0].getsockname()[1]
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


def test_lanes_fastest_client(live_server, capsys):
    code, out, _ = run_cli(
        capsys, "lanes", "fastest", "--store", "1", "--items", "4",
        "--addr", live_server, "--json",
    )
    assert code == 0 and json.loads(out) == {"lane_id": 1}


def test_lanes_fastest_uses_env_addr(live_server, capsys, monkeypatch):
    monkeypatch.setenv("SYSMART_ADDR", live_server)
    code, out, _ = run_cli(capsys, "lanes", "fastest", "--store", "1", "--items", "4")
    assert code == 0 and out == "lane 1"


def test_branches_client(live_server, capsys):
    code, out, _ = run_cli(
        capsys, "branches", "--product", "101", "--origin", "1",
        "--addr", live_server, "--json",
    )
    assert code == 0
    assert [b["store_id"] for b in json.loads(out)["branches"]] == [2]


def test_client_not_found_maps_to_exit_4(live_server, capsys):
    code, _, err = run_cli(
        capsys, "lanes", "fastest", "--store", "9", "--items", "1", "--addr", live_server
    )
    assert code == 4
