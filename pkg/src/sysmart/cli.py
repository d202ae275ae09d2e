"""Command-line entry point.

Subcommands: ``serve``, ``simulate``, ``wiegand encode|decode``,
``packet encode|decode``, ``tag ...`` (operates on a binary tag-memory
file), ``lanes fastest`` and ``branches`` (HTTP clients; server address
from ``--addr`` or ``SYSMART_ADDR``).

Exit codes: 0 success, 2 validation problem, 3 state/tamper error,
4 not found.  ``--json`` switches output to machine-readable JSON.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
import urllib.error
import urllib.parse
import urllib.request
from pathlib import Path

from . import cartlink, foodtrack, wiegand
from .errors import NotFoundError, StateError, SysmartError, ValidationError
from .timeutil import parse_when, to_iso

DEFAULT_ADDR = "http://127.0.0.1:8000"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except SysmartError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except urllib.error.HTTPError as exc:
        detail = exc.read().decode("utf-8", "replace")
        print(f"error: server returned {exc.code}: {detail}", file=sys.stderr)
        return {404: 4, 409: 3, 422: 2}.get(exc.code, 1)
    except urllib.error.URLError as exc:
        print(f"error: cannot reach server: {exc.reason}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sysmart", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    # wiegand ------------------------------------------------------------------
    wg = sub.add_parser("wiegand", help="Wiegand 26 frame codec")
    wg_sub = wg.add_subparsers(dest="action", required=True)
    wg_encode = wg_sub.add_parser("encode", help="payload -> 26-bit string")
    wg_encode.add_argument("payload", help="24-bit payload, e.g. 0xABCDEF or 11259375")
    wg_encode.add_argument("--json", action="store_true")
    wg_encode.set_defaults(handler=cmd_wiegand_encode)
    wg_decode = wg_sub.add_parser("decode", help="26-bit string -> payload")
    wg_decode.add_argument("bits", help='bit string like "10101...", 26 bits')
    wg_decode.add_argument("--json", action="store_true")
    wg_decode.set_defaults(handler=cmd_wiegand_decode)

    # packet -------------------------------------------------------------------
    pk = sub.add_parser("packet", help="80-bit cart position packet codec")
    pk_sub = pk.add_subparsers(dest="action", required=True)
    pk_encode = pk_sub.add_parser("encode")
    pk_encode.add_argument("--store", type=int, required=True)
    pk_encode.add_argument("--cart", type=int, required=True)
    pk_encode.add_argument("--tag", required=True, help="6 uppercase hex characters")
    pk_encode.add_argument("--json", action="store_true")
    pk_encode.set_defaults(handler=cmd_packet_encode)
    pk_decode = pk_sub.add_parser("decode")
    pk_decode.add_argument("hex", help="20 hex characters")
    pk_decode.add_argument("--json", action="store_true")
    pk_decode.set_defaults(handler=cmd_packet_decode)

    # tag ----------------------------------------------------------------------
    tag = sub.add_parser("tag", help="food-tracker tag emulation on a memory file")
    tag_sub = tag.add_subparsers(dest="action", required=True)

    def tag_parser(name, **kwargs):
        p = tag_sub.add_parser(name, **kwargs)
        p.add_argument("--file", required=True, help="tag memory file")
        p.add_argument("--json", action="store_true")
        return p

    t_init = tag_parser("init")
    t_init.add_argument("--password", required=True)
    t_init.add_argument("--production-date")
    t_init.add_argument("--expiry-date")
    t_init.add_argument("--temp-threshold-raw", type=int, default=foodtrack.DEFAULT_TEMP_THRESHOLD_RAW)
    t_init.add_argument("--hum-threshold-raw", type=int, default=foodtrack.DEFAULT_HUM_THRESHOLD_RAW)
    t_init.add_argument("--sample-interval", type=int, default=foodtrack.DEFAULT_SAMPLE_INTERVAL_MIN)
    t_init.add_argument("--log-region", type=int, default=foodtrack.DEFAULT_LOG_REGION_OCTETS)
    t_init.set_defaults(handler=cmd_tag_init)

    t_set = tag_parser("set")
    t_set.add_argument("--field", required=True, choices=["production_date", "expiry_date"])
    t_set.add_argument("--value", required=True, help="unix seconds or ISO-8601")
    t_set.set_defaults(handler=cmd_tag_set)

    t_event = tag_parser("event")
    t_event.add_argument("--plant", type=int, required=True)
    t_event.add_argument("--kind", required=True, choices=["arrival", "departure"])
    t_event.add_argument("--rtc", help="injected RTC (unix or ISO); defaults to now")
    t_event.set_defaults(handler=cmd_tag_event)

    t_sample = tag_parser("sample")
    group_t = t_sample.add_mutually_exclusive_group(required=True)
    group_t.add_argument("--temp-c", type=float)
    group_t.add_argument("--temp-raw", type=int)
    group_h = t_sample.add_mutually_exclusive_group(required=True)
    group_h.add_argument("--rh", type=float)
    group_h.add_argument("--hum-raw", type=int)
    t_sample.add_argument("--rtc", help="injected RTC (unix or ISO); defaults to now")
    t_sample.set_defaults(handler=cmd_tag_sample)

    tag_parser("summary").set_defaults(handler=cmd_tag_summary)
    t_log = tag_parser("log")
    t_log.add_argument("--format", choices=["json", "csv"], default="json")
    t_log.set_defaults(handler=cmd_tag_log)
    t_reset = tag_parser("reset")
    t_reset.add_argument("--password", required=True)
    t_reset.set_defaults(handler=cmd_tag_reset)
    tag_parser("dump").set_defaults(handler=cmd_tag_dump)

    # simulate -----------------------------------------------------------------
    sim = sub.add_parser("simulate", help="run a scenario file deterministically")
    sim.add_argument("--scenario", required=True)
    sim.add_argument("--seed", type=int, help="override the scenario's seed")
    sim.add_argument("--out", help="write the event log as JSON-lines")
    sim.add_argument("--csv", help="write the event log as CSV")
    sim.add_argument("--json", action="store_true")
    sim.set_defaults(handler=cmd_simulate)

    # serve ---------------------------------------------------------------------
    srv = sub.add_parser("serve", help="run the backend HTTP service")
    srv.add_argument("--addr", default="127.0.0.1:8000", help="host:port")
    srv.add_argument("--journal", help="append-only journal file (replayed on start)")
    srv.add_argument("--scenario", help="seed the database from a scenario file")
    srv.set_defaults(handler=cmd_serve)

    # client commands -------------------------------------------------------------
    lanes = sub.add_parser("lanes", help="query the backend for checkout lanes")
    lanes_sub = lanes.add_subparsers(dest="action", required=True)
    fastest = lanes_sub.add_parser("fastest")
    fastest.add_argument("--store", type=int, required=True)
    fastest.add_argument("--items", type=int, required=True)
    fastest.add_argument("--addr", default=None)
    fastest.add_argument("--json", action="store_true")
    fastest.set_defaults(handler=cmd_lanes_fastest)

    branches = sub.add_parser("branches", help="other branches stocking a product")
    branches.add_argument("--product", type=int, required=True)
    branches.add_argument("--origin", type=int, required=True)
    branches.add_argument("--addr", default=None)
    branches.add_argument("--json", action="store_true")
    branches.set_defaults(handler=cmd_branches)

    return parser


def emit(args, data: dict, human: str) -> int:
    if getattr(args, "json", False):
        print(json.dumps(data, sort_keys=True))
    else:
        print(human)
    return 0


# -- codec commands ----------------------------------------------------------------


def _parse_payload(text: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise ValidationError(f"payload must be an integer, got {text!r}") from None


def cmd_wiegand_encode(args) -> int:
    frame = wiegand.encode_frame(_parse_payload(args.payload))
    bits = frame.bit_string()
    return emit(
        args,
        {"bits": bits, "tag_id": wiegand.payload_to_tag_id(frame.payload)},
        bits,
    )


def cmd_wiegand_decode(args) -> int:
    payload = wiegand.decode_frame(wiegand.parse_bit_string(args.bits))
    tag_id = wiegand.payload_to_tag_id(payload)
    return emit(
        args,
        {"payload": payload, "payload_hex": f"0x{payload:06X}", "tag_id": tag_id},
        f"payload 0x{payload:06X} (tag {tag_id})",
    )


def cmd_packet_encode(args) -> int:
    packet = cartlink.CartPositionPacket(args.store, args.cart, args.tag)
    text = cartlink.packet_to_hex(packet)
    return emit(args, {"hex": text}, text)


def cmd_packet_decode(args) -> int:
    packet = cartlink.packet_from_hex(args.hex)
    data = {"store_id": packet.store_id, "cart_id": packet.cart_id, "tag_id": packet.tag_id}
    return emit(
        args, data, f"store {packet.store_id} cart {packet.cart_id} tag {packet.tag_id}"
    )


# -- tag commands -------------------------------------------------------------------


def _load_tag(path: str) -> foodtrack.TagMemory:
    file = Path(path)
    if not file.exists():
        raise NotFoundError(f"tag file {path} does not exist (run `tag init` first)")
    return foodtrack.decode_tag_file(file.read_bytes())


def _store_tag(path: str, tag: foodtrack.TagMemory) -> None:
    Path(path).write_bytes(foodtrack.encode_tag_file(tag))


def _rtc(args) -> int:
    if args.rtc is None:
        return int(time.time())
    return int(parse_when(args.rtc))


def _date_or_none(text: str | None) -> int | None:
    return None if text is None else int(parse_when(text))


def cmd_tag_init(args) -> int:
    file = Path(args.file)
    if file.exists():
        tag = foodtrack.decode_tag_file(file.read_bytes())
        if tag.state is not foodtrack.TagState.BLANK:
            raise StateError(f"{args.file} holds an initialized tag; reset it first")
    else:
        tag = foodtrack.TagMemory.blank(args.log_region)
    foodtrack.init_tag(
        tag,
        args.password,
        production_date=_date_or_none(args.production_date),
        expiry_date=_date_or_none(args.expiry_date),
        thresholds=foodtrack.Thresholds(args.temp_threshold_raw, args.hum_threshold_raw),
        sample_interval_min=args.sample_interval,
    )
    _store_tag(args.file, tag)
    return emit(
        args,
        {"file": args.file, "state": tag.state.value, "log_capacity": tag.log_capacity},
        f"initialized {args.file} (capacity {tag.log_capacity} records)",
    )


def cmd_tag_set(args) -> int:
    tag = _load_tag(args.file)
    foodtrack.set_field(tag, args.field, int(parse_when(args.value)))
    _store_tag(args.file, tag)
    return emit(
        args,
        {"field": args.field, "value": getattr(tag, args.field)},
        f"{args.field} set",
    )


def cmd_tag_event(args) -> int:
    tag = _load_tag(args.file)
    kind = foodtrack.PlantEventKind[args.kind.upper()]
    foodtrack.record_plant_event(tag, args.plant, kind, _rtc(args))
    _store_tag(args.file, tag)
    event = tag.plant_events[-1]
    return emit(
        args,
        {"plant_id": event.plant_id, "kind": kind.name.title(), "timestamp": event.timestamp},
        f"recorded {kind.name.lower()} at plant {event.plant_id} ({to_iso(event.timestamp)})",
    )


def cmd_tag_sample(args) -> int:
    tag = _load_tag(args.file)
    temp_raw = args.temp_raw if args.temp_raw is not None else foodtrack.celsius_to_raw(args.temp_c)
    hum_raw = args.hum_raw if args.hum_raw is not None else foodtrack.rh_to_raw(args.rh)
    reading = foodtrack.SensorReading(temp_raw, hum_raw, _rtc(args))
    _, appended = foodtrack.sample(tag, reading)
    _store_tag(args.file, tag)
    return emit(
        args,
        {"appended": appended, "log_count": len(tag.log), "overflow": tag.overflow},
        ("logged" if appended else "below threshold, not logged")
        + f" (log holds {len(tag.log)} records)",
    )


def cmd_tag_summary(args) -> int:
    tag = _load_tag(args.file)
    summary = foodtrack.read_summary(tag)
    data = {
        "production_date": _iso(summary.production_date),
        "expiry_date": _iso(summary.expiry_date),
        "max_temp_c": summary.max_temp_c,
        "avg_temp_c": summary.avg_temp_c,
        "estimated_expiry": _iso(summary.estimated_expiry),
        "plant_events": [
            {"plant_id": e.plant_id, "kind": e.kind.name.title(), "timestamp": to_iso(e.timestamp)}
            for e in summary.plant_events
        ],
        "log_count": summary.log_count,
        "overflow": summary.overflow,
    }
    lines = [
        f"production: {data['production_date'] or 'unset'}",
        f"expiry:     {data['expiry_date'] or 'unset'}",
        f"max temp:   {_fmt(summary.max_temp_c, ' degC')}",
        f"avg temp:   {_fmt(summary.avg_temp_c, ' degC')}",
        f"est expiry: {data['estimated_expiry'] or 'n/a'}",
        f"records:    {summary.log_count} (overflow: {summary.overflow})",
        f"plant events: {len(summary.plant_events)}",
    ]
    return emit(args, data, "\n".join(lines))


def cmd_tag_log(args) -> int:
    tag = _load_tag(args.file)
    rows = []
    for record in tag.log:
        absolute = (tag.first_log_time or 0) + record.minutes_since_first * 60
        rows.append(
            {
                "minutes": record.minutes_since_first,
                "time": to_iso(absolute),
                "temp_c": foodtrack.raw_to_celsius(record.temp_raw),
                "rh_pct": foodtrack.raw_to_rh(record.hum_raw),
            }
        )
    if args.format == "csv":
        print("minutes,time,temp_c,rh_pct")
        for r in rows:
            print(f"{r['minutes']},{r['time']},{r['temp_c']:.4f},{r['rh_pct']:.4f}")
        return 0
    print(json.dumps({"count": len(rows), "records": rows}, sort_keys=True))
    return 0


def cmd_tag_reset(args) -> int:
    tag = _load_tag(args.file)
    foodtrack.reset_tag(tag, args.password)
    _store_tag(args.file, tag)
    return emit(args, {"state": tag.state.value}, "tag reset to blank")


def cmd_tag_dump(args) -> int:
    tag = _load_tag(args.file)
    image = foodtrack.encode_memory(tag)
    text = image.hex().upper()
    return emit(args, {"octets": len(image), "hex": text}, text)


def _iso(ts):
    return None if ts is None else to_iso(ts)


def _fmt(value, suffix=""):
    return "n/a" if value is None else f"{value:.2f}{suffix}"


# -- simulate / serve -------------------------------------------------------------------


def cmd_simulate(args) -> int:
    from .simulator import load_scenario_file, run

    scenario = load_scenario_file(args.scenario)
    if args.seed is not None:
        scenario.seed = args.seed
    result = run(scenario)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fp:
            result.events.to_jsonl(fp)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fp:
            result.events.to_csv(fp)
    counts = dict(sorted(result.events.counts().items()))
    data = {
        "scenario": str(args.scenario),
        "seed": scenario.seed,
        "duration_s": scenario.duration_s,
        "events": len(result.events),
        "counts": counts,
        "event_digest": result.events.digest(),
        "state_digest": result.state_digest(),
    }
    human = (
        f"{data['events']} events over {scenario.duration_s:g} s "
        f"(seed {scenario.seed})\n"
        + "\n".join(f"  {kind}: {n}" for kind, n in counts.items())
        + f"\nevent digest: {data['event_digest']}\nstate digest: {data['state_digest']}"
    )
    return emit(args, data, human)


def cmd_serve(args) -> int:
    import uvicorn

    from .backend.api import create_app
    from .backend.database import StoreDatabase
    from .backend.journal import FileJournal

    if args.journal:
        db = StoreDatabase.replay(FileJournal(args.journal))
    else:
        db = StoreDatabase()
    if args.scenario:
        from . import foodtrack as ft
        from .simulator import load_scenario_file
        from .simulator.engine import seed_database, simulate_food_tag

        scenario = load_scenario_file(args.scenario)
        seed_database(db, scenario, now=float(scenario.rtc_epoch))
        for spec in scenario.food_tags:
            tag = simulate_food_tag(spec, scenario.duration_s, scenario.rtc_epoch)
            db.register_food_tag(
                spec.tag_id,
                ft.encode_memory(tag),
                now=float(scenario.rtc_epoch + scenario.duration_s),
            )
    host, _, port = args.addr.rpartition(":")
    app = create_app(db)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")
    return 0


# -- HTTP client commands --------------------------------------------------------------


def _server_addr(args) -> str:
    return args.addr or os.environ.get("SYSMART_ADDR", DEFAULT_ADDR)


def _get_json(base: str, path: str, params: dict) -> dict | list:
    url = f"{base}{path}?{urllib.parse.urlencode(params)}"
    with urllib.request.urlopen(url, timeout=10) as response:
        return json.load(response)


def cmd_lanes_fastest(args) -> int:
    body = _get_json(
        _server_addr(args), f"/v1/stores/{args.store}/lanes/fastest", {"items": args.items}
    )
    return emit(args, body, f"lane {body['lane_id']}")


def cmd_branches(args) -> int:
    body = _get_json(
        _server_addr(args), f"/v1/products/{args.product}/branches", {"origin": args.origin}
    )
    if not body:
        return emit(args, {"branches": []}, "no other branch stocks this product")
    human = "\n".join(
        f"store {b['store_id']}: {b['count']} in stock, {b['distance_km']:.1f} km away"
        for b in body
    )
    return emit(args, {"branches": body}, human)


if __name__ == "__main__":
    sys.exit(main())
