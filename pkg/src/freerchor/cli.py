"""Command-line entry point.

Exit codes: 0 success, 1 runtime error, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from collections import defaultdict
from pathlib import Path

from .arrows import HostEnv, ScriptExhausted
from .choreo import CHOREOGRAPHIES, ABSENT, Located, LocationError, as_location, participants
from .codec import DecodeError
from .network import (
    ProtocolError,
    broadcast_targets,
    collect,
    epp,
    partners,
    run_endpoint,
    run_projected,
)
from .transport import InMemoryTransport, TcpTransport, TransportError, load_endpoint_config

RUNTIME_ERRORS = (TransportError, DecodeError, ScriptExhausted, LocationError,
                  ProtocolError, TimeoutError, OSError)


class UsageError(Exception):
    pass


def _fixture(name):
    try:
        return CHOREOGRAPHIES[name]
    except KeyError:
        raise UsageError(f"unknown choreography {name!r}") from None


def _role(fixture, name):
    loc = as_location(name)
    if loc not in fixture.locations:
        raise UsageError(f"unknown role {name!r} for {fixture.name}")
    return loc


def _parse_scripts(pairs, files) -> dict:
    scripts = defaultdict(list)
    for item in pairs or ():
        loc, sep, line = item.partition("=")
        if not sep:
            raise UsageError(f"--script expects LOC=LINE, got {item!r}")
        scripts[loc].append(line)
    for item in files or ():
        loc, sep, path = item.partition("=")
        if not sep:
            raise UsageError(f"--script-file expects LOC=PATH, got {item!r}")
        text = Path(path).read_text(encoding="utf-8")
        scripts[loc].extend(text.splitlines())
    return scripts


def _show_value(v):
    if isinstance(v, Located):
        v = v.value
    if isinstance(v, str):
        return json.dumps(v)
    return repr(v)


def _show_store(store):
    return "{" + ", ".join(f"{k}: {v}" for k, v in sorted(store.items())) + "}"


def _visible(value, loc) -> bool:
    return isinstance(value, Located) and value.owner == loc and value.value is not ABSENT


def _jsonable(v):
    if isinstance(v, Located):
        return v.value if v.present else None
    return v if isinstance(v, (str, int, float, bool, type(None))) else repr(v)


def _print_run(args, rounds_out, stores, out):
    if args.format == "json":
        doc = {
            "choreography": args.choreography,
            "outputs": [{str(loc): _jsonable(v) for loc, v in sorted(r.items()) if _visible(v, loc)}
                        for r in rounds_out],
            "stores": {str(loc): dict(sorted(s.items())) for loc, s in sorted(stores.items())},
        }
        out.write(json.dumps(doc, sort_keys=True) + "\n")
        return
    for r in rounds_out:
        for loc, v in sorted(r.items()):
            if _visible(v, loc):
                out.write(f"{loc}: {_show_value(v)}\n")
    nonempty = {loc: s for loc, s in stores.items() if s}
    if nonempty:
        out.write("stores:\n")
        for loc, s in sorted(nonempty.items()):
            out.write(f"  {loc}: {_show_store(s)}\n")


def cmd_run(args, out):
    fixture = _fixture(args.choreography)
    scripts = _parse_scripts(args.script, args.script_file)
    for name in scripts:
        _role(fixture, name)
    choreography = fixture.build()

    if args.transport == "tcp":
        if not args.role or not args.config:
            raise UsageError("--transport tcp requires --role and --config")
        role = _role(fixture, args.role)
        config = load_endpoint_config(args.config)
        rounds = args.rounds or 1
        transport = TcpTransport(config, role, connect_timeout=args.timeout)
        env = HostEnv(role, scripts.get(str(role), ()))
        program = epp(choreography, role)
        results = []
        try:
            for _ in range(rounds):
                results.append({role: run_endpoint(program, role, transport, env, (), args.timeout)})
        finally:
            transport.close()
        _print_run(args, results, {role: env.store}, out)
        return 0

    envs = {loc: HostEnv(loc, scripts.get(str(loc), ())) for loc in fixture.locations}
    rounds = args.rounds or max(1, len(scripts.get(str(fixture.input_location), ())))
    transport = InMemoryTransport(envs)
    results = []
    for _ in range(rounds):
        run = run_projected(choreography, envs, (), transport, args.timeout)
        results.append(run.outputs)
    _print_run(args, results, {loc: env.store for loc, env in envs.items()}, out)
    return 0


def analyze(choreography, role) -> dict:
    program = epp(choreography, role)
    return {
        "effect_count": program.count(),
        "events": [str(e) for e in collect(program)],
        "partners": sorted(str(p) for p in partners(program)),
        "broadcast_targets": [[str(t) for t in ts] for ts in broadcast_targets(program)],
    }


def cmd_analyze(args, out):
    fixture = _fixture(args.choreography)
    role = _role(fixture, args.role)
    report = analyze(fixture.build(), role)
    if args.format == "json":
        out.write(json.dumps(report, sort_keys=True) + "\n")
    else:
        out.write(f"effect_count: {report['effect_count']}\n")
        out.write(f"events: {', '.join(report['events'])}\n")
        out.write("partners: {" + ", ".join(report["partners"]) + "}\n")
        targets = ", ".join("{" + ", ".join(ts) + "}" for ts in report["broadcast_targets"])
        out.write(f"broadcast_targets: [{targets}]\n")
    return 0


def cmd_report(args, out):
    from .plotting import endpoint_events, plot_endpoint_events, write_event_table

    fixture = _fixture(args.choreography)
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    events = endpoint_events(fixture.build(), fixture.locations)
    table = write_event_table(events, outdir / f"{fixture.name}_events.csv")
    figure = plot_endpoint_events(events, outdir / f"{fixture.name}_events.png",
                                  title=f"{fixture.name}: static events per endpoint")
    out.write(f"{table}\n{figure}\n")
    return 0


def cmd_list(args, out):
    for name in sorted(CHOREOGRAPHIES):
        fixture = CHOREOGRAPHIES[name]
        locs = ",".join(sorted(str(p) for p in participants(fixture.build())))
        out.write(f"{name} {{{locs}}}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="freerchor", description="Run and analyse choreography fixtures.")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("list", help="list fixtures and their participants")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("run", help="run a choreography")
    p.add_argument("--choreography", "-c", required=True)
    p.add_argument("--transport", choices=("mem", "tcp"), default="mem")
    p.add_argument("--role", help="location to run (tcp only)")
    p.add_argument("--config", help="JSON file mapping location -> host:port (tcp only)")
    p.add_argument("--script", action="append", metavar="LOC=LINE",
                   help="append one input line for LOC; repeatable")
    p.add_argument("--script-file", action="append", metavar="LOC=PATH",
                   help="newline-separated input lines for LOC")
    p.add_argument("--rounds", type=int, help="number of runs (default: one per input line)")
    p.add_argument("--timeout", type=float, default=5.0)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("analyze", help="static analysis of one projected endpoint")
    p.add_argument("choreography")
    p.add_argument("role")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("report", help="write an event table and figure for every endpoint")
    p.add_argument("choreography")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(out)
        return 2
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"freerchor: error: {exc}", file=sys.stderr)
        return 2
    except RUNTIME_ERRORS as exc:
        print(f"freerchor: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
