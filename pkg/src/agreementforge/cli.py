"""Command-line entry point.

Subcommands: ``emit-ontology``, ``init``, ``demo``, ``register-contract``,
``record-ride``, ``book``, ``event``, ``evaluate``, ``query``, ``export``,
``verify``.

Exit codes: 0 success, 1 usage error, 2 validation/domain error,
3 integrity failure.  Machine-readable output goes to stdout, diagnostics
to stderr.  Mutating commands accept ``--now <RFC3339>`` so runs are
reproducible; without it the configured clock (``system`` or a fixed
timestamp) is used.  Configuration is read from ``agreementforge.toml``
(key = value lines: ledger_dir, default_currency, clock) and overridden by
``AF_``-prefixed environment variables, then by flags.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from agreementforge.contracts import (
    Price,
    booking_policy_contract,
    builtin_contracts,
    contract_to_graph,
    multimodal_discount_incentive,
    ride_with_other_passengers_incentive,
    ridesharing_booking_contract,
)
from agreementforge.demo import Clock, seed_demo
from agreementforge.engine import build_kb, evaluate
from agreementforge.errors import AgreementForgeError, ChainIntegrityError
from agreementforge.ledger import (
    Ledger,
    RecordBooking,
    RecordEvent,
    RecordObligation,
    RecordRide,
    RegisterContract,
    state_digest,
    verify_file,
)
from agreementforge.query import (
    QueryResult,
    Var,
    cq_agreed_price,
    cq_declared_seats,
    cq_incentive_benefit,
    cq_incentive_conditions,
    cq_incentives_by_provider,
    cq_leg_endpoints,
    select,
)
from agreementforge.rdf import (
    DEFAULT_PREFIXES,
    RBE,
    Graph,
    Iri,
    Literal,
    Term,
    ntriples,
    parse_turtle,
    serialize_turtle,
)
from agreementforge.vocabulary import (
    CROWD_TSP,
    build_agreement_vocab,
    build_event_taxonomy,
    build_oasis_model,
    build_tbox,
)

LEDGER_FILE = "ledger.jsonl"
CONFIG_FILE = "agreementforge.toml"
ENV_PREFIX = "AF_"

_BUILTIN_CONTRACTS = {
    "booking": ridesharing_booking_contract,
    "booking-policy": booking_policy_contract,
    "ride-with-other-passengers": ride_with_other_passengers_incentive,
    "multimodal-discount": lambda: multimodal_discount_incentive(10, 1),
    "multimodal-discount-3": lambda: multimodal_discount_incentive(20, 3),
}


@dataclass
class CliConfig:
    ledger_dir: Path
    default_currency: str = "EUR"
    clock: str = "system"  # "system" or a fixed RFC 3339 timestamp


def _read_config_file(path: Path) -> dict[str, str]:
    values: dict[str, str] = {}
    if not path.exists():
        return values
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#") or "=" not in line:
            continue
        key, _, value = line.partition("=")
        value = value.strip().strip('"').strip("'")
        values[key.strip()] = value
    return values


def load_config(args: argparse.Namespace) -> CliConfig:
    values = _read_config_file(Path(os.environ.get(ENV_PREFIX + "CONFIG", CONFIG_FILE)))
    for key in ("ledger_dir", "default_currency", "clock"):
        env = os.environ.get(ENV_PREFIX + key.upper())
        if env:
            values[key] = env
    ledger_dir = getattr(args, "ledger_dir", None) or values.get("ledger_dir") or "."
    return CliConfig(
        ledger_dir=Path(ledger_dir),
        default_currency=values.get("default_currency", "EUR"),
        clock=values.get("clock", "system"),
    )


def _now(args: argparse.Namespace, config: CliConfig) -> str:
    explicit = getattr(args, "now", None)
    if explicit:
        return explicit
    if config.clock != "system":
        return config.clock
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@contextmanager
def _write_lock(ledger_dir: Path):
    """One process per ledger directory."""
    lock_path = ledger_dir / ".lock"
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise AgreementForgeError(
            f"ledger directory is locked by another writer ({lock_path})", code="LOCKED"
        ) from None
    try:
        os.write(fd, f"{os.getpid()}\n".encode("ascii"))
        os.close(fd)
        yield
    finally:
        try:
            os.unlink(lock_path)
        except FileNotFoundError:
            pass


def _open_ledger(config: CliConfig) -> Ledger:
    path = config.ledger_dir / LEDGER_FILE
    if not config.ledger_dir.is_dir():
        raise AgreementForgeError(f"ledger directory {config.ledger_dir} does not exist (run init)")
    return Ledger.load(path)


def _resolve_iri(text: str) -> Iri:
    if text.startswith("<") and text.endswith(">"):
        return Iri(text[1:-1])
    prefix, sep, local = text.partition(":")
    if sep and prefix in DEFAULT_PREFIXES:
        return Iri(DEFAULT_PREFIXES[prefix] + local)
    return Iri(text)


def _compact_iri(value: str) -> str:
    for prefix, ns in sorted(DEFAULT_PREFIXES.items(), key=lambda kv: -len(kv[1])):
        if value.startswith(ns):
            return f"{prefix}:{value[len(ns):]}"
    return value


def _render_term(term: Term) -> str:
    if isinstance(term, Iri):
        return _compact_iri(term.value)
    if isinstance(term, Literal):
        return term.lexical
    return ntriples(term)


def _print_table(result: QueryResult, as_csv: bool) -> None:
    header = list(result.columns)
    rows = [[_render_term(value) for value in row] for row in result.rows]
    if as_csv:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\r\n")
        writer.writerow(header)
        writer.writerows(rows)
        sys.stdout.write(buffer.getvalue())
        return
    widths = [len(h) for h in header]
    for row in rows:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip())
    print("  ".join("-" * w for w in widths))
    for row in rows:
        print("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())


def _simple_table(columns: list[str], rows: list[list[str]], as_csv: bool) -> None:
    terms = tuple(tuple(Literal(cell) for cell in row) for row in rows)
    _print_table(QueryResult(tuple(columns), terms), as_csv)


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def cmd_emit_ontology(args: argparse.Namespace, config: CliConfig) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    agreements = build_oasis_model().union(build_agreement_vocab())
    for contract in builtin_contracts():
        agreements = agreements.union(contract_to_graph(contract))
    files = {
        "terms.ttl": build_tbox(),
        "rb-events.ttl": build_event_taxonomy(),
        "agreements.ttl": agreements,
    }
    for name, graph in files.items():
        (out / name).write_text(serialize_turtle(graph), encoding="utf-8", newline="\n")
        print(f"wrote {out / name} ({len(graph)} triples)", file=sys.stderr)
    return 0


def cmd_init(args: argparse.Namespace, config: CliConfig) -> int:
    config.ledger_dir.mkdir(parents=True, exist_ok=True)
    path = config.ledger_dir / LEDGER_FILE
    path.touch(exist_ok=True)
    print(str(path))
    return 0


def cmd_demo(args: argparse.Namespace, config: CliConfig) -> int:
    config.ledger_dir.mkdir(parents=True, exist_ok=True)
    (config.ledger_dir / LEDGER_FILE).touch(exist_ok=True)
    with _write_lock(config.ledger_dir):
        ledger = _open_ledger(config)
        start = getattr(args, "now", None) or "2024-05-01T08:00:00Z"
        count = seed_demo(ledger, Clock(start))
    print(f"seeded {count} records")
    return 0


def cmd_register_contract(args: argparse.Namespace, config: CliConfig) -> int:
    if args.builtin:
        turtle = serialize_turtle(contract_to_graph(_BUILTIN_CONTRACTS[args.builtin]()))
    else:
        turtle = Path(args.file).read_text(encoding="utf-8")
        parse_turtle(turtle)  # fail fast with a line/column message
    with _write_lock(config.ledger_dir):
        ledger = _open_ledger(config)
        record = ledger.append(RegisterContract(turtle), _now(args, config))
    print(f"registered at seq {record.seq}")
    return 0


def cmd_record_ride(args: argparse.Namespace, config: CliConfig) -> int:
    cmd = RecordRide(
        ride=_resolve_iri(args.ride).value,
        driver=_resolve_iri(args.driver).value,
        allocated_seats=args.seats,
    )
    with _write_lock(config.ledger_dir):
        ledger = _open_ledger(config)
        record = ledger.append(cmd, _now(args, config))
    print(f"recorded at seq {record.seq}")
    return 0


def cmd_book(args: argparse.Namespace, config: CliConfig) -> int:
    booking = _resolve_iri(args.booking).value
    episodes = []
    for spec in args.episode or []:
        iri, _, flag = spec.partition("=")
        episodes.append((_resolve_iri(iri).value, flag == "ridesharing"))
    cmd = RecordBooking(
        booking=booking,
        passenger=_resolve_iri(args.passenger).value,
        offer_item=_resolve_iri(args.offer_item).value if args.offer_item else f"{booking}-item",
        price=Price(args.amount, args.currency or config.default_currency),
        leg=_resolve_iri(args.leg).value if args.leg else f"{booking}-leg",
        origin=args.origin,
        destination=args.destination,
        reservation=_resolve_iri(args.reservation).value if args.reservation else f"{booking}-reservation",
        ride=_resolve_iri(args.ride).value,
        trip=_resolve_iri(args.trip).value if args.trip else f"{booking}-trip",
        other_episodes=tuple(episodes),
        reserved_seats=args.seats,
    )
    with _write_lock(config.ledger_dir):
        ledger = _open_ledger(config)
        record = ledger.append(cmd, _now(args, config))
    print(f"recorded at seq {record.seq}")
    return 0


def cmd_event(args: argparse.Namespace, config: CliConfig) -> int:
    concept = args.concept
    if ":" not in concept:
        concept = RBE(concept).value
    else:
        concept = _resolve_iri(concept).value
    cmd = RecordEvent(_resolve_iri(args.booking).value, concept)
    with _write_lock(config.ledger_dir):
        ledger = _open_ledger(config)
        record = ledger.append(cmd, _now(args, config))
    print(f"recorded at seq {record.seq}")
    return 0


def cmd_evaluate(args: argparse.Namespace, config: CliConfig) -> int:
    with _write_lock(config.ledger_dir):
        ledger = _open_ledger(config)
        kb = build_kb(ledger.state)
        obligations = evaluate(ledger.state.contracts.values(), kb)
        now = _now(args, config)
        for obligation in obligations:
            ledger.append(RecordObligation(obligation), now)
    print(f"{len(obligations)} new obligations")
    for obligation in obligations:
        print(f"  {obligation.action_json()}", file=sys.stderr)
    return 0


def _need(args: argparse.Namespace, name: str) -> str:
    value = getattr(args, name, None)
    if not value:
        print(f"agreementforge query: error: {args.cq} requires --{name}", file=sys.stderr)
        raise SystemExit(1)
    return value


def cmd_query(args: argparse.Namespace, config: CliConfig) -> int:
    ledger = _open_ledger(config)
    graph = ledger.state.export_abox()
    as_csv = args.csv
    cq = args.cq
    if cq == "cq1":
        booking = _resolve_iri(_need(args, "booking"))
        origin, destination = cq_leg_endpoints(graph, booking)
        _simple_table(["booking", "origin", "destination"], [[_compact_iri(booking.value), origin, destination]], as_csv)
    elif cq == "cq2":
        booking = _resolve_iri(_need(args, "booking"))
        price = cq_agreed_price(graph, booking)
        _simple_table(
            ["booking", "amount_minor", "currency"],
            [[_compact_iri(booking.value), str(price.amount_minor), price.currency]],
            as_csv,
        )
    elif cq == "cq3":
        ride = _resolve_iri(_need(args, "ride"))
        seats = cq_declared_seats(graph, ride)
        _simple_table(["ride", "seats"], [[_compact_iri(ride.value), str(seats)]], as_csv)
    elif cq == "cq4":
        tsp = _resolve_iri(args.tsp) if args.tsp else CROWD_TSP
        rows = [[_compact_iri(i.value)] for i in cq_incentives_by_provider(graph, tsp)]
        _simple_table(["incentive"], rows, as_csv)
    elif cq == "cq5":
        incentive = _resolve_iri(_need(args, "incentive"))
        rows = [[text] for text in cq_incentive_conditions(graph, incentive)]
        _simple_table(["condition"], rows, as_csv)
    elif cq == "cq6":
        spec = cq_incentive_benefit(graph, _resolve_iri(_need(args, "incentive")))
        pct = format(spec.percentage, "f") if spec.percentage is not None else ""
        _simple_table(
            ["incentive", "benefit", "percentage"],
            [[_compact_iri(_resolve_iri(args.incentive).value), spec.kind.value, pct]],
            as_csv,
        )
    else:  # select
        patterns = []
        for text in args.pattern:
            parts = text.split()
            if len(parts) != 3:
                raise AgreementForgeError(f"pattern needs three terms: {text!r}")
            patterns.append(tuple(_parse_pattern_term(p) for p in parts))
        _print_table(select(graph, patterns), as_csv)
    return 0


def _parse_pattern_term(token: str):
    if token.startswith("?"):
        return Var(token[1:])
    if token.startswith('"') and token.endswith('"'):
        return Literal(token[1:-1])
    if token == "a":
        return _resolve_iri("rdf:type")
    return _resolve_iri(token)


def cmd_export(args: argparse.Namespace, config: CliConfig) -> int:
    ledger = _open_ledger(config)
    if args.digest:
        print(state_digest(ledger.state))
        return 0
    text = serialize_turtle(ledger.state.export_abox())
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return 0


def cmd_verify(args: argparse.Namespace, config: CliConfig) -> int:
    path = config.ledger_dir / LEDGER_FILE
    if not path.exists():
        raise AgreementForgeError(f"no ledger at {path}")
    bad = verify_file(path)
    if bad is None:
        print("ok")
        return 0
    print(f"chain verification failed at seq {bad}", file=sys.stderr)
    return 3


# --------------------------------------------------------------------------
# Argument parsing
# --------------------------------------------------------------------------


class _ArgumentParser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; remap to 1 per the contract."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_now(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--now", help="RFC 3339 UTC timestamp for this command")


def build_parser() -> argparse.ArgumentParser:
    # --ledger-dir is accepted both before and after the subcommand; the
    # SUPPRESS default keeps the subparser from clobbering the global value.
    common = _ArgumentParser(add_help=False)
    common.add_argument(
        "--ledger-dir",
        dest="ledger_dir",
        default=argparse.SUPPRESS,
        help="ledger directory (default from config)",
    )
    parser = _ArgumentParser(prog="agreementforge", description=__doc__.split("\n\n")[0])
    parser.set_defaults(ledger_dir=None)
    parser.add_argument("--ledger-dir", dest="ledger_dir", help="ledger directory (default from config)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    p = sub.add_parser("emit-ontology", parents=[common], help="write terms.ttl, rb-events.ttl and agreements.ttl")
    p.add_argument("out_dir")
    p.set_defaults(func=cmd_emit_ontology)

    p = sub.add_parser("init", parents=[common], help="create the ledger directory and an empty log")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("demo", parents=[common], help="seed the demo scenario (2 passengers, 1 driver, 3-seat ride)")
    _add_now(p)
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("register-contract", parents=[common], help="append a contract document to the ledger")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--file", help="Turtle document")
    group.add_argument("--builtin", choices=sorted(_BUILTIN_CONTRACTS))
    _add_now(p)
    p.set_defaults(func=cmd_register_contract)

    p = sub.add_parser("record-ride", parents=[common], help="record a driver's ride offer")
    p.add_argument("--ride", required=True)
    p.add_argument("--driver", required=True)
    p.add_argument("--seats", type=int, required=True)
    _add_now(p)
    p.set_defaults(func=cmd_record_ride)

    p = sub.add_parser("book", parents=[common], help="record a ridesharing booking")
    p.add_argument("--booking", required=True)
    p.add_argument("--passenger", required=True)
    p.add_argument("--ride", required=True)
    p.add_argument("--amount", type=int, required=True, help="price in minor currency units")
    p.add_argument("--currency", help="ISO 4217 code (default from config)")
    p.add_argument("--origin", required=True)
    p.add_argument("--destination", required=True)
    p.add_argument("--offer-item", dest="offer_item")
    p.add_argument("--leg")
    p.add_argument("--reservation")
    p.add_argument("--trip")
    p.add_argument("--seats", type=int, default=1)
    p.add_argument(
        "--episode",
        action="append",
        help="additional trip episode IRI, suffix '=ridesharing' for a ridesharing leg",
    )
    _add_now(p)
    p.set_defaults(func=cmd_book)

    p = sub.add_parser("event", parents=[common], help="record a booking event")
    p.add_argument("--booking", required=True)
    p.add_argument("--concept", required=True, help="event concept (rbe: CURIE or local name)")
    _add_now(p)
    p.set_defaults(func=cmd_event)

    p = sub.add_parser("evaluate", parents=[common], help="fire incentive/policy conditionals and persist obligations")
    _add_now(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("query", parents=[common], help="answer competency questions or run a select")
    p.add_argument("cq", choices=["cq1", "cq2", "cq3", "cq4", "cq5", "cq6", "select"])
    p.add_argument("--booking")
    p.add_argument("--ride")
    p.add_argument("--tsp")
    p.add_argument("--incentive")
    p.add_argument("--csv", action="store_true", help="RFC 4180 CSV instead of an aligned table")
    p.add_argument("pattern", nargs="*", help="select patterns: '?s rdf:type r2r:Ride'")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("export", parents=[common], help="write the derived A-Box as Turtle")
    p.add_argument("--out")
    p.add_argument("--digest", action="store_true", help="print the state digest instead")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("verify", parents=[common], help="check the ledger hash chain")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = load_config(args)
    try:
        return args.func(args, config)
    except ChainIntegrityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except AgreementForgeError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
