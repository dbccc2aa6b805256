"""Scheduler-friendly command line: ingest, label, snapshot, run, version.

Each subcommand is a one-shot job (ingest can also run as a long-lived
firehose daemon) that prints a single-line JSON report on stdout, so cron or
CI can parse outcomes. Exit codes: 0 ok, 2 config error, 3 source
unavailable, 4 store unavailable, 5 adapter protocol error, 6 snapshot lock
contention.
"""

from __future__ import annotations

import argparse
import json
import logging
import signal
import sys
import threading
from datetime import date, datetime, timezone

from . import __version__, ingest, pipeline
from .clock import ManualClock, SystemClock
from .config import PipelineConfig, load_config
from .errors import (
    AdapterProtocolError,
    AdapterTimeout,
    ConfigError,
    EmptyKeywordList,
    InvalidPattern,
    SnapshotLocked,
    SourceUnavailable,
    StoreUnavailable,
)
from .store import LabeledStore, StagingStore

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOURCE = 3
EXIT_STORE = 4
EXIT_ADAPTER = 5
EXIT_LOCKED = 6

logger = logging.getLogger(__name__)


def _emit(report: dict) -> None:
    print(json.dumps(report, sort_keys=True))


def _load(args) -> PipelineConfig:
    overrides: dict[str, object] = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
        overrides["nmf"] = {"seed": args.seed}
    if getattr(args, "out", None) is not None:
        overrides["snapshot_dir"] = args.out
    config = load_config(args.config, overrides=overrides)
    config.validate()
    return config


def cmd_ingest(args) -> int:
    try:
        config = _load(args)
        keywords = ingest.load_keywords(config.keywords_path)
        filt = ingest.compile_filter(keywords)
    except (ConfigError, OSError, EmptyKeywordList, InvalidPattern) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    buffer = ingest.IngestBuffer(
        max_size=config.buffer_max_size,
        flush_interval=config.flush_interval,
        max_retries=config.flush_max_retries,
    )
    sink = StagingStore(config.staging_path)
    try:
        if args.source.startswith("replay:"):
            path = args.source[len("replay:") :]
            clock = ManualClock()
            session = ingest.IngestSession(filt, buffer, sink, clock)
            report = session.run(ingest.replay_events(path), replay_clock=clock)
        elif args.source == "firehose":
            url = config.firehose_url
            if not url:
                print("config error: no firehose_url configured", file=sys.stderr)
                return EXIT_CONFIG
            clock = SystemClock()
            session = ingest.IngestSession(filt, buffer, sink, clock)
            stop = threading.Event()

            def _stop(signum, frame):
                stop.set()

            signal.signal(signal.SIGINT, _stop)
            signal.signal(signal.SIGTERM, _stop)
            ticker = threading.Thread(target=_tick_loop, args=(session, stop), daemon=True)
            ticker.start()
            try:
                report = session.run(ingest.live_events(url, clock=clock, stop=stop))
            finally:
                stop.set()
        else:
            print(f"config error: unknown source {args.source!r}", file=sys.stderr)
            return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SourceUnavailable as exc:
        print(f"source unavailable: {exc}", file=sys.stderr)
        return EXIT_SOURCE
    finally:
        sink.close()
    _emit(report.as_dict())
    return EXIT_OK


def _tick_loop(session: ingest.IngestSession, stop: threading.Event) -> None:
    while not stop.wait(0.25):
        session.tick()


def cmd_label(args) -> int:
    try:
        config = _load(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    staging = StagingStore(config.staging_path)
    labeled_store = LabeledStore(config.labeled_path)
    try:
        report = pipeline.run_label_job(config, staging, labeled_store)
    except StoreUnavailable as exc:
        print(f"store unavailable: {exc}", file=sys.stderr)
        return EXIT_STORE
    except (AdapterProtocolError, AdapterTimeout) as exc:
        print(f"adapter error: {exc}", file=sys.stderr)
        return EXIT_ADAPTER
    finally:
        staging.close()
        labeled_store.close()
    _emit(report.as_dict())
    return EXIT_OK


def _parse_end_date(value: str | None) -> date:
    if value is None:
        return datetime.now(timezone.utc).date()
    return date.fromisoformat(value)


def cmd_snapshot(args) -> int:
    try:
        config = _load(args)
        end_date = _parse_end_date(args.end_date)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    labeled_store = LabeledStore(config.labeled_path)
    try:
        report = pipeline.run_snapshot_job(config, labeled_store, end_date, args.cadence)
    except SnapshotLocked as exc:
        print(f"locked: {exc}", file=sys.stderr)
        return EXIT_LOCKED
    except StoreUnavailable as exc:
        print(f"store unavailable: {exc}", file=sys.stderr)
        return EXIT_STORE
    finally:
        labeled_store.close()
    _emit(report.as_dict())
    return EXIT_OK


def cmd_run(args) -> int:
    """cmd_label then a daily cmd_snapshot; first failure aborts."""
    code = cmd_label(args)
    if code != EXIT_OK:
        return code
    args.cadence = "daily"
    return cmd_snapshot(args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="narrative", description="Discourse ingestion, labeling, and snapshot pipeline"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="TOML config file")
        p.add_argument("--seed", type=int, default=None, help="override RNG seed")

    p_ingest = sub.add_parser("ingest", help="consume the firehose or a replay file")
    common(p_ingest)
    p_ingest.add_argument(
        "--source",
        required=True,
        help="'firehose' or 'replay:<path>' (newline-delimited JSON events)",
    )
    p_ingest.set_defaults(func=cmd_ingest)

    p_label = sub.add_parser("label", help="label staged posts and archive them")
    common(p_label)
    p_label.set_defaults(func=cmd_label)

    p_snap = sub.add_parser("snapshot", help="export snapshot JSON for a window")
    common(p_snap)
    p_snap.add_argument("--cadence", choices=("daily", "weekly"), default="daily")
    p_snap.add_argument("--end-date", dest="end_date", default=None, help="YYYY-MM-DD (UTC)")
    p_snap.add_argument("--out", default=None, help="override snapshot output directory")
    p_snap.set_defaults(func=cmd_snapshot)

    p_run = sub.add_parser("run", help="label then daily snapshot")
    common(p_run)
    p_run.add_argument("--end-date", dest="end_date", default=None, help="YYYY-MM-DD (UTC)")
    p_run.add_argument("--out", default=None, help="override snapshot output directory")
    p_run.set_defaults(func=cmd_run)

    p_version = sub.add_parser("version", help="print version")
    p_version.set_defaults(func=lambda args: (print(__version__), EXIT_OK)[1])

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
