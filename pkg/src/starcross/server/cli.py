"""Command-line entry points: serve, replay, analyze, validate."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from ..agent_brain import MismatchMode, MockProvider, provider_from_env
from ..director import load_director_config
from ..memory import Journal
from ..scenario import default_scenario, load_scenario, validate_scenario
from .analytics import InsufficientData, export_analytics, write_csv
from .session import BindFailure, ScenarioInvalid, SessionHost
from .tts import FileStubTts, NullTts


def _scenario_from(path: str | None):
    return load_scenario(path) if path else default_scenario()


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", help="scenario JSON file (default: bundled scene)")
    parser.add_argument("--seed", type=int, default=0, help="provider and schedule seed")
    parser.add_argument(
        "--lying-cars",
        choices=["allow", "reject"],
        default="reject",
        help="pass mismatched spawns through as lying cars, or drop them",
    )
    parser.add_argument("--director-config", help="difficulty ladder JSON (default: bundled)")
    parser.add_argument("--journal", help="session journal output path (JSONL)")


def _make_host(args, *, provider, sync_decisions: bool, trace_out=None,
               default_calibration: bool = False) -> SessionHost:
    journal = Path(args.journal or f"session_{int(time.time() * 1000)}.jsonl")
    director_config = load_director_config(args.director_config) if args.director_config else None
    tts = FileStubTts(args.tts_dir) if getattr(args, "tts", "null") == "file" else NullTts()
    calibration_out = getattr(args, "calibration", None)
    if calibration_out is None and default_calibration:
        calibration_out = journal.parent / "calibration.json"
    return SessionHost(
        _scenario_from(args.scenario),
        seed=args.seed,
        provider=provider,
        tts=tts,
        lying_cars=MismatchMode(args.lying_cars),
        journal_path=journal,
        trace_out=trace_out,
        director_config=director_config,
        calibration_out=calibration_out,
        sync_decisions=sync_decisions,
    )


def cmd_serve(args) -> int:
    if args.provider == "mock":
        provider = MockProvider(seed=args.seed)
    else:
        provider = provider_from_env(seed=args.seed)
    try:
        host = _make_host(
            args,
            provider=provider,
            sync_decisions=args.pacing == "lockstep",
            trace_out=args.record_trace,
            default_calibration=True,
        )
        port = host.start_server(args.port, pacing=args.pacing)
    except (ScenarioInvalid, BindFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"session listening on 127.0.0.1:{port} ({args.pacing})")
    if args.ws_port is not None:
        ws_port = host.start_ws_bridge(args.ws_port)
        print(f"websocket bridge on 127.0.0.1:{ws_port}")
    print(f"journal: {host.journal.path}")
    try:
        host.wait_done()
    except KeyboardInterrupt:
        print("stopping")
    finally:
        host.stop()
    summary = host.summary()
    print(f"session over: {len(summary.outcomes)} trials, accuracy {summary.accuracy:.3f}")
    return 0


def cmd_replay(args) -> int:
    try:
        host = _make_host(args, provider=MockProvider(seed=args.seed), sync_decisions=True)
    except ScenarioInvalid as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    host.run_replay(args.trace)
    summary = host.summary()
    print(f"replayed to journal {host.journal.path}")
    print(f"{len(summary.outcomes)} trials, accuracy {summary.accuracy:.3f}")
    return 0


def cmd_analyze(args) -> int:
    journal = Journal.load(args.journal)
    try:
        report = export_analytics(journal)
    except InsufficientData as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.csv:
        write_csv(report, args.csv)
        print(f"series written to {args.csv}")
    fit = report.fit
    print(f"trials: {len(report.successes)}")
    print(f"final accuracy: {report.accuracy_series[-1]:.3f}")
    if fit.separated:
        print("logistic fit: perfect separation, slope unbounded")
    else:
        print(
            f"logistic fit: intercept {fit.intercept:.4f}, slope {fit.slope:.6f} "
            f"(se {fit.slope_se:.6f}), Wald p = {fit.p_value:.4g}"
        )
    return 0


def cmd_validate(args) -> int:
    report = validate_scenario(_scenario_from(args.scenario))
    print(report.summary())
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="starcross",
        description="Road-crossing training sessions with style-conditioned driver agents",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="host a live session")
    _add_common(serve)
    serve.add_argument("--port", type=int, default=8871)
    serve.add_argument("--provider", choices=["mock", "remote"], default="mock")
    serve.add_argument("--pacing", choices=["realtime", "lockstep"], default="realtime")
    serve.add_argument("--record-trace", help="record the consumed input trace (JSONL)")
    serve.add_argument("--ws-port", type=int, help="also accept browser WebSocket clients")
    serve.add_argument("--tts", choices=["null", "file"], default="null")
    serve.add_argument("--tts-dir", default="voice_out")
    serve.add_argument(
        "--calibration",
        help="fitted calibration parameters file (JSON); regenerated at every "
        "start, default alongside the journal",
    )
    serve.set_defaults(func=cmd_serve)

    replay = sub.add_parser("replay", help="re-run a recorded input trace, no sockets")
    _add_common(replay)
    replay.add_argument("--trace", required=True)
    replay.set_defaults(func=cmd_replay)

    analyze = sub.add_parser("analyze", help="learning-curve analytics over a journal")
    analyze.add_argument("--journal", required=True)
    analyze.add_argument("--csv", help="per-trial series output")
    analyze.set_defaults(func=cmd_analyze)

    validate = sub.add_parser("validate", help="check a scenario file")
    validate.add_argument("--scenario")
    validate.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
