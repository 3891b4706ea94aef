"""Session hosting: one authoritative 30 Hz tick loop per session, plus
per-connection reader threads feeding it through bounded queues.

Two pacing modes share the same step code. Realtime runs on a monotonic
timer and never blocks on providers or clients (stale position frames are
dropped, latest wins). Lockstep advances one tick per consumed participant
input, which makes a whole session a pure function of its input trace; the
replay mode feeds a recorded trace through the same path without sockets.
"""

from __future__ import annotations

import json
import logging
import queue
import socket
import sys
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from ..adjudicator import calibrate, save_calibration
from ..agent_brain import (
    DecisionService,
    MismatchMode,
    MockProvider,
    ParseFailure,
    PromptBundle,
    ProviderError,
    assemble_prompt,
    decide,
    default_prompt_bundle,
    fallback_batch,
    review_provider_output,
    spirit_greeting,
)
from ..director import DEFAULT_DIRECTOR_CONFIG, DirectorConfig, World
from ..domain import FRAME_RATE, SessionPhase, SpiritKind, VoiceSettings
from ..memory import Event, EventKind, Journal, snapshot_context
from ..scenario import ScenarioConfig, validate_scenario
from .protocol import (
    AudioCue,
    ClientHello,
    Control,
    ControlCommand,
    ErrorMessage,
    FrameStream,
    Hud,
    Message,
    PositionUpdate,
    ProtocolError,
    Role,
    SequenceViolation,
    SessionSummary,
    StateDelta,
)
from .tts import NullTts, TtsUnavailable, VoiceRequest, synthesize

logger = logging.getLogger(__name__)

RETRY_NUDGE = "\nReturn only the JSON object, nothing else."


class ScenarioInvalid(ValueError):
    pass


class BindFailure(OSError):
    pass


class SessionDone(Exception):
    """Internal signal: the lockstep loop consumed a stop sentinel."""


SPIN_WINDOW_S = 0.003


class TickPacer:
    """Keeps a loop on a fixed period: sleep the bulk, spin the last moment.

    Plain time.sleep can oversleep by several milliseconds on a loaded box;
    spinning the final window keeps tick starts tight. Falling behind resets
    the phase instead of bursting to catch up.
    """

    def __init__(self, period_s: float) -> None:
        self.period_s = period_s
        self._next_at = time.monotonic()
        # Short GIL slices keep background provider work from stalling ticks.
        sys.setswitchinterval(0.002)

    def wait(self) -> None:
        self._next_at += self.period_s
        while True:
            remaining = self._next_at - time.monotonic()
            if remaining <= 0:
                break
            if remaining > SPIN_WINDOW_S:
                time.sleep(remaining - SPIN_WINDOW_S)
        if time.monotonic() - self._next_at > self.period_s:
            self._next_at = time.monotonic()


@dataclass
class _Connection:
    stream: FrameStream
    role: Role | None = None
    send_lock: threading.Lock = field(default_factory=threading.Lock)
    alive: bool = True

    def send(self, message: Message) -> None:
        if not self.alive:
            return
        try:
            with self.send_lock:
                self.stream.send(message)
        except OSError:
            self.alive = False


@dataclass
class _DecisionRequest:
    request_tick: int
    prompt: str
    retried: bool = False


class TraceWriter:
    """Records the consumed input sequence so a session can be replayed."""

    def __init__(self, path: str | Path) -> None:
        self._fh = open(path, "w", encoding="utf-8")

    def write(self, record: dict[str, Any]) -> None:
        self._fh.write(json.dumps(record, separators=(",", ":")) + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()


class SessionHost:
    """Owns one session: world, journal, provider pipeline, and connections."""

    def __init__(
        self,
        scenario: ScenarioConfig,
        *,
        seed: int = 0,
        provider=None,
        tts=None,
        lying_cars: MismatchMode = MismatchMode.REJECT,
        journal_path: str | Path | None = None,
        trace_out: str | Path | None = None,
        prompt_bundle: PromptBundle | None = None,
        director_config: DirectorConfig | None = None,
        calibration_out: str | Path | None = None,
        sync_decisions: bool = False,
        tick_hz: int = FRAME_RATE,
    ) -> None:
        report = validate_scenario(scenario)
        if not report.ok:
            raise ScenarioInvalid(report.summary())
        self.scenario = scenario
        self.config = director_config or DEFAULT_DIRECTOR_CONFIG
        self.provider = provider if provider is not None else MockProvider(seed=seed)
        self.tts = tts if tts is not None else NullTts()
        self.lying_cars = lying_cars
        self.bundle = prompt_bundle or default_prompt_bundle()
        self.tick_hz = tick_hz
        self.sync_decisions = sync_decisions
        self.seed = seed

        self.calibration = calibrate(scenario.calibration_refs)
        if calibration_out is not None:
            save_calibration(calibration_out, self.calibration,
                             scenario.calibration_refs, fitted_at=time.time())

        self.journal = Journal(journal_path)
        self.trace = TraceWriter(trace_out) if trace_out else None
        self.world = World(
            scenario=scenario,
            config=self.config,
            calibration=self.calibration,
            seed=seed,
            nickname="friend",
        )
        self._record(self.world.begin())

        self._service: DecisionService | None = None
        if not sync_decisions:
            self._service = DecisionService(self.provider)
        self._next_request_id = 1
        self._requests: dict[int, _DecisionRequest] = {}
        self._ready_batches: list[tuple[int, int, Any]] = []  # (apply_tick, rid, batch)

        self._connections: list[_Connection] = []
        self._conn_lock = threading.Lock()
        self._controls: queue.Queue = queue.Queue()
        self._ordered_inputs: queue.Queue = queue.Queue()  # lockstep message stream
        self._latest_raw: tuple[float, float] | None = None
        self._latest_lock = threading.Lock()
        self._paused = False
        self._stop = threading.Event()
        self.done = threading.Event()
        self._listener: socket.socket | None = None
        self.port: int | None = None
        self._summary_sent = False
        self.tick_wall_times: list[float] = []  # liveness instrumentation

    # ---- shared per-tick machinery ----

    def _record(self, events: list[Event]) -> None:
        for event in events:
            self.journal.record(event)

    def _ensure_greetings(self) -> None:
        if self.world.greetings:
            return
        greetings = {}
        for spirit in self.scenario.spirits:
            if spirit.kind in (SpiritKind.TREE, SpiritKind.VEHICLE):
                greetings[spirit.id] = spirit_greeting(spirit, self.world.nickname, self.provider)
        self.world.greetings = greetings

    def _set_nickname(self, nickname: str) -> None:
        self.world.nickname = nickname.strip() or "friend"
        self.world.greetings = {}
        self._ensure_greetings()

    def _build_prompt(self) -> str:
        context = snapshot_context(
            self.journal,
            self.scenario.layout,
            start_pos=self.scenario.participant_start,
        )
        return assemble_prompt(self.bundle, context, self.world.nickname, self.world.phase)

    def _safe_decide(self, prompt: str):
        try:
            return decide(prompt, self.provider), None
        except ProviderError as exc:
            return None, str(exc)

    def _pump_decisions(self) -> list[Event]:
        events: list[Event] = []
        if self.world.wants_decision():
            rid = self._next_request_id
            self._next_request_id += 1
            prompt = self._build_prompt()
            self._requests[rid] = _DecisionRequest(request_tick=self.world.tick, prompt=prompt)
            self.world.decision_inflight = True
            if self.sync_decisions:
                output, error = self._safe_decide(prompt)
                self._finish_decision(rid, output, error)
            else:
                assert self._service is not None
                self._service.submit(rid, prompt)
        if self._service is not None:
            for result in self._service.poll():
                self._finish_decision(result.request_id, result.output, result.error)
        due = [item for item in self._ready_batches if item[0] <= self.world.tick]
        self._ready_batches = [item for item in self._ready_batches if item[0] > self.world.tick]
        for _, rid, batch in sorted(due, key=lambda item: item[1]):
            events.extend(self.world.apply_command_batch(batch, seed_salt=rid))
        return events

    def _finish_decision(self, rid: int, output, error: str | None) -> None:
        request = self._requests[rid]
        batch = None
        if error is None:
            try:
                report = review_provider_output(output, self.lying_cars)
                if report.details:
                    logger.info("decision %d filtered: %s", rid, "; ".join(report.details))
                batch = report.repaired
            except ParseFailure as failure:
                logger.warning("decision %d unparseable: %s", rid, failure)
                error = str(failure)
        if batch is None:
            if not request.retried:
                request.retried = True
                retry_prompt = request.prompt + RETRY_NUDGE
                if self.sync_decisions:
                    output, error = self._safe_decide(retry_prompt)
                    self._finish_decision(rid, output, error)
                else:
                    assert self._service is not None
                    self._service.submit(rid, retry_prompt)
                return
            logger.warning("decision %d failed twice (%s); using style defaults", rid, error)
            batch = fallback_batch(note=f"fallback after: {error}")
        apply_tick = request.request_tick + self.config.decision_horizon_ticks
        self._ready_batches.append((apply_tick, rid, batch))
        del self._requests[rid]

    def _apply_control(self, control: Control) -> list[Event]:
        events: list[Event] = []
        if control.command is ControlCommand.START:
            if self.world.phase is SessionPhase.ONBOARDING:
                self._ensure_greetings()
                events.extend(self.world.begin_training())
            self._paused = False
        elif control.command is ControlCommand.PAUSE:
            self._paused = True
        elif control.command is ControlCommand.DIFFICULTY_OVERRIDE:
            if control.scaffolding is not None and control.challenge is not None:
                events.extend(
                    self.world.apply_difficulty_override(control.scaffolding, control.challenge)
                )
        elif control.command is ControlCommand.END:
            events.extend(self.world.complete(reason="manual"))
        return events

    def _tick(self, raw_positions: list[tuple[float, float]]) -> None:
        self.tick_wall_times.append(time.monotonic())
        events: list[Event] = []
        while True:
            try:
                events.extend(self._apply_control(self._controls.get_nowait()))
            except queue.Empty:
                break
        events.extend(self._pump_decisions())
        tick_processed = self.world.tick
        events.extend(self.world.step(raw_positions))
        self._record(events)
        self._emit(events, tick_processed)

    def _emit(self, events: list[Event], tick: int | None = None) -> None:
        for event in events:
            if event.kind is EventKind.UTTERANCE:
                self._broadcast(self._audio_cue(event))
        if events or self.world.phase is not SessionPhase.ONBOARDING:
            self._broadcast(self._state_delta(tick))
        if self.world.phase is SessionPhase.COMPLETED and not self._summary_sent:
            self._summary_sent = True
            self._broadcast(self.summary())

    def _audio_cue(self, event: Event) -> AudioCue:
        text = event.payload["text"]
        speaker = event.payload.get("speaker", "")
        voice = VoiceSettings()
        for spirit in self.scenario.spirits:
            if spirit.id == speaker:
                voice = spirit.voice
                break
        try:
            ref = synthesize(VoiceRequest(text=text, voice=voice), self.tts).ref
        except TtsUnavailable as exc:
            logger.warning("tts unavailable, caption-only cue: %s", exc)
            ref = None
        return AudioCue(utterance_id=event.payload["utterance_id"], text=text, audio_ref=ref)

    def _state_delta(self, tick: int | None = None) -> StateDelta:
        # A delta carries the tick whose step produced it; out-of-step sends
        # (hello, paused controls) use the upcoming tick.
        return StateDelta(
            tick=self.world.tick if tick is None else tick,
            changed=self.world.snapshot(),
            hud=Hud(
                collected=self.world.collected,
                target=self.world.star_target(),
                remaining_seconds=round(self.world.remaining_seconds(), 2),
            ),
        )

    def summary(self) -> SessionSummary:
        return SessionSummary(
            outcomes=tuple(self.world.trial_history),
            accuracy=round(self.world.accuracy(), 6),
        )

    # ---- connection handling ----

    def _broadcast(self, message: Message) -> None:
        with self._conn_lock:
            conns = list(self._connections)
        for conn in conns:
            conn.send(message)

    def start_server(self, port: int, pacing: str = "realtime") -> int:
        """Bind, start the listener and the tick loop; returns the bound port."""
        if pacing not in ("realtime", "lockstep"):
            raise ValueError(f"unknown pacing {pacing!r}")
        self._pacing = pacing
        try:
            listener = socket.create_server(("127.0.0.1", port))
        except OSError as exc:
            raise BindFailure(f"cannot bind port {port}: {exc}") from exc
        self._listener = listener
        self.port = listener.getsockname()[1]
        threading.Thread(target=self._accept_loop, daemon=True).start()
        target = self._run_realtime if pacing == "realtime" else self._run_lockstep_serve
        threading.Thread(target=target, daemon=True).start()
        return self.port

    def _accept_loop(self) -> None:
        assert self._listener is not None
        while not self._stop.is_set():
            try:
                sock, _ = self._listener.accept()
            except OSError:
                return
            conn = _Connection(stream=FrameStream(sock))
            threading.Thread(target=self._reader_loop, args=(conn,), daemon=True).start()

    def start_ws_bridge(self, port: int) -> int:
        """Accept browser WebSocket clients speaking the same message envelopes."""
        from .ws import WsHandshakeError, WsStream, accept_handshake

        try:
            listener = socket.create_server(("127.0.0.1", port))
        except OSError as exc:
            raise BindFailure(f"cannot bind ws port {port}: {exc}") from exc
        self._ws_listener = listener

        def accept_loop() -> None:
            while not self._stop.is_set():
                try:
                    sock, _ = listener.accept()
                except OSError:
                    return
                try:
                    accept_handshake(sock)
                except (WsHandshakeError, OSError) as exc:
                    logger.info("ws handshake failed: %s", exc)
                    sock.close()
                    continue
                conn = _Connection(stream=WsStream(sock))
                threading.Thread(target=self._reader_loop, args=(conn,), daemon=True).start()

        threading.Thread(target=accept_loop, daemon=True).start()
        return listener.getsockname()[1]

    def _hello(self, conn: _Connection, hello: ClientHello) -> bool:
        with self._conn_lock:
            taken = {c.role for c in self._connections if c.alive}
            if hello.role in taken:
                conn.send(ErrorMessage("role_conflict", f"a {hello.role} is already connected"))
                return False
            conn.role = hello.role
            self._connections.append(conn)
        if hello.role is Role.PARTICIPANT:
            self._set_nickname(hello.nickname)
            if self.trace:
                self.trace.write(
                    {"kind": "hello", "nickname": hello.nickname, "role": hello.role.value}
                )
        conn.send(self._state_delta())
        return True

    def _reader_loop(self, conn: _Connection) -> None:
        lockstep = self._lockstep
        try:
            while not self._stop.is_set():
                try:
                    item = conn.stream.recv()
                except SequenceViolation as exc:
                    logger.warning("dropping frame: %s", exc)
                    conn.send(ErrorMessage("bad_seq", str(exc)))
                    continue
                if item is None:
                    break
                _, message = item
                if conn.role is None:
                    if isinstance(message, ClientHello):
                        if not self._hello(conn, message):
                            break
                        continue
                    conn.send(ErrorMessage("hello_required", "send client_hello first"))
                    break
                if isinstance(message, PositionUpdate) and conn.role is Role.PARTICIPANT:
                    if lockstep:
                        self._ordered_inputs.put(("position", message.raw))
                    else:
                        with self._latest_lock:
                            self._latest_raw = message.raw  # latest wins, stale frames dropped
                elif isinstance(message, Control):
                    if lockstep:
                        self._ordered_inputs.put(("control", message))
                    else:
                        self._controls.put(message)
        except (ProtocolError, OSError) as exc:
            logger.info("connection dropped: %s", exc)
        finally:
            conn.alive = False
            with self._conn_lock:
                if conn in self._connections:
                    self._connections.remove(conn)
            conn.stream.close()

    # ---- pacing loops ----

    @property
    def _lockstep(self) -> bool:
        return self._pacing == "lockstep"

    _pacing = "realtime"

    def _run_realtime(self) -> None:
        pacer = TickPacer(1.0 / self.tick_hz)
        try:
            while not self._stop.is_set() and self.world.phase is not SessionPhase.COMPLETED:
                if self._paused:
                    while True:
                        try:
                            self._apply_paused_control()
                        except queue.Empty:
                            break
                    time.sleep(pacer.period_s)
                    continue
                with self._latest_lock:
                    raw = self._latest_raw
                    self._latest_raw = None
                positions = [raw] if raw is not None else []
                if self.trace:
                    if positions:
                        self.trace.write({"kind": "position", "raw": list(positions[0])})
                    else:
                        self.trace.write({"kind": "tick"})
                self._tick(positions)
                pacer.wait()
        finally:
            self._finish()

    def _apply_paused_control(self) -> None:
        control = self._controls.get_nowait()
        events = self._apply_control(control)
        self._record(events)
        self._emit(events)

    def _run_lockstep_serve(self) -> None:
        try:
            while not self._stop.is_set() and self.world.phase is not SessionPhase.COMPLETED:
                try:
                    kind, value = self._ordered_inputs.get(timeout=0.25)
                except queue.Empty:
                    continue
                self._consume_lockstep(kind, value)
        except SessionDone:
            pass
        finally:
            self._finish()

    def _consume_lockstep(self, kind: str, value) -> None:
        if kind == "stop":
            raise SessionDone
        if kind == "control":
            if self.trace:
                record = {"kind": "control", "command": value.command.value}
                if value.scaffolding is not None:
                    record["scaffolding"] = value.scaffolding
                if value.challenge is not None:
                    record["challenge"] = value.challenge
                self.trace.write(record)
            events = self._apply_control(value)
            self._record(events)
            self._emit(events)
            return
        if self.trace:
            self.trace.write({"kind": "position", "raw": list(value)})
        self._tick([value])

    def run_replay(self, trace_path: str | Path) -> None:
        """Feed a recorded trace through the lockstep path, without sockets."""
        self._pacing = "lockstep"
        with open(trace_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                kind = record["kind"]
                if self.world.phase is SessionPhase.COMPLETED:
                    break
                if kind == "hello":
                    self._set_nickname(record["nickname"])
                elif kind == "control":
                    control = Control(
                        command=ControlCommand(record["command"]),
                        scaffolding=record.get("scaffolding"),
                        challenge=record.get("challenge"),
                    )
                    events = self._apply_control(control)
                    self._record(events)
                elif kind == "position":
                    self._tick([tuple(record["raw"])])
                elif kind == "tick":
                    self._tick([])
        self._finish()

    def run_for(self, ticks: int, positions_fn: Callable[[int], tuple[float, float]] | None = None,
                realtime: bool = True) -> None:
        """Headless run of a fixed number of ticks (no sockets)."""
        self._ensure_greetings()
        pacer = TickPacer(1.0 / self.tick_hz)
        for i in range(ticks):
            if self._stop.is_set() or self.world.phase is SessionPhase.COMPLETED:
                break
            positions = [positions_fn(i)] if positions_fn else []
            self._tick(positions)
            if realtime:
                pacer.wait()
        self._finish()

    def _finish(self) -> None:
        if self.done.is_set():
            return
        if self.world.phase is SessionPhase.COMPLETED and not self._summary_sent:
            self._summary_sent = True
            self._broadcast(self.summary())
        if self.trace:
            self.trace.close()
        if self._service is not None:
            self._service.close()
        self.journal.close()
        self.done.set()

    _ws_listener: socket.socket | None = None

    def stop(self) -> None:
        self._stop.set()
        self._ordered_inputs.put(("stop", None))
        for listener in (self._listener, self._ws_listener):
            if listener is not None:
                try:
                    listener.close()
                except OSError:
                    pass
        with self._conn_lock:
            conns = list(self._connections)
        for conn in conns:
            conn.stream.close()

    def wait_done(self, timeout: float | None = None) -> bool:
        return self.done.wait(timeout)
