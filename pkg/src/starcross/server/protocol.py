"""Wire protocol: length-prefixed UTF-8 JSON frames, one message per frame.

Every message travels inside an envelope {"seq": n, "type": t, ...fields}
with a per-connection, per-direction sequence number that must strictly
increase; replayed or reordered frames are rejected by the receiver.
"""

from __future__ import annotations

import json
import socket
import struct
from dataclasses import dataclass
from enum import Enum
from typing import Any

MAX_FRAME_BYTES = 1 << 20
_HEADER = struct.Struct(">I")


class ProtocolError(ValueError):
    pass


class MalformedFrame(ProtocolError):
    pass


class FrameTooLarge(ProtocolError):
    pass


class UnknownMessageType(ProtocolError):
    pass


class SchemaError(ProtocolError):
    pass


class SequenceViolation(ProtocolError):
    pass


class Role(str, Enum):
    PARTICIPANT = "participant"
    FACILITATOR = "facilitator"

    def __str__(self) -> str:
        return self.value


class ControlCommand(str, Enum):
    START = "start"
    PAUSE = "pause"
    DIFFICULTY_OVERRIDE = "difficulty_override"
    END = "end"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Hud:
    collected: int
    target: int
    remaining_seconds: float


@dataclass(frozen=True)
class ClientHello:
    nickname: str
    role: Role


@dataclass(frozen=True)
class PositionUpdate:
    raw: tuple[float, float]
    client_tick: int


@dataclass(frozen=True)
class StateDelta:
    tick: int
    changed: dict[str, Any]
    hud: Hud


@dataclass(frozen=True)
class AudioCue:
    utterance_id: str
    text: str
    audio_ref: str | None


@dataclass(frozen=True)
class Control:
    command: ControlCommand
    scaffolding: int | None = None
    challenge: int | None = None


@dataclass(frozen=True)
class SessionSummary:
    outcomes: tuple[dict[str, Any], ...]
    accuracy: float


@dataclass(frozen=True)
class ErrorMessage:
    code: str
    detail: str


Message = (
    ClientHello | PositionUpdate | StateDelta | AudioCue | Control | SessionSummary | ErrorMessage
)

_TYPE_NAMES = {
    ClientHello: "client_hello",
    PositionUpdate: "position_update",
    StateDelta: "state_delta",
    AudioCue: "audio_cue",
    Control: "control",
    SessionSummary: "session_summary",
    ErrorMessage: "error",
}


def message_to_obj(message: Message, seq: int) -> dict[str, Any]:
    obj: dict[str, Any] = {"seq": seq, "type": _TYPE_NAMES[type(message)]}
    if isinstance(message, ClientHello):
        obj.update(nickname=message.nickname, role=message.role.value)
    elif isinstance(message, PositionUpdate):
        obj.update(raw=[message.raw[0], message.raw[1]], client_tick=message.client_tick)
    elif isinstance(message, StateDelta):
        obj.update(
            tick=message.tick,
            changed=message.changed,
            hud={
                "collected": message.hud.collected,
                "target": message.hud.target,
                "remaining_seconds": message.hud.remaining_seconds,
            },
        )
    elif isinstance(message, AudioCue):
        obj.update(
            utterance_id=message.utterance_id, text=message.text, audio_ref=message.audio_ref
        )
    elif isinstance(message, Control):
        obj.update(command=message.command.value)
        if message.scaffolding is not None:
            obj["scaffolding"] = message.scaffolding
        if message.challenge is not None:
            obj["challenge"] = message.challenge
    elif isinstance(message, SessionSummary):
        obj.update(outcomes=list(message.outcomes), accuracy=message.accuracy)
    else:
        obj.update(code=message.code, detail=message.detail)
    return obj


def _need(obj: dict[str, Any], key: str) -> Any:
    if key not in obj:
        raise SchemaError(f"message missing field {key!r}")
    return obj[key]


def _vec2(value: Any, what: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise SchemaError(f"{what} must be a 2-element array")
    return float(value[0]), float(value[1])


def obj_to_message(obj: dict[str, Any]) -> tuple[int, Message]:
    if not isinstance(obj, dict):
        raise SchemaError("message must be a JSON object")
    seq = _need(obj, "seq")
    if not isinstance(seq, int) or isinstance(seq, bool) or seq < 1:
        raise SchemaError("seq must be a positive integer")
    mtype = _need(obj, "type")
    try:
        if mtype == "client_hello":
            try:
                role = Role(_need(obj, "role"))
            except ValueError as exc:
                raise SchemaError(f"unknown role {obj.get('role')!r}") from exc
            return seq, ClientHello(nickname=str(_need(obj, "nickname")), role=role)
        if mtype == "position_update":
            tick = _need(obj, "client_tick")
            if not isinstance(tick, int) or isinstance(tick, bool):
                raise SchemaError("client_tick must be an integer")
            return seq, PositionUpdate(raw=_vec2(_need(obj, "raw"), "raw"), client_tick=tick)
        if mtype == "state_delta":
            hud = _need(obj, "hud")
            return seq, StateDelta(
                tick=int(_need(obj, "tick")),
                changed=dict(_need(obj, "changed")),
                hud=Hud(
                    collected=int(_need(hud, "collected")),
                    target=int(_need(hud, "target")),
                    remaining_seconds=float(_need(hud, "remaining_seconds")),
                ),
            )
        if mtype == "audio_cue":
            ref = _need(obj, "audio_ref")
            return seq, AudioCue(
                utterance_id=str(_need(obj, "utterance_id")),
                text=str(_need(obj, "text")),
                audio_ref=None if ref is None else str(ref),
            )
        if mtype == "control":
            try:
                command = ControlCommand(_need(obj, "command"))
            except ValueError as exc:
                raise SchemaError(f"unknown control command {obj.get('command')!r}") from exc
            scaffolding = obj.get("scaffolding")
            challenge = obj.get("challenge")
            return seq, Control(
                command=command,
                scaffolding=None if scaffolding is None else int(scaffolding),
                challenge=None if challenge is None else int(challenge),
            )
        if mtype == "session_summary":
            outcomes = _need(obj, "outcomes")
            if not isinstance(outcomes, list):
                raise SchemaError("outcomes must be an array")
            return seq, SessionSummary(
                outcomes=tuple(dict(o) for o in outcomes),
                accuracy=float(_need(obj, "accuracy")),
            )
        if mtype == "error":
            return seq, ErrorMessage(code=str(_need(obj, "code")), detail=str(_need(obj, "detail")))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ProtocolError):
            raise
        raise SchemaError(f"bad field value: {exc}") from exc
    raise UnknownMessageType(f"unknown message type {mtype!r}")


def encode_frame(message: Message, seq: int) -> bytes:
    payload = json.dumps(message_to_obj(message, seq), separators=(",", ":")).encode("utf-8")
    if len(payload) > MAX_FRAME_BYTES:
        raise FrameTooLarge(f"frame of {len(payload)} bytes exceeds {MAX_FRAME_BYTES}")
    return _HEADER.pack(len(payload)) + payload


def decode_payload(payload: bytes) -> tuple[int, Message]:
    try:
        obj = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedFrame(f"frame payload is not valid JSON: {exc}") from exc
    return obj_to_message(obj)


class SequenceTracker:
    """Enforces strictly increasing sequence numbers on one direction."""

    def __init__(self) -> None:
        self.last = 0

    def validate(self, seq: int) -> None:
        if seq <= self.last:
            raise SequenceViolation(f"seq {seq} after {self.last}: replayed or reordered")
        self.last = seq


class FrameStream:
    """Blocking frame reader/writer over a connected socket."""

    def __init__(self, sock: socket.socket) -> None:
        self._sock = sock
        self._out_seq = 0
        self._in_track = SequenceTracker()

    def send(self, message: Message) -> None:
        self._out_seq += 1
        self._sock.sendall(encode_frame(message, self._out_seq))

    def recv(self) -> tuple[int, Message] | None:
        """Next validated message, or None on clean EOF."""
        header = self._read_exact(_HEADER.size)
        if header is None:
            return None
        (length,) = _HEADER.unpack(header)
        if length > MAX_FRAME_BYTES:
            raise FrameTooLarge(f"frame of {length} bytes exceeds {MAX_FRAME_BYTES}")
        payload = self._read_exact(length)
        if payload is None:
            raise MalformedFrame("connection closed mid-frame")
        seq, message = decode_payload(payload)
        self._in_track.validate(seq)
        return seq, message

    def _read_exact(self, count: int) -> bytes | None:
        chunks = b""
        while len(chunks) < count:
            chunk = self._sock.recv(count - len(chunks))
            if not chunk:
                if not chunks:
                    return None
                raise MalformedFrame("connection closed mid-frame")
            chunks += chunk
        return chunks

    def close(self) -> None:
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()
