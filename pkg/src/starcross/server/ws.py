"""Minimal WebSocket (RFC 6455) bridge so browsers can speak the wire
protocol: one JSON message per text frame, same envelopes as the TCP path.

No extensions, no fragmentation, text and control frames only; plenty for a
single-page client on a LAN.
"""

from __future__ import annotations

import base64
import hashlib
import json
import socket
import struct

from .protocol import (
    MalformedFrame,
    Message,
    MAX_FRAME_BYTES,
    SequenceTracker,
    decode_payload,
    message_to_obj,
)

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

_OP_TEXT = 0x1
_OP_CLOSE = 0x8
_OP_PING = 0x9
_OP_PONG = 0xA


class WsHandshakeError(ValueError):
    pass


def _read_until(sock: socket.socket, marker: bytes, limit: int = 16384) -> bytes:
    data = b""
    while marker not in data:
        if len(data) > limit:
            raise WsHandshakeError("oversized handshake request")
        chunk = sock.recv(1024)
        if not chunk:
            raise WsHandshakeError("connection closed during handshake")
        data += chunk
    return data


def accept_handshake(sock: socket.socket) -> None:
    """Perform the server side of the opening handshake on a raw socket."""
    request = _read_until(sock, b"\r\n\r\n").decode("latin-1")
    lines = request.split("\r\n")
    if not lines[0].startswith("GET "):
        raise WsHandshakeError("expected an HTTP GET upgrade request")
    headers = {}
    for line in lines[1:]:
        if ":" in line:
            name, _, value = line.partition(":")
            headers[name.strip().lower()] = value.strip()
    if headers.get("upgrade", "").lower() != "websocket":
        raise WsHandshakeError("missing upgrade: websocket header")
    key = headers.get("sec-websocket-key")
    if not key:
        raise WsHandshakeError("missing sec-websocket-key header")
    accept = base64.b64encode(hashlib.sha1((key + _WS_GUID).encode("latin-1")).digest())
    sock.sendall(
        b"HTTP/1.1 101 Switching Protocols\r\n"
        b"Upgrade: websocket\r\n"
        b"Connection: Upgrade\r\n"
        b"Sec-WebSocket-Accept: " + accept + b"\r\n\r\n"
    )


def _recv_exact(sock: socket.socket, count: int) -> bytes | None:
    data = b""
    while len(data) < count:
        chunk = sock.recv(count - len(data))
        if not chunk:
            return None
        data += chunk
    return data


def read_ws_frame(sock: socket.socket) -> tuple[int, bytes] | None:
    """One (opcode, payload) frame, unmasked; None on clean close."""
    header = _recv_exact(sock, 2)
    if header is None:
        return None
    fin = header[0] & 0x80
    opcode = header[0] & 0x0F
    if not fin:
        raise MalformedFrame("fragmented websocket frames are not supported")
    masked = header[1] & 0x80
    length = header[1] & 0x7F
    if length == 126:
        ext = _recv_exact(sock, 2)
        if ext is None:
            return None
        (length,) = struct.unpack(">H", ext)
    elif length == 127:
        ext = _recv_exact(sock, 8)
        if ext is None:
            return None
        (length,) = struct.unpack(">Q", ext)
    if length > MAX_FRAME_BYTES:
        raise MalformedFrame(f"websocket frame of {length} bytes is too large")
    mask = b"\x00" * 4
    if masked:
        mask_read = _recv_exact(sock, 4)
        if mask_read is None:
            return None
        mask = mask_read
    payload = _recv_exact(sock, length) if length else b""
    if payload is None:
        return None
    if masked:
        payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
    return opcode, payload


def write_ws_frame(sock: socket.socket, opcode: int, payload: bytes) -> None:
    header = bytes([0x80 | opcode])
    length = len(payload)
    if length < 126:
        header += bytes([length])
    elif length < 1 << 16:
        header += bytes([126]) + struct.pack(">H", length)
    else:
        header += bytes([127]) + struct.pack(">Q", length)
    sock.sendall(header + payload)


class WsStream:
    """FrameStream-compatible adapter over an upgraded WebSocket socket."""

    def __init__(self, sock: socket.socket) -> None:
        self._sock = sock
        self._out_seq = 0
        self._in_track = SequenceTracker()

    def send(self, message: Message) -> None:
        self._out_seq += 1
        payload = json.dumps(message_to_obj(message, self._out_seq),
                             separators=(",", ":")).encode("utf-8")
        write_ws_frame(self._sock, _OP_TEXT, payload)

    def recv(self) -> tuple[int, Message] | None:
        while True:
            frame = read_ws_frame(self._sock)
            if frame is None:
                return None
            opcode, payload = frame
            if opcode == _OP_CLOSE:
                return None
            if opcode == _OP_PING:
                write_ws_frame(self._sock, _OP_PONG, payload)
                continue
            if opcode != _OP_TEXT:
                continue
            seq, message = decode_payload(payload)
            self._in_track.validate(seq)
            return seq, message

    def close(self) -> None:
        try:
            write_ws_frame(self._sock, _OP_CLOSE, b"")
        except OSError:
            pass
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()
