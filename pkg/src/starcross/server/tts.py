"""Voice synthesis behind a provider interface.

The null provider returns a silent zero-duration marker so the whole audio
pipeline is testable offline; the file stub writes deterministic
content-addressed artifacts for tests that need a real reference.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

from ..agent_brain import word_count
from ..domain import UTTERANCE_WORD_CAP, VoiceSettings

WORDS_PER_SECOND = 2.5


class TtsUnavailable(RuntimeError):
    """Synthesis failed; the session continues with caption-only cues."""


@dataclass(frozen=True)
class VoiceRequest:
    text: str
    voice: VoiceSettings = VoiceSettings()

    def __post_init__(self) -> None:
        if word_count(self.text) > UTTERANCE_WORD_CAP:
            raise ValueError(f"voice request exceeds the {UTTERANCE_WORD_CAP}-word cap")


@dataclass(frozen=True)
class AudioRef:
    ref: str | None  # file path, or None for the silent marker
    duration_s: float


class NullTts:
    """Silent provider: every request yields the zero-duration marker."""

    def synthesize(self, request: VoiceRequest) -> AudioRef:
        return AudioRef(ref=None, duration_s=0.0)


class FileStubTts:
    """Deterministic offline stub: content-hashed text artifacts.

    The same text and voice settings always produce the same file path and
    duration, which is what the pipeline tests key on.
    """

    def __init__(self, directory: str | Path) -> None:
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def synthesize(self, request: VoiceRequest) -> AudioRef:
        key = f"{request.voice.timbre}|{request.voice.rate}|{request.voice.pitch}|{request.text}"
        digest = hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]
        path = self.directory / f"{digest}.voice.txt"
        if not path.exists():
            path.write_text(request.text + "\n", encoding="utf-8")
        duration = word_count(request.text) / (WORDS_PER_SECOND * request.voice.rate)
        return AudioRef(ref=str(path), duration_s=duration)


class FailingTts:
    """Always-unavailable provider, for exercising the degraded path."""

    def synthesize(self, request: VoiceRequest) -> AudioRef:
        raise TtsUnavailable("synthesis backend not reachable")


def synthesize(request: VoiceRequest, provider) -> AudioRef:
    """Run one synthesis request, normalizing backend faults to TtsUnavailable."""
    try:
        return provider.synthesize(request)
    except TtsUnavailable:
        raise
    except Exception as exc:
        raise TtsUnavailable(str(exc)) from exc
