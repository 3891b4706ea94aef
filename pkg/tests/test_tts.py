from __future__ import annotations

import pytest

from starcross.domain import VoiceSettings
from starcross.server.tts import (
    AudioRef,
    FailingTts,
    FileStubTts,
    NullTts,
    TtsUnavailable,
    VoiceRequest,
    synthesize,
)


def test_null_provider_returns_silent_marker():
    ref = synthesize(VoiceRequest(text="hello there"), NullTts())
    assert ref == AudioRef(ref=None, duration_s=0.0)


def test_file_stub_is_deterministic(tmp_path):
    provider = FileStubTts(tmp_path)
    request = VoiceRequest(text="take your time", voice=VoiceSettings(rate=1.25))
    first = synthesize(request, provider)
    second = synthesize(request, provider)
    assert first == second
    assert first.ref is not None and first.ref.endswith(".voice.txt")
    assert first.duration_s > 0


def test_file_stub_distinguishes_voices(tmp_path):
    provider = FileStubTts(tmp_path)
    a = synthesize(VoiceRequest(text="hello", voice=VoiceSettings(pitch=1.0)), provider)
    b = synthesize(VoiceRequest(text="hello", voice=VoiceSettings(pitch=1.2)), provider)
    assert a.ref != b.ref


def test_failing_provider_raises_unavailable(tmp_path):
    with pytest.raises(TtsUnavailable):
        synthesize(VoiceRequest(text="hello"), FailingTts())


def test_unexpected_backend_error_normalized():
    class Broken:
        def synthesize(self, request):
            raise OSError("disk full")

    with pytest.raises(TtsUnavailable):
        synthesize(VoiceRequest(text="hello"), Broken())


def test_word_cap_enforced_on_requests():
    with pytest.raises(ValueError):
        VoiceRequest(text="word " * 26)
