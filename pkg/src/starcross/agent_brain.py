"""Language-model side of the engine: prompt assembly, providers, command
parsing, and hallucination filtering.

Provider calls run on a background worker with a completion queue
(DecisionService); the tick loop never waits on a provider. Parsed command
batches are immutable after filtering.
"""

from __future__ import annotations

import hashlib
import json
import os
import queue
import re
import socket
import threading
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, replace
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .domain import (
    DrivingStyle,
    GestureKind,
    SessionPhase,
    Spirit,
    UTTERANCE_WORD_CAP,
    UnknownStyleError,
)

DEFAULT_NICKNAME = "friend"
DEFAULT_PROVIDER_DEADLINE_S = 8.0

SCAFFOLD_TOKENS = ("voice_hint", "gesture_hint")

# Marker phrases the mock provider keys on to tell prompt kinds apart.
DECISION_MARKER = "Respond with exactly one JSON object"
INTENT_MARKER = "Speak one short line as this driver"
GREETING_MARKER = "Say one short friendly line to the child"

_PLACEHOLDER_RE = re.compile(r"\{\{(\w+)\}\}")


class PromptAssemblyError(ValueError):
    pass


class MissingPlaceholder(PromptAssemblyError):
    def __init__(self, name: str) -> None:
        super().__init__(f"template references undefined variable {{{{{name}}}}}")
        self.name = name


class EmptyPromptSection(PromptAssemblyError):
    def __init__(self, section: str) -> None:
        super().__init__(f"prompt section {section!r} is empty for a training-phase decision")
        self.section = section


@dataclass(frozen=True)
class PromptBundle:
    """The four context files a decision prompt is assembled from."""

    background: str
    tool: str
    social: str
    history: str


def load_prompt_bundle(directory: str | Path) -> PromptBundle:
    d = Path(directory)
    return PromptBundle(
        background=(d / "background.txt").read_text(encoding="utf-8"),
        tool=(d / "tool.txt").read_text(encoding="utf-8"),
        social=(d / "social.txt").read_text(encoding="utf-8"),
        history=(d / "history.tmpl").read_text(encoding="utf-8"),
    )


def default_prompt_bundle() -> PromptBundle:
    base = resources.files("starcross.data").joinpath("prompts")
    return PromptBundle(
        background=base.joinpath("background.txt").read_text("utf-8"),
        tool=base.joinpath("tool.txt").read_text("utf-8"),
        social=base.joinpath("social.txt").read_text("utf-8"),
        history=base.joinpath("history.tmpl").read_text("utf-8"),
    )


def substitute(template: str, variables: Mapping[str, str]) -> str:
    def repl(match: re.Match[str]) -> str:
        name = match.group(1)
        if name not in variables:
            raise MissingPlaceholder(name)
        return variables[name]

    return _PLACEHOLDER_RE.sub(repl, template)


def assemble_prompt(
    bundle: PromptBundle,
    memory_snapshot: str,
    nickname: str = DEFAULT_NICKNAME,
    phase: SessionPhase = SessionPhase.TRAINING,
) -> str:
    """Deterministic concatenation: background, social, tool, history, memory.

    Training-phase decisions require all four bundle sections to be present;
    the nickname is substituted at every placeholder site.
    """
    nickname = nickname.strip() or DEFAULT_NICKNAME
    if phase is SessionPhase.TRAINING:
        for section in ("background", "social", "tool", "history"):
            if not getattr(bundle, section).strip():
                raise EmptyPromptSection(section)
    variables = {"nickname": nickname}
    parts = [
        substitute(bundle.background, variables),
        substitute(bundle.social, variables),
        substitute(bundle.tool, variables),
        substitute(bundle.history, variables),
        memory_snapshot,
    ]
    return "\n\n".join(p.strip() for p in parts if p.strip())


# --- utterance normalization and the 25-word cap ---

_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?;])\s+")


def normalize_utterance(text: str) -> str:
    return " ".join(text.split())


def word_count(text: str) -> int:
    return len(text.split())


def truncate_at_sentence(text: str, cap: int = UTTERANCE_WORD_CAP) -> str | None:
    """Longest prefix of whole sentences within the word cap, or None."""
    kept: list[str] = []
    total = 0
    for sentence in _SENTENCE_SPLIT_RE.split(text):
        n = word_count(sentence)
        if total + n > cap:
            break
        kept.append(sentence)
        total += n
    return " ".join(kept) if kept else None


def hard_truncate(text: str, cap: int = UTTERANCE_WORD_CAP) -> str:
    return " ".join(text.split()[:cap])


def cap_utterance(text: str, cap: int = UTTERANCE_WORD_CAP) -> str:
    """Enforce the word cap: keep, else cut at a sentence boundary, else hard-cut."""
    text = normalize_utterance(text)
    if word_count(text) <= cap:
        return text
    by_sentence = truncate_at_sentence(text, cap)
    return by_sentence if by_sentence is not None else hard_truncate(text, cap)


# --- providers ---


@dataclass(frozen=True)
class RawProviderOutput:
    text: str
    latency_ms: float


class ProviderError(RuntimeError):
    pass


class ProviderTimeout(ProviderError):
    pass


class ProviderUnreachable(ProviderError):
    pass


PATIENT_FIXTURES = (
    "I'm heading to the supermarket to pick up a few things; there's no rush",
    "Take your time, little one; I can wait right here.",
    "No hurry at all today; go ahead whenever you feel ready.",
)
ANXIOUS_FIXTURES = (
    "Oh dear, a crossing; I should stop, yes, stop, right now.",
    "Careful, careful... I always brake a little late, sorry!",
    "Someone might cross; slow down, slow down, okay, stopping now.",
)
RISKY_FIXTURES = (
    "Out of my way, I'm late for the big match!",
    "No time to stop, I'm already late for work!",
    "Beep beep! Coming through fast, can't wait around!",
)
DISSOCIATIVE_FIXTURES = (
    "I was on the phone and didn't see anyone on the road",
    "Hmm, what was that song called again?",
    "Oh, I was miles away just now; was there something on the road?",
)

_FIXTURES = {
    DrivingStyle.PATIENT: PATIENT_FIXTURES,
    DrivingStyle.ANXIOUS: ANXIOUS_FIXTURES,
    DrivingStyle.RISKY: RISKY_FIXTURES,
    DrivingStyle.DISSOCIATIVE: DISSOCIATIVE_FIXTURES,
}

_GREETING_TEMPLATES = (
    "Hello {nickname}! Lovely to see you out here today.",
    "Hi {nickname}! Remember, the sidewalks are the safe spots.",
    "Welcome back, {nickname}! Watch the cars and take your time.",
)


def fixture_utterance(style: DrivingStyle, index: int) -> str:
    lines = _FIXTURES[style]
    return lines[index % len(lines)]


class MockProvider:
    """Deterministic offline provider: a pure function of (prompt, seed).

    Recognizes the three prompt kinds by their marker phrases and emits a
    schema-valid command batch, a style-true intent line, or a greeting.
    Anything else is echoed as "MOCK-<seed> <digest>", which keeps the
    determinism contract trivially observable.
    """

    kind = "mock"

    def __init__(self, seed: int = 0) -> None:
        self.seed = seed

    def _digest(self, prompt: str) -> bytes:
        return hashlib.sha256(f"{self.seed}|{prompt}".encode("utf-8")).digest()

    def complete(self, prompt: str) -> str:
        if DECISION_MARKER in prompt:
            return self._decision_text(prompt)
        if INTENT_MARKER in prompt:
            return self._intent_text(prompt)
        if GREETING_MARKER in prompt:
            return self._greeting_text(prompt)
        return f"MOCK-{self.seed} {self._digest(prompt).hex()[:12]}"

    def _decision_text(self, prompt: str) -> str:
        d = self._digest(prompt)
        styles = list(DrivingStyle)
        first = styles[d[0] % 4]
        second = styles[d[1] % 4]
        spawns = [
            {
                "style": first.value,
                "lane": 1,
                "delay_ticks": 30 + (d[2] % 4) * 15,
                "utterance": fixture_utterance(first, d[3]),
                "gesture": GestureKind.CROSS_INVITATION.value
                if first.yields and d[4] % 3 == 0
                else None,
            },
            {
                "style": second.value,
                "lane": 2,
                "delay_ticks": 240 + (d[5] % 4) * 15,
                "utterance": fixture_utterance(second, d[6]),
                "gesture": None,
            },
        ]
        scaffolds = ["voice_hint"] if d[7] % 5 == 0 else []
        return json.dumps(
            {"spawns": spawns, "scaffolds": scaffolds, "narration": []},
            separators=(",", ":"),
        )

    def _intent_text(self, prompt: str) -> str:
        style = _style_from_prompt(prompt)
        low = prompt.lower()
        if style is DrivingStyle.PATIENT and "supermarket" in low:
            return PATIENT_FIXTURES[0]
        if style is DrivingStyle.DISSOCIATIVE and "phone" in low:
            return DISSOCIATIVE_FIXTURES[0]
        return fixture_utterance(style, self._digest(prompt)[0])

    def _greeting_text(self, prompt: str) -> str:
        d = self._digest(prompt)
        nickname = _between(prompt, "child, ", ".") or DEFAULT_NICKNAME
        return _GREETING_TEMPLATES[d[0] % len(_GREETING_TEMPLATES)].format(nickname=nickname)


def _style_from_prompt(prompt: str) -> DrivingStyle:
    low = prompt.lower()
    for style in DrivingStyle:
        if f"style: {style.value}" in low:
            return style
    return DrivingStyle.PATIENT


def _between(text: str, start: str, end: str) -> str | None:
    i = text.find(start)
    if i < 0:
        return None
    j = text.find(end, i + len(start))
    if j < 0:
        return None
    return text[i + len(start) : j].strip()


class RemoteProvider:
    """Minimal chat-completions client over HTTP; selected when an API key is set."""

    kind = "remote"

    def __init__(self, endpoint: str, api_key: str, model: str,
                 deadline_s: float = DEFAULT_PROVIDER_DEADLINE_S) -> None:
        self.endpoint = endpoint
        self.api_key = api_key
        self.model = model
        self.deadline_s = deadline_s

    def complete(self, prompt: str) -> str:
        payload = json.dumps(
            {
                "model": self.model,
                "messages": [{"role": "system", "content": prompt}],
                "temperature": 0.7,
            }
        ).encode("utf-8")
        request = urllib.request.Request(
            self.endpoint,
            data=payload,
            headers={
                "Content-Type": "application/json",
                "Authorization": f"Bearer {self.api_key}",
            },
        )
        try:
            with urllib.request.urlopen(request, timeout=self.deadline_s) as response:
                body = json.loads(response.read().decode("utf-8"))
        except (socket.timeout, TimeoutError) as exc:
            raise ProviderTimeout(f"no response within {self.deadline_s}s") from exc
        except urllib.error.URLError as exc:
            if isinstance(exc.reason, (socket.timeout, TimeoutError)):
                raise ProviderTimeout(f"no response within {self.deadline_s}s") from exc
            raise ProviderUnreachable(str(exc.reason)) from exc
        try:
            return body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderUnreachable(f"unexpected provider response shape: {exc}") from exc


def provider_from_env(env: Mapping[str, str] | None = None, seed: int = 0):
    """Remote provider when an API key is configured, otherwise the mock."""
    env = os.environ if env is None else env
    api_key = env.get("STARCROSS_API_KEY", "")
    if not api_key:
        return MockProvider(seed=seed)
    return RemoteProvider(
        endpoint=env.get("STARCROSS_ENDPOINT", "http://localhost:8000/v1/chat/completions"),
        api_key=api_key,
        model=env.get("STARCROSS_MODEL", "gpt-4o-mini"),
    )


def decide(prompt: str, provider) -> RawProviderOutput:
    """One provider round trip, with latency measured in milliseconds."""
    started = time.perf_counter()
    text = provider.complete(prompt)
    return RawProviderOutput(text=text, latency_ms=(time.perf_counter() - started) * 1000.0)


@dataclass(frozen=True)
class DecisionResult:
    request_id: int
    output: RawProviderOutput | None
    error: str | None = None


class DecisionService:
    """Background worker that runs provider calls off the tick loop.

    submit() enqueues a prompt; poll() drains finished rounds. The in-flight
    table is lock-protected; nothing here ever blocks the caller.
    """

    def __init__(self, provider) -> None:
        self._provider = provider
        self._requests: queue.Queue = queue.Queue()
        self._completions: queue.Queue = queue.Queue()
        self._inflight: set[int] = set()
        self._lock = threading.Lock()
        self._worker = threading.Thread(target=self._run, daemon=True)
        self._worker.start()

    def submit(self, request_id: int, prompt: str) -> None:
        with self._lock:
            self._inflight.add(request_id)
        self._requests.put((request_id, prompt))

    def inflight_count(self) -> int:
        with self._lock:
            return len(self._inflight)

    def poll(self) -> list[DecisionResult]:
        results = []
        while True:
            try:
                results.append(self._completions.get_nowait())
            except queue.Empty:
                return results

    def close(self) -> None:
        self._requests.put(None)
        self._worker.join(timeout=2.0)

    def _run(self) -> None:
        while True:
            item = self._requests.get()
            if item is None:
                return
            request_id, prompt = item
            try:
                result = DecisionResult(request_id, decide(prompt, self._provider))
            except ProviderError as exc:
                result = DecisionResult(request_id, None, error=str(exc))
            with self._lock:
                self._inflight.discard(request_id)
            self._completions.put(result)


# --- command language ---


@dataclass(frozen=True)
class SpawnCommand:
    style: DrivingStyle
    lane: int
    delay_ticks: int
    utterance: str
    gesture: GestureKind | None = None
    lying: bool = False  # set by the filter in allow mode, never on the wire


@dataclass(frozen=True)
class CommandBatch:
    spawns: tuple[SpawnCommand, ...]
    scaffolds: tuple[str, ...] = ()
    narration: tuple[str, ...] = ()
    meta: str = ""  # raw provider text, retained for audit


class ParseFailureKind(str, Enum):
    UNKNOWN_FIELD = "unknown_field"
    BAD_STYLE_TOKEN = "bad_style_token"
    MALFORMED_STRUCTURE = "malformed_structure"


class ParseFailure(ValueError):
    def __init__(self, kind: ParseFailureKind, span: str, message: str) -> None:
        super().__init__(f"{kind.value}: {message} (at {span!r})")
        self.kind = kind
        self.span = span


_SPAWN_FIELDS = frozenset({"style", "lane", "delay_ticks", "utterance", "gesture"})
_BATCH_FIELDS = frozenset({"spawns", "scaffolds", "narration"})


def _require_int(value: Any, name: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ParseFailure(
            ParseFailureKind.MALFORMED_STRUCTURE, name, f"{name} must be an integer >= {minimum}"
        )
    return value


def _parse_spawn(obj: Any) -> SpawnCommand:
    if not isinstance(obj, dict):
        raise ParseFailure(ParseFailureKind.MALFORMED_STRUCTURE, str(obj)[:40], "spawn must be an object")
    extra = set(obj) - _SPAWN_FIELDS
    if extra:
        raise ParseFailure(ParseFailureKind.UNKNOWN_FIELD, sorted(extra)[0], "unknown spawn field")
    missing = _SPAWN_FIELDS - set(obj)
    if missing:
        raise ParseFailure(
            ParseFailureKind.MALFORMED_STRUCTURE, sorted(missing)[0], "missing spawn field"
        )
    try:
        style = DrivingStyle.parse(str(obj["style"]))
    except UnknownStyleError as exc:
        raise ParseFailure(ParseFailureKind.BAD_STYLE_TOKEN, str(obj["style"]), str(exc)) from exc
    gesture_token = obj["gesture"]
    gesture = None
    if gesture_token is not None:
        try:
            gesture = GestureKind.parse(str(gesture_token))
        except ValueError as exc:
            raise ParseFailure(
                ParseFailureKind.MALFORMED_STRUCTURE, str(gesture_token), str(exc)
            ) from exc
    if not isinstance(obj["utterance"], str):
        raise ParseFailure(ParseFailureKind.MALFORMED_STRUCTURE, "utterance", "utterance must be text")
    return SpawnCommand(
        style=style,
        lane=_require_int(obj["lane"], "lane", 1),
        delay_ticks=_require_int(obj["delay_ticks"], "delay_ticks", 0),
        utterance=cap_utterance(obj["utterance"]),
        gesture=gesture,
    )


def parse_commands(raw: str | RawProviderOutput) -> CommandBatch:
    """Strictly parse one decision round; no partial batches.

    The text must be exactly one JSON object with the batch schema. Utterance
    and narration text is whitespace-normalized and capped to the word limit.
    """
    text = raw.text if isinstance(raw, RawProviderOutput) else raw
    stripped = text.strip()
    try:
        obj = json.loads(stripped)
    except json.JSONDecodeError as exc:
        span = stripped[max(exc.pos - 20, 0) : exc.pos + 20]
        raise ParseFailure(ParseFailureKind.MALFORMED_STRUCTURE, span, "not a JSON object") from exc
    if not isinstance(obj, dict):
        raise ParseFailure(ParseFailureKind.MALFORMED_STRUCTURE, stripped[:40], "not a JSON object")
    extra = set(obj) - _BATCH_FIELDS
    if extra:
        raise ParseFailure(ParseFailureKind.UNKNOWN_FIELD, sorted(extra)[0], "unknown batch field")
    missing = _BATCH_FIELDS - set(obj)
    if missing:
        raise ParseFailure(
            ParseFailureKind.MALFORMED_STRUCTURE, sorted(missing)[0], "missing batch field"
        )
    if not all(isinstance(obj[k], list) for k in _BATCH_FIELDS):
        raise ParseFailure(
            ParseFailureKind.MALFORMED_STRUCTURE, "spawns", "batch fields must be arrays"
        )
    for token in obj["scaffolds"]:
        if token not in SCAFFOLD_TOKENS:
            raise ParseFailure(
                ParseFailureKind.MALFORMED_STRUCTURE, str(token), "unknown scaffold token"
            )
    for line in obj["narration"]:
        if not isinstance(line, str):
            raise ParseFailure(
                ParseFailureKind.MALFORMED_STRUCTURE, str(line)[:40], "narration must be text"
            )
    return CommandBatch(
        spawns=tuple(_parse_spawn(s) for s in obj["spawns"]),
        scaffolds=tuple(obj["scaffolds"]),
        narration=tuple(cap_utterance(line) for line in obj["narration"]),
        meta=text,
    )


def serialize_commands(batch: CommandBatch) -> str:
    """Inverse of parse_commands over schema-valid batches (meta excluded)."""
    return json.dumps(
        {
            "spawns": [
                {
                    "style": s.style.value,
                    "lane": s.lane,
                    "delay_ticks": s.delay_ticks,
                    "utterance": s.utterance,
                    "gesture": s.gesture.value if s.gesture else None,
                }
                for s in batch.spawns
            ],
            "scaffolds": list(batch.scaffolds),
            "narration": list(batch.narration),
        },
        separators=(",", ":"),
    )


def strip_extraneous(raw: str) -> tuple[str, str, str] | None:
    """Split raw text into (prefix, embedded JSON object, suffix) if possible."""
    start = raw.find("{")
    if start < 0:
        return None
    try:
        _, end = json.JSONDecoder().raw_decode(raw[start:])
    except json.JSONDecodeError:
        return None
    return raw[:start], raw[start : start + end], raw[start + end :]


# --- hallucination filtering ---


class FilterVerdict(str, Enum):
    CLEAN = "clean"
    EXTRANEOUS_TEXT = "extraneous_text"
    INTENT_BEHAVIOR_MISMATCH = "intent_behavior_mismatch"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class FilterReport:
    verdict: FilterVerdict
    details: tuple[str, ...] = ()
    repaired: CommandBatch | None = None


class MismatchMode(str, Enum):
    REJECT = "reject"
    ALLOW = "allow"  # pass mismatched spawns through, re-tagged as lying cars


# Utterance patterns that promise yielding; contradictory on a non-yielding style.
YIELD_PROMISE_RE = re.compile(
    r"\b(no rush|take your time|go ahead|after you|you can cross"
    r"|i can wait|i'?ll wait|i'?ll stop|i'?m stopping|stopping now"
    r"|whenever you feel ready|whenever you'?re ready|cross now|it'?s safe to cross)\b",
    re.IGNORECASE,
)


def _spawn_findings(index: int, spawn: SpawnCommand) -> list[str]:
    if spawn.style.yields or spawn.lying:
        return []
    findings = []
    if spawn.gesture is GestureKind.CROSS_INVITATION:
        findings.append(
            f"spawn {index}: {spawn.style} does not yield but carries a cross invitation gesture"
        )
    if YIELD_PROMISE_RE.search(spawn.utterance):
        findings.append(
            f"spawn {index}: {spawn.style} does not yield but promises to ({spawn.utterance!r})"
        )
    return findings


def filter_hallucinations(
    batch: CommandBatch, mode: MismatchMode = MismatchMode.REJECT
) -> FilterReport:
    """Flag intent-behavior mismatches per the rule table.

    In reject mode the repaired batch drops mismatched spawns; in allow mode
    they pass through re-tagged as lying cars (and are not re-flagged, which
    makes the filter idempotent).
    """
    details: list[str] = []
    kept: list[SpawnCommand] = []
    for i, spawn in enumerate(batch.spawns):
        findings = _spawn_findings(i, spawn)
        details.extend(findings)
        if not findings:
            kept.append(spawn)
        elif mode is MismatchMode.ALLOW:
            kept.append(replace(spawn, lying=True))
    if not details:
        return FilterReport(FilterVerdict.CLEAN, (), batch)
    return FilterReport(
        FilterVerdict.INTENT_BEHAVIOR_MISMATCH,
        tuple(details),
        replace(batch, spawns=tuple(kept)),
    )


def review_provider_output(
    raw: str | RawProviderOutput, mode: MismatchMode = MismatchMode.REJECT
) -> FilterReport:
    """Full intake pipeline: extraneous-text pre-pass, strict parse, filter.

    Raises ParseFailure when no schema-valid batch can be extracted at all.
    """
    text = raw.text if isinstance(raw, RawProviderOutput) else raw
    extraneous: str | None = None
    try:
        batch = parse_commands(text)
    except ParseFailure as failure:
        if failure.kind is not ParseFailureKind.MALFORMED_STRUCTURE:
            raise
        parts = strip_extraneous(text)
        if parts is None:
            raise
        prefix, body, suffix = parts
        junk = (prefix.strip() + " " + suffix.strip()).strip()
        if not junk:
            raise
        batch = replace(parse_commands(body), meta=text)
        extraneous = junk
    report = filter_hallucinations(batch, mode)
    if extraneous is None:
        return report
    details = (f"extraneous text stripped: {extraneous[:80]!r}",) + report.details
    return FilterReport(FilterVerdict.EXTRANEOUS_TEXT, details, report.repaired)


# --- narrated intents and onboarding small talk ---


def intent_prompt(style: DrivingStyle, scene_context: str) -> str:
    return (
        f"style: {style.value}\n"
        f"scene: {scene_context}\n"
        f"{INTENT_MARKER}, {UTTERANCE_WORD_CAP} words or fewer, first person."
    )


def generate_intent(style: DrivingStyle, scene_context: str, provider) -> str:
    """A driver's narrated intent, capped to the word limit.

    Over-length text is cut at a sentence boundary when one fits; otherwise
    the provider gets one retry with a shorter-please nudge before the text
    is hard-truncated.
    """
    prompt = intent_prompt(style, scene_context)
    text = normalize_utterance(provider.complete(prompt))
    if word_count(text) <= UTTERANCE_WORD_CAP:
        return text
    by_sentence = truncate_at_sentence(text)
    if by_sentence is not None:
        return by_sentence
    retry = normalize_utterance(provider.complete(prompt + "\nShorter, please."))
    if word_count(retry) <= UTTERANCE_WORD_CAP:
        return retry
    return hard_truncate(retry)


def greeting_prompt(spirit: Spirit, nickname: str) -> str:
    return (
        f"spirit: {spirit.id} ({spirit.kind}), {spirit.personality}\n"
        f"duty: {spirit.responsibilities}\n"
        f"child, {nickname}.\n"
        f"{GREETING_MARKER}, {UTTERANCE_WORD_CAP} words or fewer."
    )


def spirit_greeting(spirit: Spirit, nickname: str, provider) -> str:
    """Onboarding small talk for a scene spirit the participant walks up to."""
    return cap_utterance(provider.complete(greeting_prompt(spirit, nickname)))


def fallback_batch(note: str = "provider fallback") -> CommandBatch:
    """Deterministic default round used after a failed decision round."""
    return CommandBatch(
        spawns=(
            SpawnCommand(
                style=DrivingStyle.PATIENT,
                lane=1,
                delay_ticks=30,
                utterance=PATIENT_FIXTURES[1],
                gesture=None,
            ),
            SpawnCommand(
                style=DrivingStyle.DISSOCIATIVE,
                lane=2,
                delay_ticks=240,
                utterance=DISSOCIATIVE_FIXTURES[1],
                gesture=None,
            ),
        ),
        meta=note,
    )
