from __future__ import annotations

import json
import random
import subprocess
import sys

import pytest
from hypothesis import given, settings, strategies as st

from starcross.agent_brain import (
    CommandBatch,
    DECISION_MARKER,
    DecisionService,
    EmptyPromptSection,
    FilterVerdict,
    MismatchMode,
    MissingPlaceholder,
    MockProvider,
    ParseFailure,
    ParseFailureKind,
    PromptBundle,
    ProviderUnreachable,
    RemoteProvider,
    SpawnCommand,
    assemble_prompt,
    cap_utterance,
    decide,
    default_prompt_bundle,
    fallback_batch,
    filter_hallucinations,
    fixture_utterance,
    generate_intent,
    parse_commands,
    review_provider_output,
    serialize_commands,
    spirit_greeting,
    word_count,
)
from starcross.domain import DrivingStyle, GestureKind, SessionPhase, UTTERANCE_WORD_CAP


@pytest.fixture(scope="module")
def bundle() -> PromptBundle:
    return default_prompt_bundle()


class TestAssemblePrompt:
    def test_deterministic(self, bundle):
        a = assemble_prompt(bundle, "context text", "Lele")
        b = assemble_prompt(bundle, "context text", "Lele")
        assert a == b

    def test_nickname_substituted_everywhere(self, bundle):
        text = assemble_prompt(bundle, "ctx", "Lele")
        assert "Lele" in text
        assert "{{" not in text and "}}" not in text

    def test_fixed_section_order(self, bundle):
        text = assemble_prompt(bundle, "MEMORY-SNAPSHOT-SENTINEL", "kid")
        i_background = text.find("traffic director")
        i_social = text.find("Driver styles you may spawn")
        i_tool = text.find(DECISION_MARKER)
        i_history = text.find("Recent performance")
        i_memory = text.find("MEMORY-SNAPSHOT-SENTINEL")
        assert -1 not in {i_background, i_social, i_tool, i_history, i_memory}
        assert i_background < i_social < i_tool < i_history < i_memory

    def test_empty_history_rejected_in_training(self, bundle):
        broken = PromptBundle(bundle.background, bundle.tool, bundle.social, "   ")
        with pytest.raises(EmptyPromptSection):
            assemble_prompt(broken, "ctx", "kid", SessionPhase.TRAINING)

    def test_empty_history_tolerated_in_onboarding(self, bundle):
        broken = PromptBundle(bundle.background, bundle.tool, bundle.social, "")
        text = assemble_prompt(broken, "ctx", "kid", SessionPhase.ONBOARDING)
        assert "ctx" in text

    def test_unknown_placeholder_rejected(self, bundle):
        broken = PromptBundle("hello {{surname}}", bundle.tool, bundle.social, bundle.history)
        with pytest.raises(MissingPlaceholder):
            assemble_prompt(broken, "ctx", "kid")

    def test_blank_nickname_falls_back_to_default(self, bundle):
        text = assemble_prompt(bundle, "ctx", "   ")
        assert "friend" in text


class TestDecide:
    def test_mock_is_pure(self):
        provider = MockProvider(seed=7)
        first = decide("some unrecognized probe prompt", provider)
        second = decide("some unrecognized probe prompt", provider)
        assert first.text == second.text
        assert first.text.startswith("MOCK-7 ")

    def test_mock_pure_across_process_restarts(self):
        code = (
            "from starcross.agent_brain import MockProvider;"
            "print(MockProvider(seed=7).complete('some unrecognized probe prompt'))"
        )
        out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True)
        assert out.returncode == 0, out.stderr
        assert out.stdout.strip() == MockProvider(seed=7).complete(
            "some unrecognized probe prompt"
        )

    def test_latencies_recorded_non_negative(self):
        provider = MockProvider(seed=1)
        outputs = [decide("probe", provider) for _ in range(2)]
        assert all(o.latency_ms >= 0.0 for o in outputs)

    def test_unroutable_remote_raises_unreachable(self):
        provider = RemoteProvider(
            endpoint="http://127.0.0.1:1/v1/chat/completions",
            api_key="k",
            model="m",
            deadline_s=2.0,
        )
        with pytest.raises(ProviderUnreachable):
            provider.complete("hello")

    def test_mock_decision_round_is_schema_valid(self, bundle):
        provider = MockProvider(seed=3)
        prompt = assemble_prompt(bundle, "ctx", "kid")
        batch = parse_commands(provider.complete(prompt))
        assert len(batch.spawns) == 2
        assert {s.lane for s in batch.spawns} == {1, 2}


def _fixture_batch() -> CommandBatch:
    return CommandBatch(
        spawns=(
            SpawnCommand(DrivingStyle.PATIENT, 1, 30, fixture_utterance(DrivingStyle.PATIENT, 1),
                         GestureKind.CROSS_INVITATION),
            SpawnCommand(DrivingStyle.DISSOCIATIVE, 2, 240,
                         fixture_utterance(DrivingStyle.DISSOCIATIVE, 0), None),
        ),
        scaffolds=("voice_hint",),
        narration=("Here comes the next car.",),
    )


class TestParseCommands:
    def test_round_trip_identity(self):
        batch = _fixture_batch()
        again = parse_commands(serialize_commands(batch))
        assert again.spawns == batch.spawns
        assert again.scaffolds == batch.scaffolds
        assert again.narration == batch.narration

    def test_conversational_prefix_fails_strict_parse(self):
        raw = "I apologize for the confusion. " + serialize_commands(_fixture_batch())
        with pytest.raises(ParseFailure) as err:
            parse_commands(raw)
        assert err.value.kind is ParseFailureKind.MALFORMED_STRUCTURE

    def test_bad_style_token(self):
        doc = json.loads(serialize_commands(_fixture_batch()))
        doc["spawns"][0]["style"] = "sleepy"
        with pytest.raises(ParseFailure) as err:
            parse_commands(json.dumps(doc))
        assert err.value.kind is ParseFailureKind.BAD_STYLE_TOKEN
        assert err.value.span == "sleepy"

    def test_unknown_batch_field(self):
        doc = json.loads(serialize_commands(_fixture_batch()))
        doc["mood"] = "great"
        with pytest.raises(ParseFailure) as err:
            parse_commands(json.dumps(doc))
        assert err.value.kind is ParseFailureKind.UNKNOWN_FIELD
        assert err.value.span == "mood"

    def test_unknown_spawn_field(self):
        doc = json.loads(serialize_commands(_fixture_batch()))
        doc["spawns"][0]["color"] = "pink"
        with pytest.raises(ParseFailure) as err:
            parse_commands(json.dumps(doc))
        assert err.value.kind is ParseFailureKind.UNKNOWN_FIELD

    def test_missing_field(self):
        doc = json.loads(serialize_commands(_fixture_batch()))
        del doc["spawns"][0]["lane"]
        with pytest.raises(ParseFailure) as err:
            parse_commands(json.dumps(doc))
        assert err.value.kind is ParseFailureKind.MALFORMED_STRUCTURE

    def test_bad_gesture_token(self):
        doc = json.loads(serialize_commands(_fixture_batch()))
        doc["spawns"][0]["gesture"] = "headlight_flash"
        with pytest.raises(ParseFailure) as err:
            parse_commands(json.dumps(doc))
        assert err.value.kind is ParseFailureKind.MALFORMED_STRUCTURE

    def test_bad_scaffold_token(self):
        doc = json.loads(serialize_commands(_fixture_batch()))
        doc["scaffolds"] = ["sparkles"]
        with pytest.raises(ParseFailure):
            parse_commands(json.dumps(doc))

    def test_long_utterance_normalized_to_cap(self):
        doc = json.loads(serialize_commands(_fixture_batch()))
        doc["spawns"][0]["utterance"] = "word " * 60
        batch = parse_commands(json.dumps(doc))
        assert word_count(batch.spawns[0].utterance) <= UTTERANCE_WORD_CAP


_styles = st.sampled_from(list(DrivingStyle))
_gestures = st.none() | st.sampled_from(list(GestureKind))
_words = st.text(
    alphabet=st.characters(whitelist_categories=("Ll", "Lu", "Nd")), min_size=1, max_size=8
)
_utterances = st.lists(_words, min_size=1, max_size=UTTERANCE_WORD_CAP).map(" ".join)
_spawns = st.builds(
    SpawnCommand,
    style=_styles,
    lane=st.integers(min_value=1, max_value=2),
    delay_ticks=st.integers(min_value=0, max_value=1000),
    utterance=_utterances,
    gesture=_gestures,
)
_batches = st.builds(
    CommandBatch,
    spawns=st.lists(_spawns, max_size=4).map(tuple),
    scaffolds=st.lists(st.sampled_from(["voice_hint", "gesture_hint"]), max_size=2).map(tuple),
    narration=st.lists(_utterances, max_size=2).map(tuple),
)


@given(batch=_batches)
@settings(max_examples=200)
def test_parse_serialize_identity_property(batch):
    again = parse_commands(serialize_commands(batch))
    assert again.spawns == batch.spawns
    assert again.scaffolds == batch.scaffolds
    assert again.narration == batch.narration


class TestFilterHallucinations:
    def test_consistent_spawn_is_clean(self):
        batch = CommandBatch(
            spawns=(SpawnCommand(DrivingStyle.PATIENT, 1, 0, "No rush at all, go ahead.",
                                 GestureKind.CROSS_INVITATION),),
        )
        report = filter_hallucinations(batch)
        assert report.verdict is FilterVerdict.CLEAN
        assert report.details == ()
        assert report.repaired == batch

    def test_invitation_on_non_yielding_style_is_mismatch(self):
        batch = CommandBatch(
            spawns=(SpawnCommand(DrivingStyle.DISSOCIATIVE, 1, 0,
                                 fixture_utterance(DrivingStyle.DISSOCIATIVE, 0),
                                 GestureKind.CROSS_INVITATION),),
        )
        report = filter_hallucinations(batch)
        assert report.verdict is FilterVerdict.INTENT_BEHAVIOR_MISMATCH

    def test_yield_promise_on_non_yielding_style_is_mismatch(self):
        batch = CommandBatch(
            spawns=(SpawnCommand(DrivingStyle.RISKY, 1, 0, "Go ahead, you can cross now!", None),),
        )
        report = filter_hallucinations(batch)
        assert report.verdict is FilterVerdict.INTENT_BEHAVIOR_MISMATCH

    def test_reject_mode_drops_offending_spawn(self):
        batch = CommandBatch(
            spawns=(
                SpawnCommand(DrivingStyle.RISKY, 1, 0, "Take your time!", None),
                SpawnCommand(DrivingStyle.PATIENT, 2, 30, "Take your time!", None),
            ),
        )
        report = filter_hallucinations(batch, MismatchMode.REJECT)
        assert len(report.repaired.spawns) == 1
        assert report.repaired.spawns[0].style is DrivingStyle.PATIENT

    def test_allow_mode_retags_as_lying_car(self):
        batch = CommandBatch(
            spawns=(SpawnCommand(DrivingStyle.RISKY, 1, 0, "Take your time!", None),),
        )
        report = filter_hallucinations(batch, MismatchMode.ALLOW)
        assert len(report.repaired.spawns) == 1
        assert report.repaired.spawns[0].lying

    @pytest.mark.parametrize("mode", list(MismatchMode))
    def test_filter_is_idempotent(self, mode):
        batch = CommandBatch(
            spawns=(
                SpawnCommand(DrivingStyle.RISKY, 1, 0, "I'll wait for you.", None),
                SpawnCommand(DrivingStyle.ANXIOUS, 2, 30, "Stopping now, promise!", None),
            ),
        )
        first = filter_hallucinations(batch, mode)
        second = filter_hallucinations(first.repaired, mode)
        assert second.verdict is FilterVerdict.CLEAN

    def test_deterministic(self):
        batch = _fixture_batch()
        assert filter_hallucinations(batch) == filter_hallucinations(batch)


class TestReviewProviderOutput:
    def test_clean_json_passes_through(self):
        report = review_provider_output(serialize_commands(_fixture_batch()))
        assert report.verdict is FilterVerdict.CLEAN

    def test_apology_prefix_recovered_as_extraneous(self):
        raw = "Sorry about that! Here you go: " + serialize_commands(_fixture_batch())
        report = review_provider_output(raw)
        assert report.verdict is FilterVerdict.EXTRANEOUS_TEXT
        assert report.repaired is not None
        assert len(report.repaired.spawns) == 2
        assert report.repaired.meta == raw

    def test_trailing_chatter_recovered(self):
        raw = serialize_commands(_fixture_batch()) + "\nLet me know if you need anything else!"
        report = review_provider_output(raw)
        assert report.verdict is FilterVerdict.EXTRANEOUS_TEXT

    def test_hopeless_text_raises(self):
        with pytest.raises(ParseFailure):
            review_provider_output("no structured content here at all")


def build_fault_corpus(seed: int = 2024):
    """100 synthetic provider outputs: 94 clean, 2 extraneous, 4 mismatched.

    Returns (outputs, labels) where labels[i] is True when output i carries an
    injected fault. Mirrors an observed 6% hallucination distribution.
    """
    rng = random.Random(seed)
    styles = list(DrivingStyle)
    outputs: list[str] = []
    labels: list[bool] = []

    def clean_output(i: int) -> str:
        style = styles[i % 4]
        other = styles[(i + 1) % 4]
        batch = {
            "spawns": [
                {
                    "style": style.value,
                    "lane": 1,
                    "delay_ticks": 30 * (i % 5),
                    "utterance": fixture_utterance(style, i),
                    "gesture": "cross_invitation" if style.yields and i % 3 == 0 else None,
                },
                {
                    "style": other.value,
                    "lane": 2,
                    "delay_ticks": 240,
                    "utterance": fixture_utterance(other, i + 1),
                    "gesture": None,
                },
            ],
            "scaffolds": ["voice_hint"] if i % 7 == 0 else [],
            "narration": [],
        }
        return json.dumps(batch)

    for i in range(94):
        outputs.append(clean_output(i))
        labels.append(False)

    outputs.append("I apologize, here is the plan. " + clean_output(94))
    labels.append(True)
    outputs.append(clean_output(95) + " Hope this helps!")
    labels.append(True)

    mismatches = [
        ("dissociative", None, "Go ahead, I'll wait for you."),
        ("risky", "cross_invitation", fixture_utterance(DrivingStyle.RISKY, 0)),
        ("dissociative", "cross_invitation", fixture_utterance(DrivingStyle.DISSOCIATIVE, 1)),
        ("risky", None, "Take your time, it's safe to cross."),
    ]
    for style, gesture, utterance in mismatches:
        outputs.append(
            json.dumps(
                {
                    "spawns": [
                        {
                            "style": style,
                            "lane": 1,
                            "delay_ticks": 30,
                            "utterance": utterance,
                            "gesture": gesture,
                        }
                    ],
                    "scaffolds": [],
                    "narration": [],
                }
            )
        )
        labels.append(True)

    order = list(range(100))
    rng.shuffle(order)
    return [outputs[i] for i in order], [labels[i] for i in order]


class TestFaultCorpus:
    def test_exactly_six_flagged_with_no_false_positives(self):
        outputs, labels = build_fault_corpus()
        flagged = [
            review_provider_output(raw).verdict is not FilterVerdict.CLEAN for raw in outputs
        ]
        true_positives = sum(1 for f, l in zip(flagged, labels) if f and l)
        false_positives = sum(1 for f, l in zip(flagged, labels) if f and not l)
        assert true_positives == 6
        assert false_positives == 0

    def test_fault_categories_split_two_four(self):
        outputs, labels = build_fault_corpus()
        verdicts = [review_provider_output(raw).verdict for raw in outputs]
        extraneous = sum(1 for v in verdicts if v is FilterVerdict.EXTRANEOUS_TEXT)
        mismatch = sum(1 for v in verdicts if v is FilterVerdict.INTENT_BEHAVIOR_MISMATCH)
        assert extraneous == 2
        assert mismatch == 4


class TestGenerateIntent:
    def test_patient_supermarket_fixture(self):
        text = generate_intent(
            DrivingStyle.PATIENT, "driving toward the supermarket", MockProvider(0)
        )
        assert text == "I'm heading to the supermarket to pick up a few things; there's no rush"

    def test_dissociative_phone_fixture(self):
        text = generate_intent(
            DrivingStyle.DISSOCIATIVE, "chatting on the phone while driving", MockProvider(0)
        )
        assert text == "I was on the phone and didn't see anyone on the road"

    def test_forty_word_output_capped(self):
        class Wordy:
            def complete(self, prompt):
                return "word " * 40

        stored = generate_intent(DrivingStyle.PATIENT, "ctx", Wordy())
        assert word_count(stored) <= UTTERANCE_WORD_CAP

    def test_sentence_boundary_preferred(self):
        class TwoSentences:
            def complete(self, prompt):
                return "Short first sentence. " + "word " * 30 + "."

        stored = generate_intent(DrivingStyle.PATIENT, "ctx", TwoSentences())
        assert stored == "Short first sentence."

    def test_regenerates_once_before_hard_truncate(self):
        calls = []

        class Shortens:
            def complete(self, prompt):
                calls.append(prompt)
                return "word " * 40 if len(calls) == 1 else "brief enough reply"

        stored = generate_intent(DrivingStyle.PATIENT, "ctx", Shortens())
        assert stored == "brief enough reply"
        assert len(calls) == 2

    @given(st.integers(min_value=0, max_value=200), st.integers(min_value=0, max_value=2**32))
    @settings(max_examples=100)
    def test_cap_utterance_never_exceeds_cap(self, n_words, seed):
        rng = random.Random(seed)
        text = " ".join("w" * rng.randint(1, 12) for _ in range(n_words))
        assert word_count(cap_utterance(text)) <= UTTERANCE_WORD_CAP


def test_spirit_greeting_uses_nickname(scenario):
    greeting = spirit_greeting(scenario.spirits[0], "Lele", MockProvider(0))
    assert "Lele" in greeting
    assert word_count(greeting) <= UTTERANCE_WORD_CAP


def test_fallback_batch_is_clean_and_schedulable():
    batch = fallback_batch()
    report = filter_hallucinations(batch)
    assert report.verdict is FilterVerdict.CLEAN


def test_decision_service_round_trip():
    service = DecisionService(MockProvider(seed=5))
    try:
        service.submit(1, "probe one")
        service.submit(2, "probe two")
        results = []
        for _ in range(200):
            results.extend(service.poll())
            if len(results) == 2:
                break
            import time

            time.sleep(0.01)
        assert {r.request_id for r in results} == {1, 2}
        assert all(r.error is None for r in results)
    finally:
        service.close()
