from __future__ import annotations

import itertools

import pytest

from starcross.adjudicator import IDENTITY_CALIBRATION
from starcross.agent_brain import CommandBatch, MockProvider, SpawnCommand, fixture_utterance
from starcross.director import (
    DEFAULT_DIRECTOR_CONFIG,
    DirectorConfig,
    ScheduleOverflow,
    World,
    build_spawn_schedule,
    cold_start_difficulty,
    load_director_config,
    next_difficulty,
    select_gesture,
)
from starcross.domain import DifficultyState, DrivingStyle, GestureKind, SessionPhase
from starcross.memory import ErrorStats, EventKind

from conftest import StarWalkPolicy, WaitAndDashPolicy

CFG = DEFAULT_DIRECTOR_CONFIG


def _stats(short, long=0.5, count=10):
    return ErrorStats(short, long, count)


class TestNextDifficulty:
    def test_high_error_rate_raises_support(self):
        nxt = next_difficulty(_stats(0.8), DifficultyState(1, 2))
        assert nxt.scaffolding == 2
        assert nxt.challenge in (1, 2)

    def test_low_error_rate_reduces_support(self):
        nxt = next_difficulty(_stats(0.0, count=CFG.short_term_window), DifficultyState(2, 1))
        assert nxt.scaffolding == 1

    def test_cold_start_regardless_of_current(self):
        for current in (DifficultyState(0, 3), DifficultyState(2, 2)):
            assert next_difficulty(_stats(0.9, count=0), current) == DifficultyState(3, 1)

    def test_middle_band_holds(self):
        current = DifficultyState(2, 2)
        assert next_difficulty(_stats(0.3), current) == current

    def test_exhaustive_grid_monotone_and_bounded(self):
        rates = [i / 10 for i in range(11)]
        for scaffolding, challenge in itertools.product(range(4), range(1, 4)):
            current = DifficultyState(scaffolding, challenge)
            results = [next_difficulty(_stats(r), current) for r in rates]
            for a, b in zip(results, results[1:]):
                assert a.scaffolding <= b.scaffolding  # non-decreasing in error rate
                assert a.challenge >= b.challenge  # non-increasing in error rate
            for r, nxt in zip(rates, results):
                assert abs(nxt.scaffolding - scaffolding) <= 1
                assert abs(nxt.challenge - challenge) <= 1
                assert 0 <= nxt.scaffolding <= 3
                assert 1 <= nxt.challenge <= 3

    def test_bundled_config_loads(self):
        config = load_director_config()
        assert config.theta_high == 0.5
        assert config.theta_low == 0.2
        assert cold_start_difficulty(config) == DifficultyState(3, 1)


class TestSelectGesture:
    def test_high_error_patient_gets_invitation(self):
        gesture = select_gesture(DrivingStyle.PATIENT, _stats(0.9), DifficultyState(2, 1))
        assert gesture is GestureKind.CROSS_INVITATION

    def test_low_error_no_cue(self):
        assert select_gesture(DrivingStyle.DISSOCIATIVE, _stats(0.1), DifficultyState(1, 2)) is None
        assert select_gesture(DrivingStyle.PATIENT, _stats(0.1), DifficultyState(1, 2)) is None

    def test_never_invitation_on_non_yielding_style(self):
        for short in (0.0, 0.9):
            for scaffolding in range(4):
                gesture = select_gesture(
                    DrivingStyle.DISSOCIATIVE, _stats(short), DifficultyState(scaffolding, 1)
                )
                assert gesture is None

    def test_max_scaffolding_forces_cue_on_yielding(self):
        gesture = select_gesture(DrivingStyle.ANXIOUS, _stats(0.0), DifficultyState(3, 1))
        assert gesture is GestureKind.CROSS_INVITATION


def _batch(*spawns, scaffolds=()):
    return CommandBatch(spawns=tuple(spawns), scaffolds=tuple(scaffolds))


def _spawn(style, lane, delay, gesture=None):
    return SpawnCommand(style, lane, delay, fixture_utterance(style, 0), gesture)


class TestBuildSpawnSchedule:
    def test_counts_and_pedestrians_at_challenge_one(self, scenario):
        schedule = build_spawn_schedule(
            _batch(_spawn(DrivingStyle.PATIENT, 1, 0), _spawn(DrivingStyle.RISKY, 2, 0)),
            DifficultyState(0, 1),
            seed=5,
            scenario=scenario,
            stats=_stats(0.3),
        )
        assert len(schedule.spawns) == 2
        assert len(schedule.pedestrians) == 0

    def test_pedestrian_count_tracks_challenge(self, scenario):
        for challenge in (1, 2, 3):
            schedule = build_spawn_schedule(
                _batch(_spawn(DrivingStyle.PATIENT, 1, 0)),
                DifficultyState(0, challenge),
                seed=5,
                scenario=scenario,
                stats=_stats(0.3),
            )
            assert len(schedule.pedestrians) == challenge - 1

    def test_deterministic(self, scenario):
        args = (
            _batch(_spawn(DrivingStyle.PATIENT, 1, 0), _spawn(DrivingStyle.ANXIOUS, 2, 100)),
            DifficultyState(1, 3),
        )
        a = build_spawn_schedule(*args, seed=9, scenario=scenario, stats=_stats(0.3))
        b = build_spawn_schedule(*args, seed=9, scenario=scenario, stats=_stats(0.3))
        assert a == b

    def test_challenge_three_strictly_faster(self, scenario):
        batch = _batch(_spawn(DrivingStyle.RISKY, 1, 0), _spawn(DrivingStyle.PATIENT, 2, 0))
        low = build_spawn_schedule(
            batch, DifficultyState(0, 1), seed=1, scenario=scenario, stats=_stats(0.3)
        )
        high = build_spawn_schedule(
            batch, DifficultyState(0, 3), seed=1, scenario=scenario, stats=_stats(0.3)
        )
        for slow, fast in zip(low.spawns, high.spawns):
            assert fast.plan.speed_profile.peak_speed() > slow.plan.speed_profile.peak_speed()

    def test_same_lane_overlap_overflows(self, scenario):
        with pytest.raises(ScheduleOverflow):
            build_spawn_schedule(
                _batch(_spawn(DrivingStyle.PATIENT, 1, 0), _spawn(DrivingStyle.RISKY, 1, 10)),
                DifficultyState(0, 1),
                seed=1,
                scenario=scenario,
                stats=_stats(0.3),
            )

    def test_unknown_lane_overflows(self, scenario):
        with pytest.raises(ScheduleOverflow):
            build_spawn_schedule(
                _batch(_spawn(DrivingStyle.PATIENT, 9, 0)),
                DifficultyState(0, 1),
                seed=1,
                scenario=scenario,
                stats=_stats(0.3),
            )

    def test_gesture_from_policy_when_unset(self, scenario):
        schedule = build_spawn_schedule(
            _batch(_spawn(DrivingStyle.PATIENT, 1, 0)),
            DifficultyState(3, 1),
            seed=1,
            scenario=scenario,
            stats=_stats(0.0),
        )
        assert schedule.spawns[0].gesture is GestureKind.CROSS_INVITATION

    def test_gesture_hint_scaffold_forces_cue(self, scenario):
        schedule = build_spawn_schedule(
            _batch(_spawn(DrivingStyle.ANXIOUS, 1, 0), scaffolds=("gesture_hint",)),
            DifficultyState(1, 2),
            seed=1,
            scenario=scenario,
            stats=_stats(0.3),
        )
        assert schedule.spawns[0].gesture is GestureKind.CROSS_INVITATION

    def test_invitation_never_on_non_yielding_plan(self, scenario):
        schedule = build_spawn_schedule(
            _batch(
                _spawn(DrivingStyle.RISKY, 1, 0, GestureKind.CROSS_INVITATION),
                scaffolds=("gesture_hint",),
            ),
            DifficultyState(3, 1),
            seed=1,
            scenario=scenario,
            stats=_stats(0.9),
        )
        assert schedule.spawns[0].gesture is None


def _world(scenario, seed=0) -> World:
    world = World(
        scenario=scenario,
        config=DEFAULT_DIRECTOR_CONFIG,
        calibration=IDENTITY_CALIBRATION,
        seed=seed,
        nickname="kid",
    )
    world.begin()
    return world


def _run_until(world, policy_fn, max_ticks, stop=None):
    events = []
    for _ in range(max_ticks):
        if stop and stop(world):
            break
        events.extend(world.step([policy_fn(world)]))
    return events


class TestWorldStep:
    def test_star_collection_advances_sequence(self, scenario):
        world = _world(scenario)
        world.begin_training()
        star = world.active_star()
        policy = StarWalkPolicy(scenario.participant_start)
        events = _run_until(
            world,
            lambda w: policy.next_position(star),
            max_ticks=30 * 20,
            stop=lambda w: w.collected >= 1,
        )
        collected = [e for e in events if e.kind is EventKind.STAR_COLLECTED]
        assert len(collected) == 1
        assert collected[0].payload["collected"] == 1
        assert world.active_star() == scenario.stars[1]

    def test_completion_emits_phase_change(self, scenario):
        world = _world(scenario)
        world.begin_training()
        policy = StarWalkPolicy(scenario.participant_start, speed_mps=2.4)
        events = _run_until(
            world,
            lambda w: policy.next_position(w.active_star()),
            max_ticks=30 * 120,
        )
        changes = [e for e in events if e.kind is EventKind.PHASE_CHANGE]
        assert changes and changes[-1].payload["to"] == "completed"
        assert world.collected == scenario.star_target
        assert world.phase is SessionPhase.COMPLETED

    def test_onboarding_greeting_within_one_meter(self, scenario):
        world = _world(scenario)
        world.greetings = {"tree_south": "Hi there, kid!"}
        tree = scenario.spirits[0].position
        events = world.step([(tree[0] + 0.5, tree[1])])
        utterances = [e for e in events if e.kind is EventKind.UTTERANCE]
        assert utterances and utterances[0].payload["speaker"] == "tree_south"
        # Standing still inside the radius does not repeat the greeting.
        again = world.step([(tree[0] + 0.5, tree[1])])
        assert not [e for e in again if e.kind is EventKind.UTTERANCE]

    def test_no_adjudication_during_onboarding(self, scenario):
        world = _world(scenario)
        batch = _batch(_spawn(DrivingStyle.RISKY, 1, 0))
        world.apply_command_batch(batch)
        for _ in range(300):
            world.step([scenario.participant_start])
        assert world.trial_errors == []

    def test_collision_yields_incorrect_trial(self, scenario):
        world = _world(scenario)
        world.begin_training()
        world.apply_command_batch(_batch(_spawn(DrivingStyle.RISKY, 1, 0)))
        # Stand in lane 1 in front of the oncoming car.
        events = []
        for _ in range(30 * 20):
            events.extend(world.step([(4.0, 3.0)]))
            if world.trial_errors:
                break
        assert world.trial_errors == [True]
        kinds = [e.kind for e in events]
        assert EventKind.COLLISION in kinds and EventKind.CAR_LEAVING in kinds
        leaving = [e for e in events if e.kind is EventKind.CAR_LEAVING][0]
        assert leaving.payload["verdict"] == "incorrect"
        assert leaving.payload["cause"] == "collision"

    def test_patient_car_waits_and_trial_is_correct(self, scenario):
        world = _world(scenario)
        world.begin_training()
        world.apply_command_batch(_batch(_spawn(DrivingStyle.PATIENT, 1, 0)))
        events = []
        for _ in range(30 * 30):
            events.extend(world.step([(7.0, 1.0)]))  # waiting on the south sidewalk
            if world.trial_errors:
                break
        assert world.trial_errors == [False]
        leaving = [e for e in events if e.kind is EventKind.CAR_LEAVING][0]
        assert leaving.payload["verdict"] == "correct"
        assert leaving.payload["marginal"] is False

    def test_difficulty_reacts_to_outcomes(self, scenario):
        world = _world(scenario)
        world.begin_training()
        start = world.difficulty
        assert start == DifficultyState(3, 1)
        # Repeated clean trials walk scaffolding down.
        for _ in range(6):
            world.apply_command_batch(_batch(_spawn(DrivingStyle.RISKY, 1, 0)))
            for _ in range(30 * 20):
                world.step([(7.0, 1.0)])
                if len(world.trial_errors) and world.vehicles == [] and not world.pending:
                    break
        assert world.difficulty.scaffolding < start.scaffolding
        assert world.difficulty.challenge > start.challenge

    def test_spawn_event_carries_gesture_and_scaffold_event(self, scenario):
        world = _world(scenario)
        world.begin_training()
        world.apply_command_batch(
            _batch(_spawn(DrivingStyle.PATIENT, 1, 0, GestureKind.CROSS_INVITATION))
        )
        events = []
        for _ in range(10):
            events.extend(world.step([scenario.participant_start]))
        spawns = [e for e in events if e.kind is EventKind.SPAWN]
        scaffolds = [e for e in events if e.kind is EventKind.SCAFFOLD_SHOWN]
        assert spawns and spawns[0].payload["gesture"] == "cross_invitation"
        assert scaffolds and scaffolds[0].payload["cue"] == "gesture"
        assert scaffolds[0].payload["provenance"] == "auto"

    def test_difficulty_override_logs_manual_scaffold(self, scenario):
        world = _world(scenario)
        events = world.apply_difficulty_override(3, 1)
        assert events[0].kind is EventKind.SCAFFOLD_SHOWN
        assert events[0].payload["provenance"] == "manual"
        assert world.difficulty == DifficultyState(3, 1)

    def test_liveness_with_road_aware_policy(self, scenario):
        # Bounded-step check: training with a clean decision stream reaches
        # completion on the default scenario.
        world = _world(scenario, seed=11)
        world.begin_training()
        provider = MockProvider(seed=11)
        policy = WaitAndDashPolicy(scenario.participant_start)
        from starcross.agent_brain import parse_commands

        for tick in range(30 * 170):
            if world.phase is SessionPhase.COMPLETED:
                break
            if world.wants_decision():
                raw = provider.complete(
                    "Respond with exactly one JSON object" + f" round {tick}"
                )
                world.apply_command_batch(parse_commands(raw), seed_salt=tick)
            snapshot = world.snapshot()
            pos = policy.next_position(
                world.active_star(), snapshot["vehicles"]
            )
            world.step([pos])
        assert world.phase is SessionPhase.COMPLETED
        assert world.collected == scenario.star_target

    def test_step_deterministic_replay(self, scenario):
        def run():
            world = _world(scenario, seed=3)
            world.begin_training()
            world.apply_command_batch(
                _batch(_spawn(DrivingStyle.PATIENT, 1, 0), _spawn(DrivingStyle.RISKY, 2, 60))
            )
            policy = StarWalkPolicy(scenario.participant_start)
            log = []
            for _ in range(600):
                events = world.step([policy.next_position(world.active_star())])
                log.extend((e.tick, e.kind.value, repr(e.payload)) for e in events)
            return log

        assert run() == run()


class TestDirectorConfig:
    def test_defaults_match_bundled_file(self):
        assert load_director_config() == DirectorConfig()
