"""Session state machine: star task, two-axis adaptive difficulty, spawn
scheduling, and the fixed-step world tick.

A single tick loop owns the WorldState; step() is deterministic given the
state, the inputs, and the schedule seed, which is what makes whole-session
replay bit-stable.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Sequence

from .adjudicator import (
    CalibrationParams,
    Cause,
    Vec2,
    Verdict,
    clamp_to_box,
    collides,
    is_safe_at,
    to_virtual,
)
from .agent_brain import CommandBatch
from .domain import (
    BehaviorPlan,
    COLD_START_DIFFICULTY,
    DifficultyState,
    DrivingStyle,
    FRAME_RATE,
    GestureKind,
    SessionPhase,
    SpiritKind,
    VEHICLE_LENGTH_M,
    VEHICLE_WIDTH_M,
    style_template,
)
from .memory import ErrorStats, Event, EventKind
from .scenario import LaneSpec, ScenarioConfig

TICK_DT = 1.0 / FRAME_RATE
ENTRY_MARGIN_M = 3.0  # vehicles spawn and despawn this far outside the field
MIN_CREEP_SPEED = 0.2  # m/s floor while closing on the stop point

VOICE_HINT_TEXT = "Watch the next car closely. Is it really slowing down for you?"


class ScheduleOverflow(RuntimeError):
    """A batch asks for more simultaneous vehicles than the lanes can hold."""


@dataclass(frozen=True)
class DirectorConfig:
    theta_high: float = 0.5
    theta_low: float = 0.2
    short_term_window: int = 5
    cold_start_scaffolding: int = 3
    cold_start_challenge: int = 1
    spawn_queue_low_water: int = 2
    yield_dwell_ticks: int = 90
    yield_clear_margin_m: float = 1.0
    star_radius_m: float = 0.5
    talk_radius_m: float = 1.0
    collision_radius_m: float = 0.5
    leave_accel_mps2: float = 3.0
    decision_horizon_ticks: int = 60


def load_director_config(path: str | Path | None = None) -> DirectorConfig:
    if path is None:
        text = resources.files("starcross.data").joinpath("director.json").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    doc = json.loads(text)
    cold = doc.pop("cold_start", {})
    return DirectorConfig(
        cold_start_scaffolding=int(cold.get("scaffolding", 3)),
        cold_start_challenge=int(cold.get("challenge", 1)),
        **{k: v for k, v in doc.items()},
    )


DEFAULT_DIRECTOR_CONFIG = DirectorConfig()


def cold_start_difficulty(config: DirectorConfig = DEFAULT_DIRECTOR_CONFIG) -> DifficultyState:
    return DifficultyState(config.cold_start_scaffolding, config.cold_start_challenge)


def next_difficulty(
    stats: ErrorStats,
    current: DifficultyState,
    config: DirectorConfig = DEFAULT_DIRECTOR_CONFIG,
) -> DifficultyState:
    """One ladder move per adjudicated trial.

    High short-term error rate raises scaffolding and lowers challenge; a low
    rate does the opposite; the middle band holds. A fresh session starts at
    maximum support regardless of the current level.
    """
    if stats.trial_count == 0:
        return cold_start_difficulty(config)
    rate = stats.short_term_error_rate
    if rate >= config.theta_high:
        return DifficultyState(
            scaffolding=min(current.scaffolding + 1, 3),
            challenge=max(current.challenge - 1, 1),
        )
    if rate <= config.theta_low:
        return DifficultyState(
            scaffolding=max(current.scaffolding - 1, 0),
            challenge=min(current.challenge + 1, 3),
        )
    return current


def select_gesture(
    style: DrivingStyle,
    stats: ErrorStats,
    difficulty: DifficultyState,
    config: DirectorConfig = DEFAULT_DIRECTOR_CONFIG,
) -> GestureKind | None:
    """Cross-invitation cue for struggling participants, on yielding styles only."""
    if not style.yields:
        return None
    if stats.short_term_error_rate >= config.theta_high or difficulty.scaffolding == 3:
        return GestureKind.CROSS_INVITATION
    return None


@dataclass(frozen=True)
class ScheduledSpawn:
    style: DrivingStyle
    lane: int
    delay_ticks: int
    plan: BehaviorPlan
    utterance: str
    gesture: GestureKind | None
    lying: bool = False


@dataclass(frozen=True)
class PedestrianPath:
    """Back-and-forth stroll along a sidewalk; a pure function of elapsed ticks."""

    ped_id: str
    y: float
    x_min: float
    x_max: float
    speed: float
    phase: float  # 0..1 starting offset along the loop

    def position_at(self, ticks: int) -> Vec2:
        span = self.x_max - self.x_min
        loop = 2.0 * span / self.speed
        t = (ticks * TICK_DT + self.phase * loop) % loop
        d = self.speed * t
        x = self.x_min + (d if d <= span else 2.0 * span - d)
        return (x, self.y)


@dataclass(frozen=True)
class SpawnSchedule:
    spawns: tuple[ScheduledSpawn, ...]
    pedestrians: tuple[PedestrianPath, ...]


def _estimated_active_ticks(plan: BehaviorPlan, travel_m: float, config: DirectorConfig) -> int:
    ticks = int(travel_m / plan.speed_profile.peak_speed() * FRAME_RATE)
    if plan.yields:
        ticks += config.yield_dwell_ticks
    return ticks


def build_spawn_schedule(
    batch: CommandBatch,
    difficulty: DifficultyState,
    seed: int,
    *,
    scenario: ScenarioConfig,
    stats: ErrorStats,
    config: DirectorConfig = DEFAULT_DIRECTOR_CONFIG,
) -> SpawnSchedule:
    """Turn a clean command batch into concrete spawns plus scene pedestrians.

    Vehicles use the fixed lane entry points, style plans at the current
    challenge tier, and the batch delays. The interfering-pedestrian count is
    challenge - 1. Deterministic given (batch, difficulty, seed).
    """
    lane_ids = {spec.lane for spec in scenario.lanes}
    travel = scenario.playfield.x1 - scenario.playfield.x0 + 2.0 * ENTRY_MARGIN_M
    spawns: list[ScheduledSpawn] = []
    windows: dict[int, list[tuple[int, int]]] = {}
    force_gesture = "gesture_hint" in batch.scaffolds
    for command in batch.spawns:
        if command.lane not in lane_ids:
            raise ScheduleOverflow(f"no lane {command.lane} in this scenario")
        plan = style_template(command.style, difficulty, scenario.style_speeds)
        gesture = command.gesture
        if gesture is None:
            gesture = select_gesture(command.style, stats, difficulty, config)
        if gesture is None and force_gesture and plan.yields:
            gesture = GestureKind.CROSS_INVITATION
        if gesture is GestureKind.CROSS_INVITATION and not plan.yields:
            gesture = None  # never a yield-gesture on a non-yielding style
        window = (command.delay_ticks,
                  command.delay_ticks + _estimated_active_ticks(plan, travel, config))
        for other in windows.setdefault(command.lane, []):
            if window[0] <= other[1] and other[0] <= window[1]:
                raise ScheduleOverflow(
                    f"lane {command.lane} would hold two vehicles at once"
                )
        windows[command.lane].append(window)
        spawns.append(
            ScheduledSpawn(
                style=command.style,
                lane=command.lane,
                delay_ticks=command.delay_ticks,
                plan=plan,
                utterance=command.utterance,
                gesture=gesture,
                lying=command.lying,
            )
        )

    rng = random.Random(seed)
    sidewalk_y = scenario.playfield.y1 - 1.2
    pedestrians = tuple(
        PedestrianPath(
            ped_id=f"ped_{i}",
            y=sidewalk_y + 0.3 * (i % 2),
            x_min=scenario.playfield.x0 + 0.5,
            x_max=scenario.playfield.x1 - 0.5,
            speed=0.8 + 0.4 * rng.random(),
            phase=rng.random(),
        )
        for i in range(difficulty.challenge - 1)
    )
    return SpawnSchedule(spawns=tuple(spawns), pedestrians=pedestrians)


class VehicleMode(str, Enum):
    APPROACH = "approach"
    WAITING = "waiting"
    LEAVING = "leaving"

    def __str__(self) -> str:
        return self.value


@dataclass
class VehicleState:
    vehicle_id: int
    trial_id: int
    style: DrivingStyle
    lane: int
    heading: int
    plan: BehaviorPlan
    gesture: GestureKind | None
    utterance: str
    lying: bool
    x: float
    y: float
    speed: float
    mode: VehicleMode
    spawn_tick: int
    stop_line_x: float
    leave_edge_x: float
    wait_left: int
    collided: bool = False
    car_leaving_tick: int | None = None

    @property
    def front_x(self) -> float:
        return self.x + self.heading * (VEHICLE_LENGTH_M / 2.0)

    @property
    def rear_x(self) -> float:
        return self.x - self.heading * (VEHICLE_LENGTH_M / 2.0)

    def distance_to_stop(self) -> float:
        return self.heading * (self.stop_line_x - self.front_x)


@dataclass
class PendingSpawn:
    activation_tick: int
    spawn: ScheduledSpawn


@dataclass
class PedestrianState:
    path: PedestrianPath
    spawn_tick: int


@dataclass
class World:
    """Authoritative session state, owned by one tick loop."""

    scenario: ScenarioConfig
    config: DirectorConfig
    calibration: CalibrationParams
    seed: int
    nickname: str
    greetings: dict[str, str] = field(default_factory=dict)

    tick: int = 0
    phase: SessionPhase = SessionPhase.ONBOARDING
    participant_pos: Vec2 = (0.0, 0.0)
    difficulty: DifficultyState = COLD_START_DIFFICULTY
    trial_errors: list[bool] = field(default_factory=list)
    trial_history: list[dict] = field(default_factory=list)
    vehicles: list[VehicleState] = field(default_factory=list)
    pending: list[PendingSpawn] = field(default_factory=list)
    pedestrians: list[PedestrianState] = field(default_factory=list)
    star_index: int = 0
    collected: int = 0
    decision_inflight: bool = False
    spirits_in_range: set[str] = field(default_factory=set)
    next_vehicle_id: int = 1
    next_trial_id: int = 1
    next_utterance_id: int = 1

    def __post_init__(self) -> None:
        self.participant_pos = self.scenario.participant_start
        self.difficulty = cold_start_difficulty(self.config)

    # -- clock and event plumbing --

    def wall_time(self) -> float:
        return self.tick / FRAME_RATE

    def _event(self, kind: EventKind, payload: dict) -> Event:
        return Event(tick=self.tick, kind=kind, payload=payload, wall_time=self.wall_time())

    def _utterance_event(self, speaker: str, text: str) -> Event:
        uid = f"u{self.next_utterance_id}"
        self.next_utterance_id += 1
        return self._event(
            EventKind.UTTERANCE, {"utterance_id": uid, "speaker": speaker, "text": text}
        )

    # -- derived views --

    def stats(self) -> ErrorStats:
        errors = self.trial_errors
        if not errors:
            return ErrorStats(0.0, 0.0, 0)
        recent = errors[-self.config.short_term_window :]
        return ErrorStats(sum(recent) / len(recent), sum(errors) / len(errors), len(errors))

    def star_target(self) -> int:
        return self.scenario.star_target

    def active_star(self) -> Vec2 | None:
        if self.phase is not SessionPhase.TRAINING:
            return None
        if self.collected >= self.star_target() or self.star_index >= len(self.scenario.stars):
            return None
        return self.scenario.stars[self.star_index]

    def remaining_seconds(self) -> float:
        return max(0.0, self.scenario.session_seconds - self.tick / FRAME_RATE)

    def accuracy(self) -> float:
        if not self.trial_errors:
            return 0.0
        return 1.0 - sum(self.trial_errors) / len(self.trial_errors)

    def wants_decision(self) -> bool:
        return (
            self.phase is SessionPhase.TRAINING
            and not self.decision_inflight
            and len(self.pending) < self.config.spawn_queue_low_water
        )

    # -- facilitator-driven transitions --

    def begin(self) -> list[Event]:
        """First event of a session; called once before any stepping."""
        return [self._event(EventKind.PHASE_CHANGE, {"to": self.phase.value})]

    def begin_training(self) -> list[Event]:
        if not self.phase.can_transition_to(SessionPhase.TRAINING):
            return []
        self.phase = SessionPhase.TRAINING
        return [
            self._event(
                EventKind.PHASE_CHANGE,
                {"from": SessionPhase.ONBOARDING.value, "to": SessionPhase.TRAINING.value},
            )
        ]

    def complete(self, reason: str = "target_reached") -> list[Event]:
        if self.phase is SessionPhase.COMPLETED:
            return []
        prev = self.phase.value
        self.phase = SessionPhase.COMPLETED
        return [
            self._event(
                EventKind.PHASE_CHANGE,
                {"from": prev, "to": SessionPhase.COMPLETED.value, "reason": reason},
            )
        ]

    def apply_difficulty_override(self, scaffolding: int, challenge: int) -> list[Event]:
        self.difficulty = DifficultyState(scaffolding, challenge)
        return [
            self._event(
                EventKind.SCAFFOLD_SHOWN,
                {
                    "cue": "difficulty_override",
                    "provenance": "manual",
                    "scaffolding": scaffolding,
                    "challenge": challenge,
                },
            )
        ]

    # -- decision application --

    def apply_command_batch(self, batch: CommandBatch, seed_salt: int = 0) -> list[Event]:
        """Queue a clean batch's spawns; returns scaffold and narration events."""
        events: list[Event] = []
        schedule = build_spawn_schedule(
            batch,
            self.difficulty,
            seed=self.seed + seed_salt,
            scenario=self.scenario,
            stats=self.stats(),
            config=self.config,
        )
        for spawn in schedule.spawns:
            self.pending.append(
                PendingSpawn(activation_tick=self.tick + spawn.delay_ticks, spawn=spawn)
            )
        self.pedestrians = [
            PedestrianState(path=p, spawn_tick=self.tick) for p in schedule.pedestrians
        ]
        if "voice_hint" in batch.scaffolds:
            events.append(
                self._event(
                    EventKind.SCAFFOLD_SHOWN, {"cue": "voice_hint", "provenance": "auto"}
                )
            )
            events.append(self._utterance_event("narrator", VOICE_HINT_TEXT))
        for line in batch.narration:
            events.append(self._utterance_event("narrator", line))
        self.decision_inflight = False
        return events

    # -- the fixed-step tick --

    def step(self, raw_positions: Sequence[Vec2] = ()) -> list[Event]:
        """Advance exactly one tick; returns the events it produced."""
        events: list[Event] = []
        if self.phase is SessionPhase.COMPLETED:
            self.tick += 1
            return events

        for raw in raw_positions:
            virtual = to_virtual(raw, self.calibration)
            pos, clamped = clamp_to_box(virtual, self.scenario.playfield)
            if pos != self.participant_pos:
                payload: dict = {"pos": [pos[0], pos[1]]}
                if clamped:
                    payload["clamped"] = True
                self.participant_pos = pos
                events.append(self._event(EventKind.POSITION_UPDATE, payload))

        if self.phase is SessionPhase.ONBOARDING:
            events.extend(self._step_onboarding())
        elif self.phase is SessionPhase.TRAINING:
            events.extend(self._step_training())

        self.tick += 1
        return events

    def _step_onboarding(self) -> list[Event]:
        events: list[Event] = []
        for spirit in self.scenario.spirits:
            if spirit.kind not in (SpiritKind.TREE, SpiritKind.VEHICLE):
                continue
            dx = spirit.position[0] - self.participant_pos[0]
            dy = spirit.position[1] - self.participant_pos[1]
            dist = (dx * dx + dy * dy) ** 0.5
            if dist <= self.config.talk_radius_m:
                if spirit.id not in self.spirits_in_range:
                    self.spirits_in_range.add(spirit.id)
                    text = self.greetings.get(spirit.id, f"Hello, {self.nickname}!")
                    events.append(self._utterance_event(spirit.id, text))
            elif dist > self.config.talk_radius_m + 0.5:
                self.spirits_in_range.discard(spirit.id)
        return events

    def _step_training(self) -> list[Event]:
        events: list[Event] = []
        events.extend(self._activate_due_spawns())
        for vehicle in self.vehicles:
            events.extend(self._advance_vehicle(vehicle))
        self.vehicles = [v for v in self.vehicles if not self._out_of_field(v)]
        events.extend(self._check_star())
        return events

    def _lane_occupied(self, lane: int) -> bool:
        return any(v.lane == lane for v in self.vehicles)

    def _activate_due_spawns(self) -> list[Event]:
        events: list[Event] = []
        still_pending: list[PendingSpawn] = []
        for item in self.pending:
            # Activation waits for the lane to clear; order is preserved.
            if item.activation_tick <= self.tick and not self._lane_occupied(item.spawn.lane):
                events.extend(self._spawn_vehicle(item.spawn))
            else:
                still_pending.append(item)
        self.pending = still_pending
        return events

    def _spawn_vehicle(self, spawn: ScheduledSpawn) -> list[Event]:
        lane = self.scenario.lane_by_id(spawn.lane)
        heading = lane.heading
        half = VEHICLE_LENGTH_M / 2.0
        if heading > 0:
            x = self.scenario.playfield.x0 - ENTRY_MARGIN_M - half
        else:
            x = self.scenario.playfield.x1 + ENTRY_MARGIN_M + half
        vehicle = VehicleState(
            vehicle_id=self.next_vehicle_id,
            trial_id=self.next_trial_id,
            style=spawn.style,
            lane=spawn.lane,
            heading=heading,
            plan=spawn.plan,
            gesture=spawn.gesture,
            utterance=spawn.utterance,
            lying=spawn.lying,
            x=x,
            y=lane.center_y,
            speed=spawn.plan.speed_profile.peak_speed(),
            mode=VehicleMode.APPROACH,
            spawn_tick=self.tick,
            stop_line_x=self._stop_line(lane),
            leave_edge_x=self._leave_edge(lane),
            wait_left=self.config.yield_dwell_ticks,
        )
        self.next_vehicle_id += 1
        self.next_trial_id += 1
        self.vehicles.append(vehicle)

        events = [
            self._event(
                EventKind.SPAWN,
                {
                    "vehicle_id": vehicle.vehicle_id,
                    "trial_id": vehicle.trial_id,
                    "style": vehicle.style.value,
                    "lane": vehicle.lane,
                    "pos": [vehicle.x, vehicle.y],
                    "gesture": vehicle.gesture.value if vehicle.gesture else None,
                    "lying": vehicle.lying,
                },
            )
        ]
        if vehicle.utterance:
            events.append(self._utterance_event(f"vehicle_{vehicle.vehicle_id}", vehicle.utterance))
        if vehicle.gesture is not None:
            events.append(
                self._event(
                    EventKind.SCAFFOLD_SHOWN,
                    {
                        "cue": "gesture",
                        "gesture": vehicle.gesture.value,
                        "vehicle_id": vehicle.vehicle_id,
                        "provenance": "auto",
                    },
                )
            )
        return events

    def _stop_line(self, lane: LaneSpec) -> float:
        """Near edge of the crosswalk closest to the participant right now."""
        px = self.participant_pos[0]
        best = min(self.scenario.crosswalks, key=lambda cw: abs((cw[0] + cw[1]) / 2.0 - px))
        return best[0] if lane.heading > 0 else best[1]

    def _leave_edge(self, lane: LaneSpec) -> float:
        """Far edge of the last crosswalk along this lane's travel direction."""
        if lane.heading > 0:
            return max(cw[1] for cw in self.scenario.crosswalks)
        return min(cw[0] for cw in self.scenario.crosswalks)

    def _out_of_field(self, v: VehicleState) -> bool:
        limit = ENTRY_MARGIN_M + VEHICLE_LENGTH_M
        return (v.heading > 0 and v.x > self.scenario.playfield.x1 + limit) or (
            v.heading < 0 and v.x < self.scenario.playfield.x0 - limit
        )

    def _corridor_clear(self, v: VehicleState) -> bool:
        margin = self.config.yield_clear_margin_m
        px, py = self.participant_pos
        if abs(py - v.y) > VEHICLE_WIDTH_M / 2.0 + margin:
            return True
        if v.heading > 0:
            return not (v.front_x - margin <= px)
        return not (px <= v.front_x + margin)

    def _advance_vehicle(self, v: VehicleState) -> list[Event]:
        events: list[Event] = []
        if v.mode is VehicleMode.APPROACH:
            d = v.distance_to_stop()
            speed = v.plan.speed_profile.speed_at(d)
            if v.plan.yields:
                speed = max(speed, MIN_CREEP_SPEED)
                stop_at = v.plan.speed_profile.stop_distance() or 0.0
                if d - speed * TICK_DT <= stop_at:
                    v.x = v.stop_line_x - v.heading * (stop_at + VEHICLE_LENGTH_M / 2.0)
                    v.speed = 0.0
                    v.mode = VehicleMode.WAITING
                else:
                    v.x += v.heading * speed * TICK_DT
                    v.speed = speed
            else:
                v.x += v.heading * speed * TICK_DT
                v.speed = speed
                if v.heading * (v.rear_x - v.leave_edge_x) > 0:
                    events.extend(self._car_leaves(v))
        elif v.mode is VehicleMode.WAITING:
            if v.wait_left > 0:
                v.wait_left -= 1
            elif self._corridor_clear(v):
                events.extend(self._car_leaves(v))
        else:  # LEAVING
            peak = v.plan.speed_profile.peak_speed()
            v.speed = min(v.speed + self.config.leave_accel_mps2 * TICK_DT, peak)
            v.x += v.heading * v.speed * TICK_DT

        if v.mode in (VehicleMode.APPROACH, VehicleMode.WAITING) and not v.collided:
            if collides(
                self.participant_pos, (v.x, v.y), radius=self.config.collision_radius_m
            ):
                v.collided = True
                events.append(
                    self._event(
                        EventKind.COLLISION,
                        {
                            "trial_id": v.trial_id,
                            "vehicle_id": v.vehicle_id,
                            "style": v.style.value,
                            "pos": [v.x, v.y],
                        },
                    )
                )
        return events

    def _car_leaves(self, v: VehicleState) -> list[Event]:
        """Adjudicate the trial at the instant the departure animation starts."""
        v.mode = VehicleMode.LEAVING
        v.car_leaving_tick = self.tick
        if v.collided:
            verdict, cause = Verdict.INCORRECT, Cause.COLLISION
            marginal = False
        else:
            verdict, cause = Verdict.CORRECT, Cause.SAFE_AT_CAR_LEAVING
            marginal = not is_safe_at(self.participant_pos, self.scenario.layout)
        self.trial_errors.append(verdict is not Verdict.CORRECT)
        outcome = {
            "trial_id": v.trial_id,
            "vehicle_id": v.vehicle_id,
            "style": v.style.value,
            "verdict": verdict.value,
            "cause": cause.value,
            "marginal": marginal,
        }
        self.trial_history.append({**outcome, "tick": self.tick})
        self.difficulty = next_difficulty(self.stats(), self.difficulty, self.config)
        return [self._event(EventKind.CAR_LEAVING, outcome)]

    def _check_star(self) -> list[Event]:
        star = self.active_star()
        if star is None:
            return []
        dx = star[0] - self.participant_pos[0]
        dy = star[1] - self.participant_pos[1]
        if (dx * dx + dy * dy) ** 0.5 > self.config.star_radius_m:
            return []
        self.collected += 1
        self.star_index += 1
        nxt = self.active_star()
        events = [
            self._event(
                EventKind.STAR_COLLECTED,
                {
                    "index": self.star_index - 1,
                    "pos": [star[0], star[1]],
                    "collected": self.collected,
                    "target": self.star_target(),
                    "next": [nxt[0], nxt[1]] if nxt else None,
                },
            )
        ]
        if self.collected >= self.star_target():
            events.extend(self.complete())
        return events

    # -- UI-facing snapshot --

    def snapshot(self) -> dict:
        """Full authoritative entity state for one StateDelta.

        Includes the static area geometry so a client that joins mid-session
        can draw the whole scene from a single delta.
        """
        ticks = self.tick
        return {
            "areas": [
                {
                    "id": a.area_id,
                    "rect": [a.rect.x0, a.rect.y0, a.rect.x1, a.rect.y1],
                    "safe": a.is_safe,
                }
                for a in self.scenario.layout.sorted_areas()
            ],
            "participant": [self.participant_pos[0], self.participant_pos[1]],
            "vehicles": [
                {
                    "id": v.vehicle_id,
                    "style": v.style.value,
                    "lane": v.lane,
                    "pos": [v.x, v.y],
                    "heading": v.heading,
                    "speed": v.speed,
                    "mode": v.mode.value,
                    "gesture": v.gesture.value if v.gesture else None,
                }
                for v in self.vehicles
            ],
            "pedestrians": [
                {
                    "id": p.path.ped_id,
                    "pos": list(p.path.position_at(ticks - p.spawn_tick)),
                }
                for p in self.pedestrians
            ],
            "star": (
                {"index": self.star_index, "pos": list(self.active_star())}
                if self.active_star()
                else None
            ),
            "phase": self.phase.value,
            "difficulty": {
                "scaffolding": self.difficulty.scaffolding,
                "challenge": self.difficulty.challenge,
            },
        }
