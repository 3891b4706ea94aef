"""Core vocabulary: driving styles, behavior plans, spirits, scene geometry, phases.

Everything in this module is immutable value data and safe to share across
threads without synchronization.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from enum import Enum

FRAME_RATE = 30
"""Animation catalog authoring rate and the simulation tick rate, in Hz."""

UTTERANCE_WORD_CAP = 25
"""Hard cap on spoken utterance length, in whitespace-delimited words."""


class DrivingStyle(str, Enum):
    """One of the four driver archetypes governing kinematics and narration."""

    DISSOCIATIVE = "dissociative"
    ANXIOUS = "anxious"
    RISKY = "risky"
    PATIENT = "patient"

    def __str__(self) -> str:
        return self.value

    @property
    def yields(self) -> bool:
        """Whether this style stops for pedestrians at the crosswalk."""
        return self in (DrivingStyle.PATIENT, DrivingStyle.ANXIOUS)

    @classmethod
    def parse(cls, token: str) -> "DrivingStyle":
        try:
            return cls(token.strip().lower())
        except ValueError:
            raise UnknownStyleError(token) from None


class UnknownStyleError(ValueError):
    """Raised when a style token is not one of the four known styles."""

    def __init__(self, token: str) -> None:
        super().__init__(f"unknown driving style {token!r}")
        self.token = token


class GestureKind(str, Enum):
    CROSS_INVITATION = "cross_invitation"
    WARNING = "warning"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, token: str) -> "GestureKind":
        try:
            return cls(token.strip().lower())
        except ValueError:
            raise ValueError(f"unknown gesture {token!r}") from None


class SessionPhase(str, Enum):
    """Session phases; legal transitions are onboarding -> training -> completed."""

    ONBOARDING = "onboarding"
    TRAINING = "training"
    COMPLETED = "completed"

    def __str__(self) -> str:
        return self.value

    def can_transition_to(self, nxt: "SessionPhase") -> bool:
        order = [SessionPhase.ONBOARDING, SessionPhase.TRAINING, SessionPhase.COMPLETED]
        return order.index(nxt) == order.index(self) + 1


@dataclass(frozen=True)
class SpeedProfile:
    """Piecewise-linear speed as a function of distance to the stop line.

    Distances are meters ahead of the crosswalk near edge along the travel
    direction (positive while approaching, negative once past). Speeds are
    m/s. Points are stored sorted by descending distance, i.e. in order of
    travel, and evaluation clamps outside the covered range.
    """

    points: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if len(self.points) < 2:
            raise ValueError("speed profile needs at least two points")
        dists = [d for d, _ in self.points]
        if any(a <= b for a, b in zip(dists, dists[1:])):
            raise ValueError("profile distances must strictly decrease")
        if any(v < 0 for _, v in self.points):
            raise ValueError("profile speeds must be non-negative")

    def speed_at(self, distance: float) -> float:
        """Interpolated speed at the given distance to the stop line."""
        dists = [-d for d, _ in self.points]  # ascending for bisect
        key = -distance
        if key <= dists[0]:
            return self.points[0][1]
        if key >= dists[-1]:
            return self.points[-1][1]
        hi = bisect.bisect_right(dists, key)
        (d1, v1), (d0, v0) = self.points[hi], self.points[hi - 1]
        t = (d0 - distance) / (d0 - d1)
        return v0 + t * (v1 - v0)

    def peak_speed(self) -> float:
        return max(v for _, v in self.points)

    def stop_distance(self) -> float | None:
        """Distance at which the profile first reaches 0 m/s, if it does."""
        for d, v in self.points:
            if v == 0.0:
                return d
        return None

    def min_speed_over(self, d_from: float, d_to: float) -> float:
        """Minimum speed over a span of distances (d_from > d_to)."""
        lo, hi = min(d_from, d_to), max(d_from, d_to)
        inner = [v for d, v in self.points if lo <= d <= hi]
        return min([self.speed_at(lo), self.speed_at(hi)] + inner)


@dataclass(frozen=True)
class BehaviorPlan:
    """A driver's plan for one pass: kinematics, yield decision, optional gesture."""

    style: DrivingStyle
    speed_profile: SpeedProfile
    yields: bool
    gesture: GestureKind | None = None
    animation_id: str = ""
    frame_rate: int = FRAME_RATE

    def check(self) -> None:
        """Raise ValueError on any violated plan invariant."""
        if self.frame_rate != FRAME_RATE:
            raise ValueError(f"frame_rate must be {FRAME_RATE}")
        stop = self.speed_profile.stop_distance()
        if self.yields:
            if stop is None or stop <= 0.0:
                raise ValueError("yielding plan must reach 0 m/s strictly before the crosswalk")
        else:
            # Crossing span: from the near edge to past the far edge.
            if self.speed_profile.min_speed_over(0.0, -CROSSWALK_SPAN_M) <= 0.0:
                raise ValueError("non-yielding plan must keep positive speed over the crossing")


@dataclass(frozen=True)
class VoiceSettings:
    timbre: str = "gentle_female"
    rate: float = 1.0
    pitch: float = 1.0


class SpiritKind(str, Enum):
    VEHICLE = "vehicle"
    TREE = "tree"
    STAR = "star"
    PEDESTRIAN = "pedestrian"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Spirit:
    """An animated, voiced scene entity configurable via personified attributes."""

    id: str
    kind: SpiritKind
    personality: str
    position: tuple[float, float]
    responsibilities: str
    actions: tuple[str, ...]
    voice: VoiceSettings = field(default_factory=VoiceSettings)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle in virtual meters: [x0, x1] x [y0, y1]."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self) -> None:
        if self.x1 <= self.x0 or self.y1 <= self.y0:
            raise ValueError("rectangle must have positive extent")

    def contains(self, x: float, y: float) -> bool:
        """Closed-boundary containment."""
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1

    def interior_overlaps(self, other: "Rect") -> bool:
        return (
            self.x0 < other.x1
            and other.x0 < self.x1
            and self.y0 < other.y1
            and other.y0 < self.y1
        )

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)


@dataclass(frozen=True)
class Area:
    area_id: str
    rect: Rect
    description: str
    is_safe: bool


@dataclass(frozen=True)
class AreaLayout:
    """Partition of the playfield into described areas.

    Invariants (checked by scenario validation): rectangles are pairwise
    interior-disjoint, their union covers the playfield bounding box exactly,
    and at least two areas are safe zones.
    """

    areas: tuple[Area, ...]

    def bounding_box(self) -> Rect:
        return Rect(
            min(a.rect.x0 for a in self.areas),
            min(a.rect.y0 for a in self.areas),
            max(a.rect.x1 for a in self.areas),
            max(a.rect.y1 for a in self.areas),
        )

    def sorted_areas(self) -> tuple[Area, ...]:
        return tuple(sorted(self.areas, key=lambda a: a.area_id))

    def by_id(self, area_id: str) -> Area:
        for a in self.areas:
            if a.area_id == area_id:
                return a
        raise KeyError(area_id)

    def safe_ids(self) -> frozenset[str]:
        return frozenset(a.area_id for a in self.areas if a.is_safe)


# Default scene geometry, meters. Two safe sidewalks flank a two-lane road
# crossed by two crosswalk strips; see data/scenario_default.json.
PLAYFIELD_W = 14.0
PLAYFIELD_H = 8.0
ROAD_Y0 = 2.0
ROAD_Y1 = 6.0
LANE_CENTERS = {1: 3.0, 2: 5.0}  # lane 1 eastbound, lane 2 westbound
CROSSWALKS = ((3.0, 5.0), (9.0, 11.0))  # x spans of the west and east crosswalks
CROSSWALK_SPAN_M = 2.0

VEHICLE_LENGTH_M = 4.0
VEHICLE_WIDTH_M = 1.8

ANIMATION_CATALOG = (
    "drive_dissociative",
    "drive_anxious",
    "drive_risky",
    "drive_patient",
    "car_leave",
    "gesture_cross_invitation",
    "gesture_warning",
    "tree_talk",
    "star_spin",
    "pedestrian_walk",
)


@dataclass(frozen=True)
class StyleSpeeds:
    """Base peak speeds per style, m/s, before difficulty multipliers."""

    patient: float = 4.0
    dissociative: float = 6.0
    risky: float = 10.0
    anxious: float = 5.0

    def base(self, style: DrivingStyle) -> float:
        return getattr(self, style.value)


DEFAULT_STYLE_SPEEDS = StyleSpeeds()

# Challenge tier -> speed multiplier; max scaffolding slows vehicles further.
CHALLENGE_SPEED_MULTIPLIERS = {1: 1.0, 2: 1.25, 3: 1.5}
MAX_SCAFFOLD_SLOW_FACTOR = 0.8

# Yielding stop points, meters before the crosswalk near edge.
PATIENT_DECEL_FROM_M = 6.0
PATIENT_STOP_AT_M = 0.5
ANXIOUS_BRAKE_FROM_M = 2.0
ANXIOUS_STOP_AT_M = 0.2

SPAWN_APPROACH_M = 20.0  # profile coverage ahead of the stop line


def style_template(
    style: DrivingStyle,
    difficulty: "DifficultyState",
    speeds: StyleSpeeds = DEFAULT_STYLE_SPEEDS,
) -> BehaviorPlan:
    """Canonical behavior plan for a style at a difficulty level.

    Patient yields with early smooth deceleration; anxious yields with late
    stepwise braking; dissociative and risky hold speed through the crossing.
    Peak speeds scale with the challenge tier and drop at maximum scaffolding.
    """
    mult = CHALLENGE_SPEED_MULTIPLIERS[difficulty.challenge]
    if difficulty.scaffolding == 3:
        mult *= MAX_SCAFFOLD_SLOW_FACTOR
    peak = speeds.base(style) * mult

    if style is DrivingStyle.PATIENT:
        pts = (
            (SPAWN_APPROACH_M, peak),
            (PATIENT_DECEL_FROM_M, peak),
            (PATIENT_STOP_AT_M, 0.0),
        )
    elif style is DrivingStyle.ANXIOUS:
        # Two discrete braking steps, rendered as steep ramps, starting only
        # 2 m out; perceptually distinct from the patient glide.
        pts = (
            (SPAWN_APPROACH_M, peak),
            (ANXIOUS_BRAKE_FROM_M, peak),
            (1.8, peak * 0.5),
            (1.2, peak * 0.5),
            (1.0, peak * 0.2),
            (0.4, peak * 0.2),
            (ANXIOUS_STOP_AT_M, 0.0),
        )
    else:
        # Constant speed through the crossing and out the far side.
        pts = ((SPAWN_APPROACH_M, peak), (-SPAWN_APPROACH_M, peak))

    plan = BehaviorPlan(
        style=style,
        speed_profile=SpeedProfile(pts),
        yields=style.yields,
        gesture=None,
        animation_id=f"drive_{style.value}",
    )
    plan.check()
    return plan


@dataclass(frozen=True)
class DifficultyState:
    """Two-axis difficulty level.

    scaffolding: 0..3 cognitive support (3 = gesture cue + voice narration +
    slowed vehicles). challenge: 1..3 environment tier (vehicle speed
    multiplier and interfering-pedestrian count).
    """

    scaffolding: int
    challenge: int

    def __post_init__(self) -> None:
        if not 0 <= self.scaffolding <= 3:
            raise ValueError(f"scaffolding out of range: {self.scaffolding}")
        if not 1 <= self.challenge <= 3:
            raise ValueError(f"challenge out of range: {self.challenge}")


COLD_START_DIFFICULTY = DifficultyState(scaffolding=3, challenge=1)
