"""Tracker-to-virtual mapping, area classification, and crossing adjudication.

Everything here is a pure function over immutable inputs and may be called
from any thread.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

from .domain import AreaLayout, DrivingStyle, Rect, VEHICLE_LENGTH_M, VEHICLE_WIDTH_M

COLLISION_RADIUS_M = 0.5

Vec2 = tuple[float, float]


class DegenerateCalibration(ValueError):
    """Calibration pairs have no spread (or no usable scale) on some axis."""


class IncompleteTrajectory(ValueError):
    """Participant trajectory does not cover the vehicle's active tick span."""


@dataclass(frozen=True)
class CalibrationParams:
    """Per-axis affine map from raw tracker space to virtual meters."""

    n: Vec2  # scale, both components nonzero
    b: Vec2  # offset, virtual meters

    def __post_init__(self) -> None:
        if self.n[0] == 0.0 or self.n[1] == 0.0:
            raise DegenerateCalibration("calibration scale must be nonzero on both axes")


IDENTITY_CALIBRATION = CalibrationParams(n=(1.0, 1.0), b=(0.0, 0.0))


def _axis_fit(raw: Sequence[float], virt: Sequence[float]) -> tuple[float, float]:
    mean_r = sum(raw) / len(raw)
    mean_v = sum(virt) / len(virt)
    sxx = sum((r - mean_r) ** 2 for r in raw)
    if sxx < 1e-12:
        raise DegenerateCalibration("no spread in raw coordinates on an axis")
    sxy = sum((r - mean_r) * (v - mean_v) for r, v in zip(raw, virt))
    n = sxy / sxx
    if n == 0.0:
        raise DegenerateCalibration("fitted scale is zero on an axis")
    return n, mean_v - n * mean_r


def calibrate(pairs: Sequence[tuple[Vec2, Vec2]]) -> CalibrationParams:
    """Least-squares fit of virtual = n * raw + b, independently per axis.

    Exact for noiseless pairs. Requires at least two pairs with distinct raw
    coordinates on each axis.
    """
    if len(pairs) < 2:
        raise DegenerateCalibration("need at least two calibration pairs")
    nx, bx = _axis_fit([p[0][0] for p in pairs], [p[1][0] for p in pairs])
    ny, by = _axis_fit([p[0][1] for p in pairs], [p[1][1] for p in pairs])
    return CalibrationParams(n=(nx, ny), b=(bx, by))


def to_virtual(raw: Vec2, calib: CalibrationParams) -> Vec2:
    return (calib.n[0] * raw[0] + calib.b[0], calib.n[1] * raw[1] + calib.b[1])


def to_raw(virtual: Vec2, calib: CalibrationParams) -> Vec2:
    """Inverse of to_virtual; well-defined because both scales are nonzero."""
    return ((virtual[0] - calib.b[0]) / calib.n[0], (virtual[1] - calib.b[1]) / calib.n[1])


def save_calibration(path: str | Path, calib: CalibrationParams,
                     pairs: Sequence[tuple[Vec2, Vec2]], fitted_at: float) -> None:
    doc = {
        "n": list(calib.n),
        "b": list(calib.b),
        "pairs": [[list(r), list(v)] for r, v in pairs],
        "fitted_at": fitted_at,
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_calibration(path: str | Path) -> CalibrationParams:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return CalibrationParams(n=tuple(doc["n"]), b=tuple(doc["b"]))


def clamp_to_box(pos: Vec2, box: Rect) -> tuple[Vec2, bool]:
    """Clamp a position to the box; second value reports whether clamping bit."""
    x = min(max(pos[0], box.x0), box.x1)
    y = min(max(pos[1], box.y0), box.y1)
    return (x, y), (x, y) != pos


def classify_area(pos: Vec2, layout: AreaLayout) -> str:
    """The unique area containing pos (clamped to the playfield).

    Boundary points belong to the area with the lexicographically smallest
    area_id: areas are scanned in id order with closed-boundary containment.
    """
    (x, y), _ = clamp_to_box(pos, layout.bounding_box())
    for area in layout.sorted_areas():
        if area.rect.contains(x, y):
            return area.area_id
    raise RuntimeError(f"layout does not cover point ({x}, {y})")  # pragma: no cover


def is_safe_at(pos: Vec2, layout: AreaLayout) -> bool:
    return classify_area(pos, layout) in layout.safe_ids()


class Verdict(str, Enum):
    CORRECT = "correct"
    INCORRECT = "incorrect"

    def __str__(self) -> str:
        return self.value


class Cause(str, Enum):
    SAFE_AT_CAR_LEAVING = "safe_at_car_leaving"
    COLLISION = "collision"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class CrossingOutcome:
    trial_id: int
    verdict: Verdict
    cause: Cause
    vehicle_style: DrivingStyle
    tick: int
    marginal: bool = False  # correct but mid-road, uncollided, at car-leaving


@dataclass(frozen=True)
class SafePeriod:
    start_tick: int
    end_tick: int

    def __post_init__(self) -> None:
        if self.start_tick >= self.end_tick:
            raise ValueError("safe period must have start_tick < end_tick")


@dataclass(frozen=True)
class VehicleTimeline:
    """One vehicle's pass as seen by the adjudicator.

    positions[i] is the vehicle center at tick start_tick + i; the span runs
    through car_leaving_tick, the instant the departure animation starts.
    """

    trial_id: int
    style: DrivingStyle
    start_tick: int
    positions: tuple[Vec2, ...]
    car_leaving_tick: int
    length_m: float = VEHICLE_LENGTH_M
    width_m: float = VEHICLE_WIDTH_M

    def __post_init__(self) -> None:
        if not self.start_tick <= self.car_leaving_tick < self.start_tick + len(self.positions):
            raise ValueError("car_leaving_tick must fall inside the position span")

    def position_at(self, tick: int) -> Vec2:
        return self.positions[tick - self.start_tick]


def point_rect_distance(p: Vec2, center: Vec2, length: float, width: float) -> float:
    """Distance from a point to an axis-aligned rectangle (length along x)."""
    dx = max(abs(p[0] - center[0]) - length / 2.0, 0.0)
    dy = max(abs(p[1] - center[1]) - width / 2.0, 0.0)
    return math.hypot(dx, dy)


def collides(participant: Vec2, vehicle_center: Vec2,
             length: float = VEHICLE_LENGTH_M, width: float = VEHICLE_WIDTH_M,
             radius: float = COLLISION_RADIUS_M) -> bool:
    return point_rect_distance(participant, vehicle_center, length, width) < radius


def adjudicate(
    trajectory: Mapping[int, Vec2],
    vehicle: VehicleTimeline,
    layout: AreaLayout,
    radius: float = COLLISION_RADIUS_M,
) -> CrossingOutcome:
    """Judge one crossing trial.

    Collision anywhere in the vehicle's active span decides the trial at the
    first contact tick. Otherwise the participant's area at the car-leaving
    tick decides: safe region is a clean Correct; mid-road but uncollided is
    Correct too, flagged marginal, because the vehicle has passed.
    """
    for tick in range(vehicle.start_tick, vehicle.car_leaving_tick + 1):
        if tick not in trajectory:
            raise IncompleteTrajectory(f"trajectory missing tick {tick}")
        if collides(trajectory[tick], vehicle.position_at(tick),
                    vehicle.length_m, vehicle.width_m, radius):
            return CrossingOutcome(
                trial_id=vehicle.trial_id,
                verdict=Verdict.INCORRECT,
                cause=Cause.COLLISION,
                vehicle_style=vehicle.style,
                tick=tick,
            )
    at_leaving = trajectory[vehicle.car_leaving_tick]
    return CrossingOutcome(
        trial_id=vehicle.trial_id,
        verdict=Verdict.CORRECT,
        cause=Cause.SAFE_AT_CAR_LEAVING,
        vehicle_style=vehicle.style,
        tick=vehicle.car_leaving_tick,
        marginal=not is_safe_at(at_leaving, layout),
    )


def reaction_time(safe: SafePeriod, selection_tick: int, tick_hz: int) -> tuple[bool, float | None]:
    """Whether a selection fell within the safe period, and the latency if so.

    The period is inclusive on both ends; latency is seconds from the start
    of the safe period to the selection.
    """
    if tick_hz <= 0:
        raise ValueError("tick_hz must be positive")
    correct = safe.start_tick <= selection_tick <= safe.end_tick
    rt = (selection_tick - safe.start_tick) / tick_hz if correct else None
    return correct, rt
