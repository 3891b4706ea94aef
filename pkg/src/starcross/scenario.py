"""Scenario file parsing, validation, and the bundled default scene."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from .domain import (
    Area,
    AreaLayout,
    DrivingStyle,
    Rect,
    Spirit,
    SpiritKind,
    StyleSpeeds,
    VoiceSettings,
)

SCHEMA_VERSION = 1

COVERAGE_EPS = 1e-9


class ScenarioFormatError(ValueError):
    """Scenario document is structurally unreadable (not a schema question)."""


@dataclass(frozen=True)
class LaneSpec:
    lane: int
    center_y: float
    heading: int  # +1 travels toward +x, -1 toward -x


@dataclass(frozen=True)
class ScenarioConfig:
    schema_version: int
    playfield: Rect
    layout: AreaLayout
    lanes: tuple[LaneSpec, ...]
    crosswalks: tuple[tuple[float, float], ...]
    animation_catalog: tuple[str, ...]
    spirits: tuple[Spirit, ...]
    stars: tuple[tuple[float, float], ...]
    star_target: int
    participant_start: tuple[float, float]
    style_speeds: StyleSpeeds
    session_seconds: float
    calibration_refs: tuple[tuple[tuple[float, float], tuple[float, float]], ...]

    def lane_by_id(self, lane: int) -> LaneSpec:
        for spec in self.lanes:
            if spec.lane == lane:
                return spec
        raise KeyError(f"no lane {lane}")

    def road_mid_y(self) -> float:
        road = [a.rect for a in self.layout.areas if not a.is_safe]
        return (min(r.y0 for r in road) + max(r.y1 for r in road)) / 2.0


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    subjects: tuple[str, ...] = ()


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, code: str, message: str, *subjects: str) -> None:
        self.violations.append(Violation(code, message, tuple(subjects)))

    def summary(self) -> str:
        if self.ok:
            return "scenario ok"
        return "\n".join(f"[{v.code}] {v.message}" for v in self.violations)


def _vec2(value: Any, what: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ScenarioFormatError(f"{what} must be a 2-element array")
    return float(value[0]), float(value[1])


def parse_scenario(doc: dict[str, Any]) -> ScenarioConfig:
    """Build a ScenarioConfig from a parsed JSON document.

    Raises ScenarioFormatError for structural problems. Semantic invariant
    violations are left to validate_scenario, which treats them as data.
    """
    try:
        version = int(doc["schema_version"])
        pf = doc["playfield"]
        playfield = Rect(0.0, 0.0, float(pf["width"]), float(pf["height"]))
        areas = tuple(
            Area(
                area_id=str(a["area_id"]),
                rect=Rect(*(float(v) for v in a["rect"])),
                description=str(a["description"]),
                is_safe=bool(a["is_safe"]),
            )
            for a in doc["areas"]
        )
        lanes = tuple(
            LaneSpec(lane=int(k), center_y=float(v["center_y"]), heading=int(v["heading"]))
            for k, v in sorted(doc["lanes"].items(), key=lambda kv: int(kv[0]))
        )
        crosswalks = tuple((float(a), float(b)) for a, b in doc["crosswalks"])
        catalog = tuple(str(x) for x in doc["animation_catalog"])
        spirits = tuple(
            Spirit(
                id=str(s["id"]),
                kind=SpiritKind(s["kind"]),
                personality=str(s["personality"]),
                position=_vec2(s["position"], f"spirit {s.get('id')} position"),
                responsibilities=str(s["responsibilities"]),
                actions=tuple(str(a) for a in s["actions"]),
                voice=VoiceSettings(**s.get("voice", {})),
            )
            for s in doc["spirits"]
        )
        stars = tuple(_vec2(p, "star position") for p in doc["stars"])
        speeds = StyleSpeeds(**{k: float(v) for k, v in doc["style_speeds"].items()})
        refs = tuple(
            (_vec2(pair[0], "calibration raw"), _vec2(pair[1], "calibration virtual"))
            for pair in doc["calibration_refs"]
        )
        return ScenarioConfig(
            schema_version=version,
            playfield=playfield,
            layout=AreaLayout(areas),
            lanes=lanes,
            crosswalks=crosswalks,
            animation_catalog=catalog,
            spirits=spirits,
            stars=stars,
            star_target=int(doc["star_target"]),
            participant_start=_vec2(doc["participant_start"], "participant_start"),
            style_speeds=speeds,
            session_seconds=float(doc["session_seconds"]),
            calibration_refs=refs,
        )
    except ScenarioFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioFormatError(f"malformed scenario document: {exc}") from exc


def load_scenario(path: str | Path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(json.load(fh))


def default_scenario() -> ScenarioConfig:
    text = resources.files("starcross.data").joinpath("scenario_default.json").read_text("utf-8")
    return parse_scenario(json.loads(text))


def validate_scenario(config: ScenarioConfig) -> ValidationReport:
    """Check every scenario invariant; violations are data, not faults."""
    report = ValidationReport()

    if config.schema_version != SCHEMA_VERSION:
        report.add(
            "bad_schema_version",
            f"schema_version {config.schema_version} is not {SCHEMA_VERSION}",
        )

    areas = config.layout.sorted_areas()
    for i, a in enumerate(areas):
        for b in areas[i + 1 :]:
            if a.rect.interior_overlaps(b.rect):
                report.add(
                    "overlapping_areas",
                    f"areas {a.area_id} and {b.area_id} overlap",
                    a.area_id,
                    b.area_id,
                )
        r, p = a.rect, config.playfield
        if r.x0 < p.x0 or r.y0 < p.y0 or r.x1 > p.x1 or r.y1 > p.y1:
            report.add("area_out_of_bounds", f"area {a.area_id} leaves the playfield", a.area_id)

    covered = sum(a.rect.area for a in areas)
    if covered < config.playfield.area - COVERAGE_EPS:
        report.add(
            "coverage_gap",
            f"areas cover {covered:.3f} m2 of a {config.playfield.area:.3f} m2 playfield",
        )

    if len(config.layout.safe_ids()) < 2:
        report.add("too_few_safe_areas", "layout needs at least two safe zones")

    seen: set[str] = set()
    for spirit in config.spirits:
        if spirit.id in seen:
            report.add("duplicate_spirit_id", f"spirit id {spirit.id} appears twice", spirit.id)
        seen.add(spirit.id)
        for action in spirit.actions:
            if action not in config.animation_catalog:
                report.add(
                    "unknown_animation",
                    f"spirit {spirit.id} references unknown animation {action!r}",
                    spirit.id,
                    action,
                )

    mid = config.road_mid_y() if any(not a.is_safe for a in areas) else config.playfield.y1 / 2
    last_side: int | None = None
    for i, (x, y) in enumerate(config.stars):
        if not config.playfield.contains(x, y):
            report.add("star_out_of_bounds", f"star {i} at ({x}, {y}) leaves the playfield")
        side = 1 if y > mid else -1
        if last_side is not None and side == last_side:
            report.add("stars_not_alternating", f"stars {i - 1} and {i} sit on the same road side")
        last_side = side

    if config.star_target < 1 or config.star_target > len(config.stars):
        report.add(
            "bad_star_target",
            f"star_target {config.star_target} not in 1..{len(config.stars)}",
        )

    for style in DrivingStyle:
        if config.style_speeds.base(style) <= 0:
            report.add("bad_speed", f"style {style} has non-positive base speed", style.value)

    for spec in config.lanes:
        if spec.heading not in (-1, 1):
            report.add("bad_lane", f"lane {spec.lane} heading must be +1 or -1")

    if len(config.calibration_refs) < 2:
        report.add("bad_calibration_refs", "need at least two calibration reference pairs")

    return report
