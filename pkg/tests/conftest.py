from __future__ import annotations

import math

import pytest

from starcross.scenario import ScenarioConfig, default_scenario


@pytest.fixture(scope="session")
def scenario() -> ScenarioConfig:
    return default_scenario()


class StarWalkPolicy:
    """Walks straight toward the active star at a capped speed; no road sense."""

    def __init__(self, start, speed_mps: float = 2.4, tick_hz: int = 30) -> None:
        self.pos = [start[0], start[1]]
        self.step_m = speed_mps / tick_hz

    def next_position(self, star, vehicles=None) -> tuple[float, float]:
        if star is not None:
            dx, dy = star[0] - self.pos[0], star[1] - self.pos[1]
            dist = math.hypot(dx, dy)
            if dist > 1e-9:
                step = min(self.step_m, dist)
                self.pos[0] += dx / dist * step
                self.pos[1] += dy / dist * step
        return (self.pos[0], self.pos[1])


class WaitAndDashPolicy:
    """Waits on the sidewalk while a moving car is near, then dashes to the star.

    Good enough road sense to produce a mix of correct trials: it holds still
    whenever any vehicle is moving toward the crossing region, and it walks
    while vehicles are absent or waiting at the stop line.
    """

    def __init__(self, start, speed_mps: float = 2.4, tick_hz: int = 30,
                 road_y=(2.0, 6.0)) -> None:
        self.pos = [start[0], start[1]]
        self.step_m = speed_mps / tick_hz
        self.road_y = road_y

    def _danger(self, vehicles) -> bool:
        for v in vehicles:
            if v["mode"] == "waiting":
                continue
            if -8.0 < (v["pos"][0] - self.pos[0]) * v["heading"] * -1 < 14.0:
                return True
        return False

    def next_position(self, star, vehicles) -> tuple[float, float]:
        if star is None:
            return (self.pos[0], self.pos[1])
        on_road = self.road_y[0] < self.pos[1] < self.road_y[1]
        if not on_road and self._danger(vehicles):
            return (self.pos[0], self.pos[1])
        dx, dy = star[0] - self.pos[0], star[1] - self.pos[1]
        dist = math.hypot(dx, dy)
        if dist > 1e-9:
            step = min(self.step_m, dist)
            self.pos[0] += dx / dist * step
            self.pos[1] += dy / dist * step
        return (self.pos[0], self.pos[1])
