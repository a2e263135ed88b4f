"""Node motion inside the square cluster area.

Two models: random waypoint with zero pause time (the default roaming
behavior) and parallel-path lanes (targets marching along fixed headings
with boundary reflection, for trajectory experiments).  Steps are pure
state transitions driven by an explicit per-node random stream.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from sectrack.geometry import Position


class MobilityKind(enum.Enum):
    RANDOM_WAYPOINT = "random_waypoint"
    PARALLEL_PATH = "parallel_path"


@dataclass(frozen=True)
class MobilityState:
    position: Position
    velocity: tuple[float, float] = (0.0, 0.0)
    waypoint: Position = Position(0.0, 0.0)
    v_min: float = 0.0
    v_max: float = 0.0
    kind: MobilityKind = MobilityKind.RANDOM_WAYPOINT
    lane_index: int = 0
    lane_spacing: float = 0.0
    heading: float = 0.0

    @property
    def speed(self) -> float:
        return math.hypot(*self.velocity)


def make_random_waypoint(
    position: Position, v_min: float, v_max: float, area: float, rng: np.random.Generator
) -> MobilityState:
    """Roaming state with the first waypoint and speed already drawn."""
    if v_min > v_max:
        raise ValueError("v_min must not exceed v_max")
    state = MobilityState(
        position=position, v_min=v_min, v_max=v_max, kind=MobilityKind.RANDOM_WAYPOINT
    )
    if v_max == 0.0:
        return replace(state, waypoint=position)
    return _retarget(state, area, rng)


def make_parallel_path(
    position: Position,
    speed: float,
    heading: float,
    lane_index: int,
    lane_spacing: float,
) -> MobilityState:
    vx = speed * math.cos(math.radians(heading))
    vy = speed * math.sin(math.radians(heading))
    return MobilityState(
        position=position,
        velocity=(vx, vy),
        waypoint=position,
        v_min=speed,
        v_max=speed,
        kind=MobilityKind.PARALLEL_PATH,
        lane_index=lane_index,
        lane_spacing=lane_spacing,
        heading=heading,
    )


def _retarget(state: MobilityState, area: float, rng: np.random.Generator) -> MobilityState:
    waypoint = Position(rng.uniform(0.0, area), rng.uniform(0.0, area))
    speed = rng.uniform(state.v_min, state.v_max)
    dx = waypoint[0] - state.position[0]
    dy = waypoint[1] - state.position[1]
    d = math.hypot(dx, dy)
    if d == 0.0 or speed == 0.0:
        return replace(state, waypoint=waypoint, velocity=(0.0, 0.0))
    return replace(state, waypoint=waypoint, velocity=(speed * dx / d, speed * dy / d))


def _step_waypoint(
    state: MobilityState, dt: float, area: float, rng: np.random.Generator
) -> MobilityState:
    remaining = dt
    while remaining > 0.0:
        speed = state.speed
        if speed == 0.0:
            if state.v_max == 0.0:
                return state  # stationary node
            state = _retarget(state, area, rng)
            continue
        leg = math.hypot(
            state.waypoint[0] - state.position[0], state.waypoint[1] - state.position[1]
        )
        travel = speed * remaining
        if travel < leg:
            f = travel / leg
            pos = Position(
                state.position[0] + f * (state.waypoint[0] - state.position[0]),
                state.position[1] + f * (state.waypoint[1] - state.position[1]),
            )
            return replace(state, position=pos)
        # Arrive, then keep moving toward a fresh waypoint with the leftover time.
        remaining -= leg / speed
        state = _retarget(replace(state, position=state.waypoint), area, rng)
    return state


def _fold(coord: float, lo: float, hi: float) -> tuple[float, float]:
    """Reflect a coordinate into [lo, hi]; returns (coordinate, sign flip)."""
    span = hi - lo
    m = (coord - lo) % (2.0 * span)
    if m <= span:
        return lo + m, 1.0
    return lo + 2.0 * span - m, -1.0


def _step_parallel(state: MobilityState, dt: float, area: float) -> MobilityState:
    x, sx = _fold(state.position[0] + state.velocity[0] * dt, 0.0, area)
    y, sy = _fold(state.position[1] + state.velocity[1] * dt, 0.0, area)
    return replace(
        state,
        position=Position(x, y),
        velocity=(sx * state.velocity[0], sy * state.velocity[1]),
    )


def step(
    state: MobilityState, dt: float, area: float, rng: np.random.Generator
) -> MobilityState:
    """Advance one node by dt seconds; positions never leave [0, area]^2."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if state.kind is MobilityKind.PARALLEL_PATH:
        return _step_parallel(state, dt, area)
    return _step_waypoint(state, dt, area, rng)
