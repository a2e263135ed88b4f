"""Random-waypoint and parallel-path motion."""

from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from sectrack.geometry import Position
from sectrack.mobility import (
    MobilityKind,
    make_parallel_path,
    make_random_waypoint,
    step,
)


class TestRandomWaypoint:
    def test_straight_leg_kinematics(self):
        rng = np.random.default_rng(1)
        state = make_random_waypoint(Position(0, 0), 10.0, 10.0, 1000.0, rng)
        # aim at a known waypoint 100 m away
        state = replace(state, waypoint=Position(100.0, 0.0), velocity=(10.0, 0.0))
        moved = step(state, 5.0, 1000.0, rng)
        assert moved.position == pytest.approx((50.0, 0.0))

    def test_positions_stay_inside_area(self):
        rng = np.random.default_rng(2)
        area = 200.0
        state = make_random_waypoint(Position(100, 100), 1.0, 20.0, area, rng)
        for _ in range(10_000):
            state = step(state, 1.0, area, rng)
            assert 0.0 <= state.position.x <= area
            assert 0.0 <= state.position.y <= area

    def test_speed_within_bounds_en_route(self):
        rng = np.random.default_rng(3)
        state = make_random_waypoint(Position(50, 50), 2.0, 8.0, 400.0, rng)
        for _ in range(2000):
            state = step(state, 0.5, 400.0, rng)
            assert 2.0 - 1e-9 <= state.speed <= 8.0 + 1e-9

    def test_deterministic_trajectory(self):
        a = make_random_waypoint(Position(10, 10), 1.0, 5.0, 300.0, np.random.default_rng(7))
        b = make_random_waypoint(Position(10, 10), 1.0, 5.0, 300.0, np.random.default_rng(7))
        ra, rb = np.random.default_rng(8), np.random.default_rng(8)
        for _ in range(500):
            a = step(a, 1.0, 300.0, ra)
            b = step(b, 1.0, 300.0, rb)
            assert a.position == b.position

    def test_zero_speed_is_stationary(self):
        rng = np.random.default_rng(9)
        state = make_random_waypoint(Position(42, 24), 0.0, 0.0, 100.0, rng)
        for _ in range(50):
            state = step(state, 2.0, 100.0, rng)
        assert state.position == Position(42, 24)


class TestParallelPath:
    def test_lanes_stay_parallel_and_spaced(self):
        rng = np.random.default_rng(5)
        area = 400.0
        spacing = 40.0
        lanes = [
            make_parallel_path(Position(40.0, 140.0 + k * spacing), 6.0, 0.0, k, spacing)
            for k in range(4)
        ]
        for _ in range(500):
            lanes = [step(s, 1.0, area, rng) for s in lanes]
            ys = [s.position.y for s in lanes]
            for i in range(4):
                for j in range(i + 1, 4):
                    assert abs(ys[j] - ys[i]) == pytest.approx((j - i) * spacing)

    def test_reflection_at_boundary(self):
        state = make_parallel_path(Position(390.0, 200.0), 10.0, 0.0, 0, 0.0)
        moved = step(state, 2.0, 400.0, np.random.default_rng(0))
        assert moved.position.x == pytest.approx(390.0)  # 390 -> 400 -> 390
        assert moved.velocity[0] == pytest.approx(-10.0)
        assert moved.position.y == 200.0

    def test_kind_tag(self):
        s = make_parallel_path(Position(0, 0), 1.0, 90.0, 2, 30.0)
        assert s.kind is MobilityKind.PARALLEL_PATH
        assert s.lane_index == 2
