import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from escapesim.adversaries import (
    GOAL_AMBUSH,
    PURE_PURSUIT,
    SCRIPTED,
    STATIONARY,
    LionController,
    lion_step,
    rational_grid_starts,
    script_position,
    validate_waypoints,
)
from escapesim.errors import ConfigError, DomainError
from escapesim.geometry import Point2


def man_at(p):
    return lambda t: p


class TestLionStep:
    def test_pure_pursuit_unit_step(self):
        ctrl = LionController(PURE_PURSUIT)
        new = lion_step(ctrl, Point2(0, 0), man_at(Point2(3, 4)), 0.0, 1.0)
        assert (new.x, new.y) == (pytest.approx(0.6), pytest.approx(0.8))

    def test_pure_pursuit_lands_on_close_man(self):
        ctrl = LionController(PURE_PURSUIT)
        new = lion_step(ctrl, Point2(0, 0), man_at(Point2(0.5, 0)), 0.0, 1.0)
        assert (new.x, new.y) == (0.5, 0.0)

    def test_stationary_identity(self):
        ctrl = LionController(STATIONARY)
        new = lion_step(ctrl, Point2(2, -1), man_at(Point2(0, 0)), 5.0, 0.25)
        assert (new.x, new.y) == (2.0, -1.0)

    def test_goal_ambush_with_visibility_heads_for_goal(self):
        ctrl = LionController(GOAL_AMBUSH, goal_visibility=True)
        new = lion_step(ctrl, Point2(0, 0), man_at(Point2(0, 5)), 0.0, 1.0,
                        goal=Point2(10, 0))
        assert (new.x, new.y) == (1.0, 0.0)

    def test_goal_ambush_without_visibility_pursues(self):
        ctrl = LionController(GOAL_AMBUSH, goal_visibility=False)
        new = lion_step(ctrl, Point2(0, 0), man_at(Point2(0, 5)), 0.0, 1.0,
                        goal=Point2(10, 0))
        assert (new.x, new.y) == (0.0, 1.0)

    def test_scripted_follows_waypoints(self):
        wps = ((0.0, 0.0, 0.0), (1.0, 1.0, 0.0), (3.0, 1.0, 0.0))
        ctrl = LionController(SCRIPTED, waypoints=wps)
        new = lion_step(ctrl, Point2(0, 0), man_at(Point2(9, 9)), 0.0, 0.5)
        assert (new.x, new.y) == (0.5, 0.0)
        # past the end: parked at the final waypoint
        new = lion_step(ctrl, Point2(1, 0), man_at(Point2(9, 9)), 5.0, 1.0)
        assert (new.x, new.y) == (1.0, 0.0)

    def test_nonpositive_substep_rejected(self):
        with pytest.raises(DomainError):
            lion_step(LionController(STATIONARY), Point2(0, 0), man_at(Point2(1, 1)), 0.0, 0.0)

    @given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5),
           st.floats(0.01, 2.0))
    @settings(max_examples=200, deadline=None)
    def test_unit_speed_bound(self, lx, ly, mx, my, h):
        ctrl = LionController(PURE_PURSUIT)
        lion = Point2(lx, ly)
        new = lion_step(ctrl, lion, man_at(Point2(mx, my)), 0.0, h)
        assert math.dist((new.x, new.y), (lx, ly)) <= h * (1 + 1e-12)


class TestWaypointValidation:
    def test_overspeed_rejected_at_load(self):
        with pytest.raises(ConfigError):
            validate_waypoints([(0.0, 0.0, 0.0), (1.0, 1.5, 0.0)], Point2(0, 0))

    def test_must_start_at_lion_start(self):
        with pytest.raises(ConfigError):
            validate_waypoints([(0.0, 1.0, 0.0), (1.0, 1.5, 0.0)], Point2(0, 0))

    def test_times_strictly_increase(self):
        with pytest.raises(ConfigError):
            validate_waypoints([(0.0, 0.0, 0.0), (0.0, 0.0, 0.0)], Point2(0, 0))

    def test_valid_path_accepted(self):
        wps = validate_waypoints([(0, 0, 0), (2, 1, 1)], Point2(0, 0))
        assert wps == ((0.0, 0.0, 0.0), (2.0, 1.0, 1.0))

    def test_script_position_interpolates(self):
        wps = ((0.0, 0.0, 0.0), (2.0, 2.0, 0.0))
        x, y, _ = script_position(wps, 0.5)
        assert (x, y) == (0.5, 0.0)


class TestRationalGridStarts:
    def test_first_shell_lexicographic(self):
        pts = rational_grid_starts(1.0, 3, Point2(10, 10))
        assert [(p.x, p.y) for p in pts] == [(-1.0, 0.0), (0.0, -1.0), (0.0, 0.0)]

    def test_man_start_excluded_exactly(self):
        pts = rational_grid_starts(1.0, 3, Point2(0, 0))
        assert [(p.x, p.y) for p in pts] == [(-1.0, 0.0), (0.0, -1.0), (0.0, 1.0)]

    def test_every_point_differs_from_man_start(self):
        man = Point2(0.5, 0.5)
        for p in rational_grid_starts(2.0, 60, man):
            assert (p.x, p.y) != (man.x, man.y)

    def test_deterministic_and_duplicate_free(self):
        a = rational_grid_starts(1.5, 80, Point2(3, 3))
        b = rational_grid_starts(1.5, 80, Point2(3, 3))
        assert [(p.x, p.y) for p in a] == [(p.x, p.y) for p in b]
        seen = {(p.x, p.y) for p in a}
        assert len(seen) == 80
        for p in a:
            assert math.hypot(p.x, p.y) <= 1.5 + 1e-12
