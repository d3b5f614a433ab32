"""Plug-in lion policies and start-point generators.

Policies see only the man's past; they are Lipschitz-1 (unit speed) by
construction, and scripted/replayed paths are validated for that at load time
rather than silently clamped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import precision as pm
from .errors import ConfigError, DomainError
from .geometry import Point2

STATIONARY = "Stationary"
PURE_PURSUIT = "PurePursuit"
GOAL_AMBUSH = "GoalAmbush"
SCRIPTED = "Scripted"
REPLAY = "Replay"

KINDS = (STATIONARY, PURE_PURSUIT, GOAL_AMBUSH, SCRIPTED, REPLAY)

SPEED_TOL = 1e-12


@dataclass(frozen=True)
class LionController:
    """One lion's policy. ``waypoints`` ((t, x, y) triples) apply to Scripted
    and Replay; ``goal_visibility`` applies to GoalAmbush (off, it degrades to
    PurePursuit)."""

    kind: str
    goal_visibility: bool = False
    waypoints: tuple[tuple[float, float, float], ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown controller kind {self.kind!r}")


def validate_waypoints(waypoints, start: Point2) -> tuple:
    """Check a scripted path: starts at (0, start), strictly increasing times,
    per-segment speed at most 1 (+1e-12). Returns the normalized tuple."""
    pts = tuple((float(t), float(x), float(y)) for t, x, y in waypoints)
    if not pts:
        raise ConfigError("scripted path needs at least one waypoint")
    t0, x0, y0 = pts[0]
    if t0 != 0.0:
        raise ConfigError(f"scripted path must start at t=0, got t={t0}")
    if x0 != start.x or y0 != start.y:
        raise ConfigError(
            f"scripted path starts at ({x0}, {y0}) but the lion starts at "
            f"({start.x}, {start.y})"
        )
    for (ta, xa, ya), (tb, xb, yb) in zip(pts, pts[1:]):
        if tb <= ta:
            raise ConfigError(f"waypoint times must increase strictly ({ta} -> {tb})")
        speed = math.hypot(xb - xa, yb - ya) / (tb - ta)
        if speed > 1.0 + SPEED_TOL:
            raise ConfigError(
                f"scripted segment t={ta}..{tb} implies speed {speed:.6f} > 1"
            )
    return pts


def script_position(waypoints, t, cursor: int = 0) -> tuple:
    """Position on a waypoint path at time t (holds the last point after the
    script ends) and the advanced segment cursor. Scalar-generic in t."""
    n = len(waypoints)
    while cursor + 1 < n and waypoints[cursor + 1][0] <= t:
        cursor += 1
    if cursor + 1 >= n:
        last = waypoints[-1]
        one = t * 0 + 1
        return last[1] * one, last[2] * one, cursor
    ta, xa, ya = waypoints[cursor]
    tb, xb, yb = waypoints[cursor + 1]
    frac = (t - ta) / (tb - ta)
    return xa + (xb - xa) * frac, ya + (yb - ya) * frac, cursor


def lion_step(ctrl: LionController, lion: Point2, man_past, t, h, goal: Point2 | None = None) -> Point2:
    """One sub-step: the lion's position at t+h given its position at t.

    ``man_past`` is a callable returning the man's position at times <= t.
    PurePursuit heads straight for man_past(t) at unit speed, landing on that
    point when it is within h. GoalAmbush does the same toward ``goal`` when
    it has goal visibility (and a goal is supplied), else it falls back to
    PurePursuit. Scripted/Replay positions come from the waypoint path alone.
    """
    if not h > 0:
        raise DomainError(f"sub-step must be positive, got {h}")
    kind = ctrl.kind
    if kind == STATIONARY:
        return lion
    if kind in (SCRIPTED, REPLAY):
        x, y, _ = script_position(ctrl.waypoints, t + h)
        return Point2(x, y)
    target = None
    if kind == GOAL_AMBUSH and ctrl.goal_visibility and goal is not None:
        target = goal
    if target is None:
        target = man_past(t)
    dx = target.x - lion.x
    dy = target.y - lion.y
    d = pm.sqrt(dx * dx + dy * dy)
    if d <= h:
        return Point2(target.x, target.y)
    return Point2(lion.x + h * dx / d, lion.y + h * dy / d)


def rational_grid_starts(radius, count: int, man_start: Point2) -> list[Point2]:
    """First ``count`` points of the deterministic enumeration of rational
    points (a/k, b/k) with norm <= radius: ordered by (k, a, b), duplicates of
    earlier denominators skipped, the man's start excluded exactly."""
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    if not radius > 0:
        raise DomainError(f"radius must be positive, got {radius}")
    r_sq = Fraction(radius) ** 2
    mx = Fraction(man_start.x)
    my = Fraction(man_start.y)
    out: list[Point2] = []
    k = 0
    while len(out) < count:
        k += 1
        bound = math.isqrt(math.floor(r_sq * k * k))
        for a in range(-bound, bound + 1):
            for b in range(-bound, bound + 1):
                if Fraction(a * a + b * b, k * k) > r_sq:
                    continue
                if math.gcd(a, b, k) > 1:
                    continue  # same point appeared at denominator k/gcd
                if Fraction(a, k) == mx and Fraction(b, k) == my:
                    continue
                out.append(Point2(a / k, b / k))
                if len(out) == count:
                    return out
    return out
