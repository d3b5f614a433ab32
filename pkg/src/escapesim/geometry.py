"""Planar primitives for the evasion strategy.

Everything here is scalar-generic: the functions accept float coordinates or
MPFR coordinates (extended mode) and compute in whichever type they are given.
The compiled kernels carry float-only twins of the hot subset.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import precision as pm
from .errors import DegenerateInputError, DomainError

TWO_PI = 2.0 * pm.pi_for(0.0)


@dataclass(frozen=True)
class Point2:
    """A point (or displacement) in the plane; coordinates must be finite."""

    x: float
    y: float

    def __post_init__(self):
        if not (pm.is_finite(self.x) and pm.is_finite(self.y)):
            raise DegenerateInputError(f"non-finite coordinates ({self.x}, {self.y})")


@dataclass(frozen=True)
class DirectionArc:
    """A closed arc of unit directions: all angles within half_width of center_angle.

    ``empty`` marks the empty set (center/width are then meaningless).
    A half_width of pi is the full circle.
    """

    center_angle: float
    half_width: float
    empty: bool = False


def dist(p: Point2, q: Point2):
    return pm.hypot(p.x - q.x, p.y - q.y)


def _clamp_unit(x):
    if x > 1:
        return type(x)(1)
    if x < -1:
        return type(x)(-1)
    return x


def _angle_around(center: Point2, p: Point2):
    return pm.atan2(p.y - center.y, p.x - center.x)


def circle_circle_intersection(c1: Point2, r1, c2: Point2, r2) -> tuple:
    """Intersection points of circles C(c1,r1) and C(c2,r2).

    Returns a tuple of 0, 1 (tangency), or 2 points, the pair ordered by angle
    around c2. Coordinates are computed in a frame centered on c2 to limit
    cancellation when the radii are many orders below the center magnitudes.
    """
    if r1 <= 0 or r2 <= 0:
        raise DegenerateInputError("circle radii must be positive")
    vx = c1.x - c2.x
    vy = c1.y - c2.y
    d = pm.hypot(vx, vy)
    if d == 0:
        raise DegenerateInputError("coincident circle centers")
    tol = 1e-12 * max(r1, r2, d)
    if d > r1 + r2 + tol or d < abs(r1 - r2) - tol:
        return ()
    # Radical line: foot sits at distance a from c2 along the center line.
    a = (d * d + r2 * r2 - r1 * r1) / (2 * d)
    h_sq = r2 * r2 - a * a
    ex = vx / d
    ey = vy / d
    if h_sq <= 0:
        # Tangent (within tol of touching): single point at the foot.
        return (Point2(c2.x + a * ex, c2.y + a * ey),)
    h = pm.sqrt(h_sq)
    p = Point2(c2.x + a * ex - h * ey, c2.y + a * ey + h * ex)
    q = Point2(c2.x + a * ex + h * ey, c2.y + a * ey - h * ex)
    if _angle_around(c2, p) <= _angle_around(c2, q):
        return (p, q)
    return (q, p)


def ccw_leading_intersection(man: Point2, step, lion: Point2, r) -> Point2:
    """The intersection point q of C(man, step) and C(lion, r) such that the
    counterclockwise arc on the lion circle from the other intersection point
    to q lies inside the man circle. Tangency returns the tangent point.

    The arc of the lion circle inside the man circle is the angular interval
    [b0-g, b0+g] around the direction b0 from lion to man, so q is simply the
    point at angle b0+g.
    """
    dx = man.x - lion.x
    dy = man.y - lion.y
    d = pm.hypot(dx, dy)
    if d == 0:
        raise DegenerateInputError("man coincides with lion center")
    tol = 1e-12 * max(r, step, d)
    if d > r + step + tol or d < abs(r - step) - tol:
        raise DomainError(
            f"circles C(man,{step}) and C(lion,{r}) at center distance {d} do not intersect"
        )
    cos_g = _clamp_unit((r * r + d * d - step * step) / (2 * r * d))
    g = pm.acos(cos_g)
    b0 = pm.atan2(dy, dx)
    ang = b0 + g
    return Point2(lion.x + r * pm.cos(ang), lion.y + r * pm.sin(ang))


def direction_arc(a: Point2, c) -> DirectionArc:
    """The set of unit directions u with <u, a> >= c.

    Empty if c > |a|; the full circle if c <= -|a|; otherwise the closed arc
    centered on a's angle with half-width arccos(c/|a|).
    """
    n = pm.hypot(a.x, a.y)
    if n == 0:
        raise DegenerateInputError("direction constraint with zero vector")
    if c > n:
        return DirectionArc(0.0, 0.0, empty=True)
    pi = pm.pi_for(n)
    center = pm.atan2(a.y, a.x)
    if center < 0:
        center = center + 2 * pi
    if c <= -n:
        return DirectionArc(center, pi)
    return DirectionArc(center, pm.acos(_clamp_unit(c / n)))


def arcs_intersect(s: DirectionArc, t: DirectionArc) -> bool:
    """Whether two closed direction arcs share at least one direction."""
    if s.empty or t.empty:
        return False
    pi = pm.pi_for(s.center_angle)
    two_pi = 2 * pi
    delta = (s.center_angle - t.center_angle) % two_pi
    if delta > pi:
        delta = two_pi - delta
    return delta <= s.half_width + t.half_width
