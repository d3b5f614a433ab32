"""The evader's recursive strategies.

Level 1 is straight-line flight away from lion 1's start. Level n >= 2 chases
milestones placed along the level-(n-1) path while handling lion n with three
move kinds decided at each time of choice t_i = i*sigma_n:

* Free      — lion n is far; run straight at the current goal.
* Escape    — lion n is near but a separating-lines witness exists; run at the
              goal anyway (this provably increases the lion gap).
* Avoidance — run counterclockwise around the lion on the circle of radius r.

All committed paths are polygonal chains whose segments have the exact length
sigma_n*(1+eps_n); that length contract lives on the stored per-segment
displacement vectors (corner coordinates at O(1) magnitude cannot carry a
1e-12-relative statement about a 1e-5-long step).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2

from . import precision as pm
from .errors import DomainError, InvariantViolationError, SchedulingError
from .geometry import (
    Point2,
    arcs_intersect,
    ccw_leading_intersection,
    direction_arc,
    dist,
)
from .params import ParameterSet


class MoveKind(enum.Enum):
    FREE = 0
    ESCAPE = 1
    AVOIDANCE = 2

    @property
    def letter(self) -> str:
        return "FEA"[self.value]

    @classmethod
    def from_letter(cls, s: str) -> "MoveKind":
        return {"F": cls.FREE, "E": cls.ESCAPE, "A": cls.AVOIDANCE}[s]


# Snap tolerance for classifying a time as "exactly on" a clock grid: covers
# the rounding of index*period while staying far below one grid step.
GRID_SNAP_REL = Fraction(1, 10 ** 9)


def exact_ratio(x) -> Fraction:
    """The exact rational value of a float or MPFR scalar."""
    if type(x) is float:
        return Fraction(x)
    q = gmpy2.mpq(x)
    return Fraction(int(q.numerator), int(q.denominator))


def grid_index_at_or_before(t, period) -> int:
    """floor(t/period), snapping to the nearest integer when t sits within
    rounding distance of a grid point."""
    ratio = exact_ratio(t) / exact_ratio(period)
    near = round(ratio)
    if abs(ratio - near) <= GRID_SNAP_REL * max(1, abs(near)):
        return near
    return math.floor(ratio)


def next_milestone_index(t, period) -> int:
    """Index of the milestone strictly ahead of time t; exact multiples of the
    period advance to the next one."""
    return grid_index_at_or_before(t, period) + 1


@dataclass
class StrategyState:
    """Committed path of one strategy level (append-only)."""

    ps: ParameterSet
    corners: list = field(default_factory=list)   # Point2 at each time of choice
    kinds: list = field(default_factory=list)     # MoveKind per committed segment
    disps: list = field(default_factory=list)     # exact (dx, dy) per segment
    clock_index: int = 0
    flight_dir: tuple | None = None               # level 1 only: unit(m0 - l1(0))

    @property
    def level(self) -> int:
        return self.ps.level

    def committed_time(self):
        return self.clock_index * self.ps.sigma_n

    def heading(self) -> tuple | None:
        """Unit direction of the last committed segment, if any."""
        if not self.disps:
            return None
        dx, dy = self.disps[-1]
        step = self.ps.step_length()
        return (dx / step, dy / step)


def new_state(ps: ParameterSet, start: Point2, initial_lion: Point2 | None = None) -> StrategyState:
    if ps.level == 1:
        if initial_lion is None:
            raise DomainError("level 1 needs the lion's start to fix the flight direction")
        dx = start.x - initial_lion.x
        dy = start.y - initial_lion.y
        n = pm.hypot(dx, dy)
        if n == 0:
            raise DomainError("lion must not start on the man")
        return StrategyState(ps=ps, corners=[start], flight_dir=(dx / n, dy / n))
    return StrategyState(ps=ps, corners=[start])


def milestone_period(lower: StrategyState, ps: ParameterSet):
    """Spacing sigma_{n-1}/p of level-n milestone times on the lower path."""
    return lower.ps.sigma_n / ps.p


def milestone_time(lower: StrategyState, ps: ParameterSet, index: int):
    """Time of milestone `index`, bit-equal to the lower level's corner time
    whenever the milestone lands on a corner (index divisible by p)."""
    if index % ps.p == 0:
        return (index // ps.p) * lower.ps.sigma_n
    return index * milestone_period(lower, ps)


def evaluate(state: StrategyState, t) -> Point2:
    """Position on the committed polyline at time t (constant-speed segments)."""
    sigma = state.ps.sigma_n
    if t < 0:
        raise SchedulingError(f"negative time {t}")
    i = grid_index_at_or_before(t, sigma)
    snapped = i * sigma
    if exact_ratio(t) <= exact_ratio(snapped) or i >= state.clock_index:
        # On (or within rounding of) corner i, or past the last full segment.
        if i > state.clock_index:
            raise SchedulingError(
                f"t={t} beyond committed horizon {state.committed_time()} at level {state.level}"
            )
        if i == state.clock_index and exact_ratio(t) > exact_ratio(snapped):
            raise SchedulingError(
                f"t={t} beyond committed horizon {state.committed_time()} at level {state.level}"
            )
        return state.corners[i]
    frac = (t - snapped) / sigma
    if frac > 1:
        frac = frac / frac
    c = state.corners[i]
    dx, dy = state.disps[i]
    return Point2(c.x + dx * frac, c.y + dy * frac)


def milestone_goal(ps: ParameterSet, t, lower: StrategyState) -> Point2:
    """The goal point at time t: the lower-level position at the next
    milestone time strictly ahead of t (exact multiples advance)."""
    if ps.level < 2:
        raise DomainError("milestones exist only for levels >= 2")
    idx = next_milestone_index(t, milestone_period(lower, ps))
    return evaluate(lower, milestone_time(lower, ps, idx))


def _unit_toward(src: Point2, dst: Point2):
    dx = dst.x - src.x
    dy = dst.y - src.y
    n = pm.hypot(dx, dy)
    return dx / n, dy / n


def choose_direction(ps: ParameterSet, man: Point2, lion_n: Point2, goal: Point2,
                     prev_heading: tuple | None):
    """Decide the move kind and the exact unit direction for one step.

    Case order is strict priority: Free when the lion is at least
    r + sigma*(1+eps) away, else Escape when a separating-lines witness
    direction exists, else Avoidance.
    """
    sigma = ps.sigma_n
    step = ps.step_length()
    d = dist(man, lion_n)

    if d >= ps.r + step:
        if man.x == goal.x and man.y == goal.y:
            # standing exactly on the goal: deterministic arbitrary direction
            if prev_heading is not None:
                return MoveKind.FREE, prev_heading[0], prev_heading[1]
            one = sigma / sigma
            return MoveKind.FREE, one, one * 0
        ux, uy = _unit_toward(man, goal)
        return MoveKind.FREE, ux, uy

    if not (man.x == goal.x and man.y == goal.y):
        ux, uy = _unit_toward(man, goal)
        # witness feasibility over the exact step displacement b - man
        toward_man = direction_arc(Point2(man.x - lion_n.x, man.y - lion_n.y), ps.r - sigma)
        toward_goal = direction_arc(Point2(step * ux, step * uy), sigma)
        if arcs_intersect(toward_man, toward_goal):
            return MoveKind.ESCAPE, ux, uy

    try:
        q = ccw_leading_intersection(man, step, lion_n, ps.r)
    except DomainError as exc:
        raise InvariantViolationError(
            f"avoidance geometry unavailable (man-lion distance {d}); the "
            f"between-choices distance band must have broken upstream"
        ) from exc
    ux, uy = _unit_toward(man, q)
    return MoveKind.AVOIDANCE, ux, uy


def choose_move(ps: ParameterSet, man: Point2, lion_n: Point2, goal: Point2,
                prev_heading: tuple | None = None):
    """Public form of the per-step decision: (MoveKind, target point).

    The target is man + sigma*(1+eps) * u for the chosen unit direction u, so
    its distance from the man equals the step length exactly (the avoidance
    landing point is rescaled onto that length; it stays on the lion circle to
    machine rounding).
    """
    kind, ux, uy = choose_direction(ps, man, lion_n, goal, prev_heading)
    step = ps.step_length()
    return kind, Point2(man.x + step * ux, man.y + step * uy)


def commit_next(state: StrategyState, ps: ParameterSet, lions_at_t: list,
                lower: StrategyState | None, goal: Point2 | None = None) -> StrategyState:
    """Append the next corner, deciding from positions at the current time of
    choice only.

    ``lions_at_t`` are the lion positions at t_i = clock_index * sigma_n
    (lions 1..n; only lion n is consulted by the case analysis). For level 1,
    ``lower`` is None and the constant flight direction is used. The engine
    passes ``goal`` from its milestone bookkeeping; standalone callers may
    omit it and the milestone formula is applied to ``lower``.
    """
    step = ps.step_length()
    man = state.corners[-1]
    if ps.level == 1:
        ux, uy = state.flight_dir
        kind = MoveKind.FREE
    else:
        if goal is None:
            if lower is None:
                raise DomainError("levels >= 2 need the lower-level state")
            goal = milestone_goal(ps, state.committed_time(), lower)
        kind, ux, uy = choose_direction(ps, man, lions_at_t[ps.level - 1], goal,
                                        state.heading())
    dxy = (step * ux, step * uy)
    state.corners.append(Point2(man.x + dxy[0], man.y + dxy[1]))
    state.disps.append(dxy)
    state.kinds.append(kind)
    state.clock_index += 1
    return state


def truncation_bound(n: int, m: int, deltas) -> float:
    """Upper bound on the gap between the level-n and level-m paths:
    sum of delta_{n+1} .. delta_m from the active budget sequence
    (deltas[k-2] is the budget of level k)."""
    if not m > n >= 1:
        raise DomainError(f"need m > n >= 1, got n={n}, m={m}")
    deltas = list(deltas)
    if len(deltas) < m - 1:
        raise DomainError(f"delta sequence too short for level {m}")
    total = 0.0
    for k in range(n + 1, m + 1):
        total = total + deltas[k - 2]
    return total


def deltas_of(cascade) -> list:
    """The delta budget sequence recorded in a derived cascade."""
    return [ps.delta_n for ps in cascade[1:]]
