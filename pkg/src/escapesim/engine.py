"""Deterministic simulation loop.

Two families of clocks drive a run: decision clocks (one per strategy level,
period sigma_k) and milestone clocks (period sigma_{k-1}/p_k), plus the lion
sub-step grid (period sigma_n/K). Event times are always index*period — never
accumulated — and coincident times are constructed bit-equal, so ordering at
shared instants (lower-level commit, then milestone advance, then higher
commits, then lion steps, then the sample) is exact.

The level-n hot path (sub-steps, level-n commits, trace rows) runs inside a
kernel — compiled when available — between consecutive engine-level events;
everything rarer (lower-level commits, milestone bookkeeping) stays here.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from . import _pycore
from . import precision as pm
from .adversaries import (
    GOAL_AMBUSH,
    PURE_PURSUIT,
    REPLAY,
    SCRIPTED,
    STATIONARY,
    LionController,
    validate_waypoints,
)
from .errors import CausalityError, ConfigError, DomainError
from .geometry import Point2
from .params import ParameterSet, StartConfiguration, derive_cascade
from .strategy import (
    MoveKind,
    StrategyState,
    commit_next,
    evaluate,
    milestone_period,
    milestone_time,
    new_state,
)

_CTRL_CODE = {STATIONARY: 0, PURE_PURSUIT: 1, GOAL_AMBUSH: 2, SCRIPTED: 3, REPLAY: 3}


@dataclass(frozen=True)
class Horizon:
    """Run length: either a duration ("time") or a count of level-n canonical
    intervals ("intervals")."""

    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in ("time", "intervals"):
            raise ConfigError(f"horizon kind must be 'time' or 'intervals', got {self.kind!r}")
        if self.kind == "time" and self.value < 0:
            raise ConfigError("horizon time must be >= 0")
        if self.kind == "intervals" and (self.value < 0 or self.value != int(self.value)):
            raise ConfigError("horizon intervals must be a non-negative integer")


@dataclass(frozen=True)
class GameConfig:
    start: StartConfiguration
    level_n: int
    controllers: tuple[LionController, ...]
    horizon: Horizon
    substep_factor: int = 16
    precision_mode: str = pm.STANDARD
    delta_override: tuple[float, ...] | None = None
    record_levels: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.level_n < 1:
            raise ConfigError(f"strategy level must be >= 1, got {self.level_n}")
        if len(self.controllers) != len(self.start.lion_starts):
            raise ConfigError(
                f"{len(self.controllers)} controllers for "
                f"{len(self.start.lion_starts)} lions"
            )
        if len(self.start.lion_starts) < self.level_n:
            raise ConfigError(
                f"level {self.level_n} needs at least that many lions, got "
                f"{len(self.start.lion_starts)}"
            )
        if self.substep_factor < 1:
            raise ConfigError("substep_factor must be >= 1")
        if self.precision_mode not in (pm.STANDARD, pm.EXTENDED):
            raise ConfigError(f"unknown precision mode {self.precision_mode!r}")
        if self.horizon.kind == "intervals" and self.level_n == 1:
            raise ConfigError("canonical intervals are undefined at level 1; "
                              "use a time horizon")
        for i, ctrl in enumerate(self.controllers):
            if ctrl.kind in (SCRIPTED, REPLAY):
                if ctrl.waypoints is None:
                    raise ConfigError(f"lion {i + 1}: scripted controller needs waypoints")
                validate_waypoints(ctrl.waypoints, self.start.lion_starts[i])
        rec = self.recorded_levels()
        if any(k < 1 or k > self.level_n for k in rec):
            raise ConfigError(f"record_levels outside 1..{self.level_n}: {rec}")
        if len(set(rec)) != len(rec):
            raise ConfigError("record_levels must not repeat")

    def recorded_levels(self) -> tuple[int, ...]:
        if self.record_levels is None:
            return tuple(range(1, self.level_n + 1))
        return tuple(sorted(self.record_levels))


def config_to_dict(config: GameConfig) -> dict:
    """Canonical plain-data form (the parse_config fixed point)."""
    lions = []
    for start, ctrl in zip(config.start.lion_starts, config.controllers):
        c: dict = {"kind": ctrl.kind}
        if ctrl.kind == GOAL_AMBUSH:
            c["goal_visibility"] = ctrl.goal_visibility
        if ctrl.waypoints is not None:
            c["waypoints"] = [[t, x, y] for t, x, y in ctrl.waypoints]
        lions.append({"start": [start.x, start.y], "controller": c})
    doc = {
        "eps": config.start.eps,
        "man_start": [config.start.man_start.x, config.start.man_start.y],
        "lions": lions,
        "level": config.level_n,
        "horizon": {config.horizon.kind: config.horizon.value},
        "substep_factor": config.substep_factor,
        "precision": config.precision_mode,
    }
    if config.delta_override is not None:
        doc["delta_override"] = list(config.delta_override)
    if config.record_levels is not None:
        doc["record_levels"] = list(config.recorded_levels())
    return doc


def config_digest(config: GameConfig) -> str:
    text = json.dumps(config_to_dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


@dataclass(frozen=True)
class CaptureEvent:
    time: float
    lion_index: int
    sample_index: int


@dataclass(frozen=True)
class TraceSample:
    t: float
    man_per_level: dict
    move_kind: MoveKind
    goal: Point2
    lions: tuple


@dataclass
class Trace:
    """Recorded run: one row per event time, flat float64 columns."""

    t: np.ndarray
    man: dict                      # level -> (N, 2) array
    goal: np.ndarray               # (N, 2)
    move: np.ndarray               # (N,) int8, MoveKind codes
    lions: np.ndarray              # (N, L, 2)
    levels: tuple
    cascade: list
    config_digest: str
    capture: CaptureEvent | None = None
    states: dict = field(default_factory=dict, repr=False)  # level -> StrategyState

    def __len__(self) -> int:
        return len(self.t)

    @property
    def level_n(self) -> int:
        return self.cascade[-1].level

    @property
    def num_lions(self) -> int:
        return self.lions.shape[1]

    def sample(self, i: int) -> TraceSample:
        return TraceSample(
            t=float(self.t[i]),
            man_per_level={k: Point2(*self.man[k][i]) for k in self.levels},
            move_kind=MoveKind(int(self.move[i])),
            goal=Point2(*self.goal[i]),
            lions=tuple(Point2(*self.lions[i, j]) for j in range(self.num_lions)),
        )

    @property
    def samples(self):
        return (self.sample(i) for i in range(len(self)))

    def validate(self):
        """Structural invariants; raises AssertionError on breakage."""
        assert len(self.t) >= 1 and self.t[0] == 0.0
        assert np.all(np.diff(self.t) > 0), "sample times must strictly increase"
        for k in self.levels:
            assert self.man[k].shape == (len(self.t), 2)
        return self


def observe_lions(trace: Trace, t: float) -> list[Point2]:
    """Lion positions at time t, interpolated within the recorded rows.
    Querying beyond the trace's clock raises CausalityError."""
    times = trace.t
    if t > times[-1]:
        raise CausalityError(f"t={t} is beyond the simulation clock {times[-1]}")
    if t < times[0]:
        raise CausalityError(f"t={t} precedes the first sample")
    j = int(np.searchsorted(times, t, side="right")) - 1
    if times[j] == t or j == len(times) - 1:
        return [Point2(*trace.lions[j, i]) for i in range(trace.num_lions)]
    frac = (t - times[j]) / (times[j + 1] - times[j])
    pos = trace.lions[j] + (trace.lions[j + 1] - trace.lions[j]) * frac
    return [Point2(*pos[i]) for i in range(trace.num_lions)]


class _Clock:
    """Event stream with times index*period; when ``mult`` is set, every
    mult-th tick is emitted as index/mult * parent (bit-equal coincidence
    with the parent grid)."""

    __slots__ = ("rank", "index", "period", "mult", "parent", "fire")

    def __init__(self, rank, period, mult=None, parent=None, fire=None):
        self.rank = rank
        self.index = 0
        self.period = period
        self.mult = mult
        self.parent = parent
        self.fire = fire

    def time(self):
        if self.mult is not None:
            q, rem = divmod(self.index, self.mult)
            if rem == 0:
                return q * self.parent
        return self.index * self.period


def _estimate_rows(end_time, h, clocks) -> int:
    end = pm.to_float(end_time)
    total = int(end / pm.to_float(h)) + 8
    for c in clocks:
        total += int(end / pm.to_float(c.period)) + 2
    return total


def run(config: GameConfig) -> Trace:
    """Simulate one game; returns the Trace (aborted early on capture)."""
    mode = config.precision_mode
    pm.setup_mode(mode)
    n = config.level_n
    cascade = derive_cascade(config.start, n, mode, config.delta_override)
    ps_n = cascade[-1]
    lift = lambda x: pm.from_float(float(x), mode)

    man0 = Point2(lift(config.start.man_start.x), lift(config.start.man_start.y))
    lion0 = [Point2(lift(s.x), lift(s.y)) for s in config.start.lion_starts]
    nlions = len(lion0)

    # strategy states for every level (level n's commits happen in the kernel,
    # but its state object is reconstructed from kernel output at the end)
    states = {1: new_state(cascade[0], man0, lion0[0])}
    for k in range(2, n + 1):
        states[k] = new_state(cascade[k - 1], man0)

    rec_levels = config.recorded_levels()
    slot_of = {k: i for i, k in enumerate(rec_levels)}
    top_slot = slot_of.get(n, -1)

    backend = _pycore if mode == pm.EXTENDED else _backend.active()

    # controller encoding
    kinds = []
    scripts = []
    for i, ctrl in enumerate(config.controllers):
        code = _CTRL_CODE[ctrl.kind]
        if ctrl.kind == GOAL_AMBUSH and not ctrl.goal_visibility:
            code = 1  # no goal visibility: falls back to pure pursuit
        kinds.append(code)
        if code == 3:
            wps = tuple((lift(t), lift(x), lift(y)) for t, x, y in ctrl.waypoints)
            scripts.append(wps)
        else:
            scripts.append(None)

    sigma_n = ps_n.sigma_n
    K = config.substep_factor
    h = sigma_n / K
    capture_eps = 1e-12 * config.start.max_coordinate()

    # engine-level clocks: decision clocks for k < n, milestone clocks for 2..n
    clocks = []
    goals: dict[int, Point2] = {}

    def make_choice_handler(k):
        def fire(T):
            lions_now = [Point2(x, y) for x, y in backend.get_lion_positions(kstate, T)]
            commit_next(states[k], cascade[k - 1], lions_now,
                        states[k - 1] if k > 1 else None,
                        goal=goals.get(k))
            if k in slot_of:
                st = states[k]
                corner = st.corners[-2]
                dx, dy = st.disps[-1]
                sg = cascade[k - 1].sigma_n
                backend.set_level_segment(kstate, slot_of[k], corner.x, corner.y,
                                          T, dx / sg, dy / sg)
        return fire

    def make_ms_handler(k):
        def fire(T):
            c = ms_clocks[k]
            tm = milestone_time(states[k - 1], cascade[k - 1], c.index + 1)
            g = evaluate(states[k - 1], tm)
            goals[k] = g
            if k == n:
                backend.set_goal(kstate, g.x, g.y)
        return fire

    ms_clocks = {}
    for k in range(1, n):
        clocks.append(_Clock(rank=2 * (k - 1), period=cascade[k - 1].sigma_n,
                             fire=make_choice_handler(k)))
    for k in range(2, n + 1):
        ps_k = cascade[k - 1]
        c = _Clock(rank=2 * k - 3, period=milestone_period(states[k - 1], ps_k),
                   mult=ps_k.p, parent=cascade[k - 2].sigma_n, fire=make_ms_handler(k))
        ms_clocks[k] = c
        clocks.append(c)
    clocks.sort(key=lambda c: c.rank)

    if config.horizon.kind == "time":
        end_time = lift(config.horizon.value)
    else:
        end_time = milestone_time(states[n - 1], ps_n, int(config.horizon.value))

    # trace buffers
    cap_rows = _estimate_rows(end_time, h, clocks) if pm.to_float(end_time) > 0 else 16
    R = len(rec_levels)
    t_out = np.empty(cap_rows)
    man_out = np.empty((cap_rows, R, 2))
    goal_out = np.empty((cap_rows, 2))
    move_out = np.empty(cap_rows, dtype=np.int8)
    lions_out = np.empty((cap_rows, nlions, 2))

    flight = states[1].flight_dir if n == 1 else None
    kstate = backend.make_state(
        sigma_n, K, ps_n.step_length(), ps_n.r if ps_n.r is not None else lift(0.0),
        capture_eps, man0.x, man0.y,
        [p.x for p in lion0], [p.y for p in lion0], kinds, scripts,
        n - 1, R, top_slot, t_out, man_out, goal_out, move_out, lions_out,
        flight_dir=flight)

    m_next = 0
    captured = False

    def grow():
        nonlocal t_out, man_out, goal_out, move_out, lions_out, cap_rows
        cap_rows = cap_rows * 2
        t_out = np.resize(t_out, cap_rows)
        man_out = np.resize(man_out, (cap_rows, R, 2))
        goal_out = np.resize(goal_out, (cap_rows, 2))
        move_out = np.resize(move_out, cap_rows)
        lions_out = np.resize(lions_out, (cap_rows, nlions, 2))
        backend.set_buffers(kstate, t_out, man_out, goal_out, move_out, lions_out)

    def advance_to(T):
        nonlocal m_next, captured
        while True:
            status, m_next = backend.advance_until(kstate, m_next, T)
            if status == _pycore.ROWS_FULL:
                grow()
                continue
            captured = status == _pycore.CAPTURE
            return

    def handle_event(T):
        nonlocal m_next, captured
        while True:
            status, m_next = backend.process_event_time(kstate, m_next, T)
            if status == _pycore.ROWS_FULL:
                grow()
                continue
            captured = status == _pycore.CAPTURE
            return

    last_event_t = None
    while not captured and clocks:
        T = min(c.time() for c in clocks)
        if T > end_time:
            break
        advance_to(T)
        if captured:
            break
        for c in clocks:  # already rank-sorted
            if c.time() == T:
                c.fire(T)
                c.index += 1
        handle_event(T)
        last_event_t = T

    if not captured and (last_event_t is None or last_event_t < end_time):
        advance_to(end_time)
        if not captured:
            handle_event(end_time)

    rows = backend.row_count(kstate)
    man_cols = {k: np.ascontiguousarray(man_out[:rows, slot_of[k], :]) for k in rec_levels}
    cap_info = backend.capture_info(kstate)
    capture = CaptureEvent(*cap_info) if cap_info is not None else None

    # rebuild the level-n strategy state from the kernel's committed path
    corners, kcodes, disps = backend.committed_path(kstate)
    top = states[n]
    top.corners = [Point2(x, y) for x, y in corners]
    top.kinds = [MoveKind(c) for c in kcodes]
    top.disps = list(disps)
    top.clock_index = len(top.corners) - 1

    trace = Trace(
        t=np.ascontiguousarray(t_out[:rows]),
        man=man_cols,
        goal=np.ascontiguousarray(goal_out[:rows]),
        move=np.ascontiguousarray(move_out[:rows]),
        lions=np.ascontiguousarray(lions_out[:rows]),
        levels=rec_levels,
        cascade=cascade,
        config_digest=config_digest(config),
        capture=capture,
        states=states,
    )
    return trace.validate()
