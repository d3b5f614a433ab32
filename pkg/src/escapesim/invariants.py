"""Trace checkers: the strategy's guarantees as machine-verifiable verdicts.

Every checker is a pure function of (trace, cascade): times of choice and
canonical-interval boundaries are reconstructed arithmetically from the
cascade (bit-exact, because event times are index*period and the CSV format
round-trips doubles), so an in-memory trace and its CSV read-back yield
identical verdicts.

Continuous-time claims are checked at sample resolution with the additive
slack s = (2+eps_n) * (max sample spacing), which bounds how much any
man-lion distance can change between samples given both speed caps; 1e-12
absolute covers arithmetic rounding on top.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import Point2
from .strategy import MoveKind, truncation_bound
from .verdicts import Verdict, combine

ABS_TOL = 1e-12
GOAL_REACH_REL = 1e-9


@dataclass(frozen=True)
class CanonicalInterval:
    """One goal interval of the top level: span [start, end) with a constant
    goal (the lower-level position at the span's end)."""

    index: int
    span: tuple
    goal: Point2


def sampling_slack(trace, ps_n) -> float:
    if len(trace.t) < 2:
        return 0.0
    spacing = float(np.max(np.diff(trace.t)))
    return (2 + float(ps_n.eps_n)) * spacing


def choice_sample_indices(trace, ps_n) -> np.ndarray:
    """Indices of samples lying exactly on the decision grid i*sigma_n."""
    sigma = float(ps_n.sigma_n)
    i = np.round(trace.t / sigma)
    return np.nonzero(trace.t == i * sigma)[0]


def boundary_times(trace, cascade) -> np.ndarray:
    """Milestone-boundary times of the top level up to the trace end,
    reproducing the engine's bit-exact coincidence rule."""
    ps_n = cascade[-1]
    lower_sigma = float(cascade[-2].sigma_n)
    p = ps_n.p
    period = lower_sigma / p
    t_end = float(trace.t[-1])
    out = []
    j = 0
    while True:
        t = (j // p) * lower_sigma if j % p == 0 else j * period
        if t > t_end:
            break
        out.append(t)
        j += 1
    return np.asarray(out)


def canonical_intervals(trace, cascade) -> list[CanonicalInterval]:
    bts = boundary_times(trace, cascade)
    out = []
    idx = np.searchsorted(trace.t, bts, side="left")
    for k, b in enumerate(bts):
        end = bts[k + 1] if k + 1 < len(bts) else None
        j = idx[k]
        goal = Point2(float(trace.goal[j, 0]), float(trace.goal[j, 1]))
        out.append(CanonicalInterval(index=k, span=(float(b), end and float(end)), goal=goal))
    return out


def _dist_cols(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = a - b
    return np.sqrt(d[:, 0] ** 2 + d[:, 1] ** 2)


def _first_time(trace, mask_idx) -> float | None:
    return float(trace.t[mask_idx[0]]) if len(mask_idx) else None


def _goal_changed_per_sample(trace) -> np.ndarray:
    """goal_changed[k] is True when sample k's goal differs from sample k-1's."""
    g = trace.goal
    ch = np.zeros(len(g), dtype=bool)
    ch[1:] = (g[1:] != g[:-1]).any(axis=1)
    return ch


def check_safety(trace, cascade) -> Verdict:
    """Distance bands around the avoided lion plus the capture margin c_i/2
    against every lion the strategy level covers."""
    ps = cascade[-1]
    n = trace.level_n
    man = trace.man[n]
    s = sampling_slack(trace, ps)
    findings = []

    mins = []
    for i in range(1, n + 1):
        c_i = float(cascade[i - 1].c_n)
        d_i = _dist_cols(man, trace.lions[:, i - 1])
        bound = c_i / 2 - s
        bad = np.nonzero(~(d_i > bound))[0]
        margin = float(d_i.min() - bound)
        mins.append(f"min|M{n}-l{i}|={d_i.min():.6e} vs c_{i}/2={c_i / 2:.6e}")
        findings.append((_first_time(trace, bad), margin, ""))

    if n >= 2:
        r = float(ps.r)
        sigma = float(ps.sigma_n)
        eps = float(ps.eps_n)
        d_n = _dist_cols(man, trace.lions[:, n - 1])
        ci = choice_sample_indices(trace, ps)
        moves = trace.move[ci]

        lo_a = r - sigma - ABS_TOL
        bad = ci[~(d_n[ci] >= lo_a)]
        findings.append((_first_time(trace, bad), float(d_n[ci].min() - lo_a),
                         "choice-time lower band"))

        after_avoid = ci[1:][moves[:-1] == MoveKind.AVOIDANCE.value]
        if len(after_avoid):
            hi_b = r + sigma + ABS_TOL
            bad = after_avoid[~(d_n[after_avoid] <= hi_b)]
            findings.append((_first_time(trace, bad),
                             float(hi_b - d_n[after_avoid].max()), "post-avoidance upper band"))

        lo_d = r - (3 + eps) * sigma - s
        bad = np.nonzero(~(d_n >= lo_d))[0]
        findings.append((_first_time(trace, bad), float(d_n.min() - lo_d),
                         "between-choices lower band"))

        avoid_rows = np.nonzero(trace.move == MoveKind.AVOIDANCE.value)[0]
        if len(avoid_rows):
            hi_d = r + (3 + eps) * sigma + s
            bad = avoid_rows[~(d_n[avoid_rows] <= hi_d)]
            findings.append((_first_time(trace, bad),
                             float(hi_d - d_n[avoid_rows].max()), "avoidance upper band"))

    d_disk = min(float(cascade[i - 1].c_n) / 2 for i in range(1, n + 1))
    findings.append((None, math.inf, f"d_{n}={d_disk:.6e}; " + "; ".join(mins)))
    if trace.capture is not None:
        findings.append((trace.capture.time, -math.inf,
                         f"capture by lion {trace.capture.lion_index}"))
    return combine("safety", findings)


def check_move_grammar(trace) -> Verdict:
    """Avoidance is never followed by Free, and after an Escape no Avoidance
    occurs until the goal is reached or changes (exact discrete check)."""
    ps = trace.cascade[-1]
    if trace.level_n < 2:
        return Verdict("move-grammar", True, None, math.inf, "level 1: no move cases")
    ci = choice_sample_indices(trace, ps)
    moves = trace.move[ci].astype(np.int64)
    t_c = trace.t[ci]
    step = float(ps.step_length())
    reach_tol = GOAL_REACH_REL * step
    man = trace.man[trace.level_n]
    findings = []

    a_then_f = np.nonzero((moves[:-1] == 2) & (moves[1:] == 0))[0]
    findings.append((float(t_c[a_then_f[0] + 1]) if len(a_then_f) else None,
                     math.inf if not len(a_then_f) else -1.0,
                     "avoidance->free transition" if len(a_then_f) else ""))

    # per choice segment k (from choice k to k+1): did the goal change, and
    # did the man reach the goal (corner proximity or segment pass-over)?
    changed = _goal_changed_per_sample(trace)
    cum = np.cumsum(changed)
    goal_change_seg = cum[np.minimum(ci[1:], len(cum) - 1)] - cum[ci[:-1]] > 0

    corners = man[ci]
    goals = trace.goal[ci]
    a = corners[:-1]
    b = corners[1:]
    g = goals[:-1]
    ab = b - a
    ag = g - a
    denom = (ab ** 2).sum(axis=1)
    tproj = np.clip(np.divide((ag * ab).sum(axis=1), denom, out=np.zeros_like(denom),
                              where=denom > 0), 0.0, 1.0)
    closest = a + ab * tproj[:, None]
    seg_dist = np.sqrt(((g - closest) ** 2).sum(axis=1))
    corner_dist = np.sqrt((ag ** 2).sum(axis=1))
    reached_seg = (seg_dist <= reach_tol) | (corner_dist <= reach_tol)

    last_e = np.maximum.accumulate(np.where(moves == 1, np.arange(len(moves)), -1))
    disarm = np.zeros(len(moves), dtype=bool)
    disarm[:-1] = reached_seg | goal_change_seg
    last_d = np.maximum.accumulate(np.where(disarm, np.arange(len(moves)), -1))
    armed_before = np.zeros(len(moves), dtype=bool)
    armed_before[1:] = last_e[:-1] > last_d[:-1]
    bad = np.nonzero(armed_before & (moves == 2))[0]
    findings.append((float(t_c[bad[0]]) if len(bad) else None,
                     -1.0 if len(bad) else math.inf,
                     "avoidance while an escape was pending" if len(bad) else ""))
    return combine("move-grammar", findings)


def check_avoidance_duration(trace, cascade) -> Verdict:
    """From every avoidance move, one of {goal change, |m-g| < rho',
    escape move} occurs within tau (plus one decision step of grid grace)."""
    ps = cascade[-1]
    if trace.level_n < 2:
        return Verdict("avoidance-duration", True, None, math.inf, "level 1: no avoidance")
    ci = choice_sample_indices(trace, ps)
    moves = trace.move[ci].astype(np.int64)
    t_c = trace.t[ci]
    tau = float(ps.tau)
    sigma = float(ps.sigma_n)
    rho_p = float(ps.rho_prime)
    man = trace.man[trace.level_n]

    avoid = np.nonzero(moves == 2)[0]
    if not len(avoid):
        return Verdict("avoidance-duration", True, None, math.inf,
                       "no avoidance moves (vacuous)")

    # longest maximal run of avoidance labels, for the report
    runs = np.split(avoid, np.nonzero(np.diff(avoid) > 1)[0] + 1)
    max_run = max(len(rn) for rn in runs)

    inf = math.inf
    esc_times = t_c[moves == 1]
    changed = _goal_changed_per_sample(trace)
    change_times = trace.t[changed]
    near = _dist_cols(man, trace.goal) < rho_p
    near_times = trace.t[near]

    deadline = t_c[avoid] + tau + sigma + ABS_TOL
    t_end = float(trace.t[-1])

    def next_at_or_after(times, anchors):
        if not len(times):
            return np.full(len(anchors), inf)
        j = np.searchsorted(times, anchors, side="left")
        out = np.full(len(anchors), inf)
        ok = j < len(times)
        out[ok] = times[j[ok]]
        return out

    ev = np.minimum(next_at_or_after(esc_times, t_c[avoid]),
                    np.minimum(next_at_or_after(change_times, t_c[avoid]),
                               next_at_or_after(near_times, t_c[avoid])))
    decidable = deadline <= t_end + ABS_TOL
    bad = np.nonzero(decidable & ~(ev <= deadline))[0]
    margin = float(np.min(deadline - ev)) if len(ev) else inf
    t_viol = float(t_c[avoid[bad[0]]]) if len(bad) else None
    return Verdict("avoidance-duration", t_viol is None, t_viol, margin,
                   f"max avoidance run {max_run} steps "
                   f"(ceil(tau/sigma)+1 = {math.ceil(tau / sigma) + 1}); "
                   f"{len(avoid)} avoidance moves")


def check_goal_adherence(trace, cascade) -> Verdict:
    """Per canonical interval: stays near the goal once it got near (a), stays
    inside the tube around the lower-level segment (b), and ends the interval
    near the segment endpoint (c)."""
    ps = cascade[-1]
    if trace.level_n < 2:
        return Verdict("goal-adherence", True, None, math.inf, "level 1: no goals")
    n = trace.level_n
    if n - 1 not in trace.man or n not in trace.man:
        raise DomainError("goal adherence needs levels n-1 and n recorded")
    s = sampling_slack(trace, ps)
    tau = float(ps.tau)
    eps = float(ps.eps_n)
    rho_p = float(ps.rho_prime)
    stay_bound = rho_p + (1 + eps) * tau + s
    tube_bound = rho_p + 2 * (1 + eps) * tau + s
    man = trace.man[n]
    lower = trace.man[n - 1]
    bts = boundary_times(trace, cascade)
    b_idx = np.searchsorted(trace.t, bts, side="left")
    lower_seg_len = (1 + float(cascade[-2].eps_n)) * float(cascade[-2].sigma_n) / ps.p
    findings = []

    for k in range(len(bts)):
        i0 = b_idx[k]
        complete = k + 1 < len(bts)
        i1 = b_idx[k + 1] if complete else len(trace.t) - 1
        if i1 <= i0:
            continue
        sl = slice(i0, i1 + 1)
        g = trace.goal[i0]
        dg = _dist_cols(man[sl], g[None, :].repeat(i1 + 1 - i0, axis=0))
        near = np.nonzero(dg <= rho_p)[0]
        if len(near):
            tail = dg[near[0]:]
            bad = np.nonzero(~(tail <= stay_bound))[0]
            findings.append((
                float(trace.t[i0 + near[0] + bad[0]]) if len(bad) else None,
                float(stay_bound - tail.max()),
                "" if not len(bad) else f"interval {k}: left the goal disk"))

        a_pt = lower[i0]
        b_pt = lower[i1]
        if not complete:
            d_ab = b_pt - a_pt
            nrm = math.hypot(*d_ab)
            if nrm > 0:
                b_pt = a_pt + d_ab / nrm * lower_seg_len
        ab = b_pt - a_pt
        denom = float((ab ** 2).sum())
        rel = man[sl] - a_pt
        tproj = np.clip((rel @ ab) / denom, 0.0, 1.0) if denom > 0 else np.zeros(i1 + 1 - i0)
        seg_d = np.sqrt(((rel - tproj[:, None] * ab) ** 2).sum(axis=1))
        bad = np.nonzero(~(seg_d <= tube_bound))[0]
        findings.append((float(trace.t[i0 + bad[0]]) if len(bad) else None,
                         float(tube_bound - seg_d.max()),
                         "" if not len(bad) else f"interval {k}: left the segment tube"))

        if complete:
            d_end = float(np.hypot(*(man[i1] - lower[i1])))
            findings.append((float(trace.t[i1]) if d_end > stay_bound else None,
                             stay_bound - d_end,
                             "" if d_end <= stay_bound else f"interval {k}: far endpoint"))
    if not findings:
        findings.append((None, math.inf, "no complete interval"))
    return combine("goal-adherence", findings)


def check_deviation(trace, cascade, pair: tuple[int, int] | None = None) -> Verdict:
    """Pointwise gap between two recorded levels stays within the higher
    level's deviation budget."""
    ps = cascade[-1]
    a, b = pair if pair is not None else (trace.level_n - 1, trace.level_n)
    if a < 1 or b <= a:
        raise DomainError(f"bad level pair ({a}, {b})")
    if a not in trace.man or b not in trace.man:
        raise DomainError(f"levels {a} and {b} must both be recorded")
    delta_b = float(cascade[b - 1].delta_n)
    bound = delta_b + sampling_slack(trace, ps)
    gap = _dist_cols(trace.man[a], trace.man[b])
    bad = np.nonzero(~(gap <= bound))[0]
    worst = float(gap.max())
    return Verdict(f"deviation-{a}-{b}", not len(bad), _first_time(trace, bad),
                   bound - worst,
                   f"max|M{a}-M{b}|={worst:.6e} vs delta_{b}={delta_b:.6e}")


def check_cauchy(trace, level_a: int, level_b: int, deltas) -> Verdict:
    """Pointwise gap between two levels against the truncation bound
    (sum of the delta budgets between them)."""
    if level_a not in trace.man or level_b not in trace.man:
        raise DomainError(f"levels {level_a} and {level_b} must both be recorded")
    bound_val = float(truncation_bound(level_a, level_b, [float(d) for d in deltas]))
    bound = bound_val + sampling_slack(trace, trace.cascade[-1])
    gap = _dist_cols(trace.man[level_a], trace.man[level_b])
    bad = np.nonzero(~(gap <= bound))[0]
    worst = float(gap.max())
    return Verdict(f"cauchy-{level_a}-{level_b}", not len(bad), _first_time(trace, bad),
                   bound - worst,
                   f"max gap {worst:.6e} vs truncation bound {bound_val:.6e}")


def check_capture_free(trace) -> Verdict:
    if trace.capture is None:
        return Verdict("capture-free", True, None, math.inf, "")
    return Verdict("capture-free", False, trace.capture.time, -math.inf,
                   f"lion {trace.capture.lion_index} reached the man")


def run_all(trace, cascade) -> list[Verdict]:
    """Every checker applicable to this trace's level and recorded columns."""
    from .strategy import deltas_of

    out = [check_capture_free(trace), check_safety(trace, cascade)]
    n = trace.level_n
    if n >= 2:
        out.append(check_move_grammar(trace))
        out.append(check_avoidance_duration(trace, cascade))
        if n - 1 in trace.man and n in trace.man:
            out.append(check_goal_adherence(trace, cascade))
            out.append(check_deviation(trace, cascade))
            out.append(check_cauchy(trace, n - 1, n, deltas_of(cascade)))
    return out
