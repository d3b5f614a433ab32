"""Pure-Python simulation kernel.

Twin of the compiled kernel in ``_core.pyx``: same state layout, same
arithmetic in the same order, so a run produces bit-identical traces on
either backend. Unlike the compiled twin, this one is scalar-generic: state
scalars may be floats (fallback mode) or MPFR values (extended mode); the
recorded trace rows are float64 either way.

Controller codes: 0 Stationary, 1 PurePursuit, 2 GoalAmbush(visible),
3 Scripted/Replay. Move codes: 0 Free, 1 Escape, 2 Avoidance, -1 broken
avoidance geometry (caller raises).
"""

from __future__ import annotations

from . import precision as pm
from .adversaries import script_position

BACKEND_NAME = "python"

OK = 0
CAPTURE = 1
ROWS_FULL = 2


def choose_move(r, sigma, step, man_x, man_y, lion_x, lion_y, goal_x, goal_y,
                head_x, head_y, has_heading):
    """One decision: (move_code, unit_dx, unit_dy). Mirrors
    strategy.choose_direction for bare scalars."""
    dlx = man_x - lion_x
    dly = man_y - lion_y
    d = pm.sqrt(dlx * dlx + dly * dly)

    if d >= r + step:
        if man_x == goal_x and man_y == goal_y:
            if has_heading:
                return 0, head_x, head_y
            return 0, 1.0 * (step / step), 0.0 * step
        gx = goal_x - man_x
        gy = goal_y - man_y
        gn = pm.sqrt(gx * gx + gy * gy)
        return 0, gx / gn, gy / gn

    if not (man_x == goal_x and man_y == goal_y):
        gx = goal_x - man_x
        gy = goal_y - man_y
        gn = pm.sqrt(gx * gx + gy * gy)
        ux = gx / gn
        uy = gy / gn
        c1 = r - sigma
        if not c1 > d:  # non-empty lion-side arc
            two_pi = 2 * pm.pi_for(d)
            pi = pm.pi_for(d)
            if c1 <= -d:
                feasible = True
            else:
                a = c1 / d
                if a > 1:
                    a = a / a
                if a < -1:
                    a = -(a / a)
                hw1 = pm.acos(a)
                bdx = step * ux
                bdy = step * uy
                n2 = pm.sqrt(bdx * bdx + bdy * bdy)
                if sigma > n2:
                    feasible = False
                else:
                    a2v = sigma / n2
                    if a2v > 1:
                        a2v = a2v / a2v
                    hw2 = pm.acos(a2v)
                    ang1 = pm.atan2(dly, dlx)
                    if ang1 < 0:
                        ang1 = ang1 + two_pi
                    ang2 = pm.atan2(bdy, bdx)
                    if ang2 < 0:
                        ang2 = ang2 + two_pi
                    delta = (ang1 - ang2) % two_pi
                    if delta > pi:
                        delta = two_pi - delta
                    feasible = delta <= hw1 + hw2
            if feasible:
                return 1, ux, uy

    # avoidance: run to the CCW-leading intersection with C(lion, r)
    tol = 1e-12 * max(r, step, d)
    if d > r + step + tol or d < abs(r - step) - tol:
        return -1, 0.0, 0.0
    cg = (r * r + d * d - step * step) / (2 * r * d)
    if cg > 1:
        cg = cg / cg
    if cg < -1:
        cg = -(cg / cg)
    g = pm.acos(cg)
    b0 = pm.atan2(dly, dlx)
    ang = b0 + g
    qx = lion_x + r * pm.cos(ang)
    qy = lion_y + r * pm.sin(ang)
    vx = qx - man_x
    vy = qy - man_y
    vn = pm.sqrt(vx * vx + vy * vy)
    if vn == 0:
        return -1, 0.0, 0.0
    return 2, vx / vn, vy / vn


class KernelState:
    """Mutable hot-loop state. Scalars float or MPFR; rows always float64."""

    __slots__ = (
        "K", "sigma", "h", "step", "r", "capture_eps",
        "nlions", "kinds", "scripts", "cursors",
        "lx", "ly", "lvx", "lvy", "lion_t",
        "man_x", "man_y", "man_t0", "man_vx", "man_vy",
        "disp_x", "disp_y", "head_x", "head_y", "has_heading",
        "move_code", "choice_idx", "goal_x", "goal_y", "target_lion",
        "rec_cx", "rec_cy", "rec_t0", "rec_vx", "rec_vy", "top_slot",
        "t_out", "man_out", "goal_out", "move_out", "lions_out", "row", "cap_rows",
        "corners_out", "kinds_out", "disps_out", "capture", "flight_dir",
    )


def make_state(sigma, K, step, r, capture_eps, start_x, start_y,
               lion_xs, lion_ys, ctrl_kinds, scripts, target_lion,
               n_rec_levels, top_slot, t_out, man_out, goal_out, move_out, lions_out,
               flight_dir=None):
    st = KernelState()
    st.K = K
    st.target_lion = target_lion
    st.flight_dir = flight_dir
    st.sigma = sigma
    st.h = sigma / K
    st.step = step
    st.r = r
    st.capture_eps = capture_eps
    st.nlions = len(lion_xs)
    st.kinds = list(ctrl_kinds)
    st.scripts = list(scripts)
    st.cursors = [0] * st.nlions
    st.lx = list(lion_xs)
    st.ly = list(lion_ys)
    zero = sigma * 0
    st.lvx = [zero] * st.nlions
    st.lvy = [zero] * st.nlions
    st.lion_t = zero
    st.man_x = start_x
    st.man_y = start_y
    st.man_t0 = zero
    st.man_vx = zero
    st.man_vy = zero
    st.disp_x = zero
    st.disp_y = zero
    st.head_x = zero
    st.head_y = zero
    st.has_heading = False
    st.move_code = 0
    st.choice_idx = 0
    st.goal_x = start_x
    st.goal_y = start_y
    st.rec_cx = [start_x] * n_rec_levels
    st.rec_cy = [start_y] * n_rec_levels
    st.rec_t0 = [zero] * n_rec_levels
    st.rec_vx = [zero] * n_rec_levels
    st.rec_vy = [zero] * n_rec_levels
    st.top_slot = top_slot
    st.t_out = t_out
    st.man_out = man_out
    st.goal_out = goal_out
    st.move_out = move_out
    st.lions_out = lions_out
    st.row = 0
    st.cap_rows = len(t_out)
    st.corners_out = [(start_x, start_y)]
    st.kinds_out = []
    st.disps_out = []
    st.capture = None
    return st


def row_count(st) -> int:
    return st.row


def capture_info(st):
    return st.capture


def committed_path(st):
    """(corners, kinds, disps) of the kernel-managed top level."""
    return st.corners_out, st.kinds_out, st.disps_out


def set_buffers(st, t_out, man_out, goal_out, move_out, lions_out):
    st.t_out = t_out
    st.man_out = man_out
    st.goal_out = goal_out
    st.move_out = move_out
    st.lions_out = lions_out
    st.cap_rows = len(t_out)


def set_goal(st, gx, gy):
    st.goal_x = gx
    st.goal_y = gy


def set_level_segment(st, slot, cx, cy, t0, vx, vy):
    st.rec_cx[slot] = cx
    st.rec_cy[slot] = cy
    st.rec_t0[slot] = t0
    st.rec_vx[slot] = vx
    st.rec_vy[slot] = vy


def time_of_substep(st, m: int):
    """Grid time of sub-step m, bit-equal to i*sigma whenever m = i*K."""
    q, rem = divmod(m, st.K)
    if rem == 0:
        return q * st.sigma
    return m * st.h


def get_lion_positions(st, t):
    out = []
    dt = t - st.lion_t
    for i in range(st.nlions):
        if st.kinds[i] == 3:
            x, y, cur = script_position(st.scripts[i], t, st.cursors[i])
            st.cursors[i] = cur
            out.append((x, y))
        else:
            out.append((st.lx[i] + st.lvx[i] * dt, st.ly[i] + st.lvy[i] * dt))
    return out


def _advance_lions_to(st, t):
    dt = t - st.lion_t
    for i in range(st.nlions):
        if st.kinds[i] == 3:
            x, y, cur = script_position(st.scripts[i], t, st.cursors[i])
            st.cursors[i] = cur
            st.lx[i] = x
            st.ly[i] = y
        else:
            st.lx[i] = st.lx[i] + st.lvx[i] * dt
            st.ly[i] = st.ly[i] + st.lvy[i] * dt
    st.lion_t = t


def _refresh_velocities(st, t):
    h = st.h
    mx = st.man_x + st.man_vx * (t - st.man_t0)
    my = st.man_y + st.man_vy * (t - st.man_t0)
    for i in range(st.nlions):
        k = st.kinds[i]
        if k == 0 or k == 3:
            continue
        if k == 2:
            tx = st.goal_x
            ty = st.goal_y
        else:
            tx = mx
            ty = my
        dx = tx - st.lx[i]
        dy = ty - st.ly[i]
        d = pm.sqrt(dx * dx + dy * dy)
        if d <= h:
            st.lvx[i] = dx / h
            st.lvy[i] = dy / h
        else:
            st.lvx[i] = dx / d
            st.lvy[i] = dy / d


def _commit(st, t):
    if st.choice_idx > 0:
        st.man_x = st.man_x + st.disp_x
        st.man_y = st.man_y + st.disp_y
    st.man_t0 = t
    if st.flight_dir is not None:
        code, ux, uy = 0, st.flight_dir[0], st.flight_dir[1]
    else:
        code, ux, uy = choose_move(st.r, st.sigma, st.step, st.man_x, st.man_y,
                                   st.lx[st.target_lion], st.ly[st.target_lion],
                                   st.goal_x, st.goal_y, st.head_x, st.head_y,
                                   st.has_heading)
        if code < 0:
            return code
    st.disp_x = st.step * ux
    st.disp_y = st.step * uy
    st.man_vx = st.disp_x / st.sigma
    st.man_vy = st.disp_y / st.sigma
    st.head_x = ux
    st.head_y = uy
    st.has_heading = True
    st.move_code = code
    st.choice_idx += 1
    st.corners_out.append((st.man_x + st.disp_x, st.man_y + st.disp_y))
    st.kinds_out.append(code)
    st.disps_out.append((st.disp_x, st.disp_y))
    if st.top_slot >= 0:
        st.rec_cx[st.top_slot] = st.man_x
        st.rec_cy[st.top_slot] = st.man_y
        st.rec_t0[st.top_slot] = t
        st.rec_vx[st.top_slot] = st.man_vx
        st.rec_vy[st.top_slot] = st.man_vy
    return code


def _write_row(st, t):
    j = st.row
    st.t_out[j] = float(t)
    for s in range(len(st.rec_cx)):
        dts = t - st.rec_t0[s]
        st.man_out[j, s, 0] = float(st.rec_cx[s] + st.rec_vx[s] * dts)
        st.man_out[j, s, 1] = float(st.rec_cy[s] + st.rec_vy[s] * dts)
    st.goal_out[j, 0] = float(st.goal_x)
    st.goal_out[j, 1] = float(st.goal_y)
    st.move_out[j] = st.move_code
    for i in range(st.nlions):
        st.lions_out[j, i, 0] = float(st.lx[i])
        st.lions_out[j, i, 1] = float(st.ly[i])
    st.row = j + 1


def _check_capture(st, t):
    mx = st.man_x + st.man_vx * (t - st.man_t0)
    my = st.man_y + st.man_vy * (t - st.man_t0)
    eps_sq = st.capture_eps * st.capture_eps
    for i in range(st.nlions):
        dx = mx - st.lx[i]
        dy = my - st.ly[i]
        if dx * dx + dy * dy <= eps_sq:
            st.capture = (float(t), i + 1, st.row)
            return True
    return False


def _process_grid_time(st, t, m: int) -> int:
    _advance_lions_to(st, t)
    if m % st.K == 0:
        code = _commit(st, t)
        if code < 0:
            return -1
    _refresh_velocities(st, t)
    captured = _check_capture(st, t)
    _write_row(st, t)
    return CAPTURE if captured else OK


def advance_until(st, m_next: int, stop_time):
    """Process every grid time strictly below stop_time, starting at sub-step
    m_next. Returns (status, new_m_next)."""
    m = m_next
    while True:
        t = time_of_substep(st, m)
        if not t < stop_time:
            return OK, m
        if st.row >= st.cap_rows:
            return ROWS_FULL, m
        status = _process_grid_time(st, t, m)
        if status == -1:
            from .errors import InvariantViolationError
            raise InvariantViolationError(
                f"avoidance geometry unavailable at t={float(t)}; the "
                "between-choices distance band must have broken upstream"
            )
        m += 1
        if status == CAPTURE:
            return CAPTURE, m


def process_event_time(st, m_next: int, t):
    """Handle an engine event time t (after the engine's own bookkeeping):
    lion advance, the level-n commit when t is on the decision grid, velocity
    refresh when t is on the sub-step grid, and the sample row.
    Returns (status, new_m_next)."""
    if st.row >= st.cap_rows:
        return ROWS_FULL, m_next
    if time_of_substep(st, m_next) == t:
        status = _process_grid_time(st, t, m_next)
        if status == -1:
            from .errors import InvariantViolationError
            raise InvariantViolationError(
                f"avoidance geometry unavailable at t={float(t)}; the "
                "between-choices distance band must have broken upstream"
            )
        return status, m_next + 1
    _advance_lions_to(st, t)
    captured = _check_capture(st, t)
    _write_row(st, t)
    return (CAPTURE if captured else OK), m_next
