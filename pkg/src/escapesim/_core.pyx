# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernel.

Float64 twin of escapesim._pycore: identical state layout and identical
arithmetic in identical order (the build forces -ffp-contract=off so no FMA
contraction changes rounding). Every formula here mirrors the pure twin line
by line; change them together.
"""

from libc.math cimport sqrt, sin, cos, acos, atan2, fmod

from .errors import InvariantViolationError

BACKEND_NAME = "compiled"

OK = 0
CAPTURE = 1
ROWS_FULL = 2

cdef int _OK = 0
cdef int _CAPTURE = 1

cdef double PI = 3.141592653589793
cdef double TWO_PI = 6.283185307179586


cdef inline double _mod_2pi(double x):
    # Python float % semantics for a positive modulus
    cdef double r = fmod(x, TWO_PI)
    if r < 0:
        r += TWO_PI
    return r


cdef int _choose_move_c(double r, double sigma, double step,
                        double man_x, double man_y, double lion_x, double lion_y,
                        double goal_x, double goal_y, double head_x, double head_y,
                        bint has_heading, double* out_ux, double* out_uy):
    cdef double dlx = man_x - lion_x
    cdef double dly = man_y - lion_y
    cdef double d = sqrt(dlx * dlx + dly * dly)
    cdef double gx, gy, gn, ux, uy, c1, a, hw1, bdx, bdy, n2, a2v, hw2
    cdef double ang1, ang2, delta, tol, lim, cg, g, b0, ang, qx, qy, vx, vy, vn
    cdef bint feasible

    if d >= r + step:
        if man_x == goal_x and man_y == goal_y:
            if has_heading:
                out_ux[0] = head_x
                out_uy[0] = head_y
                return 0
            out_ux[0] = 1.0
            out_uy[0] = 0.0
            return 0
        gx = goal_x - man_x
        gy = goal_y - man_y
        gn = sqrt(gx * gx + gy * gy)
        out_ux[0] = gx / gn
        out_uy[0] = gy / gn
        return 0

    if not (man_x == goal_x and man_y == goal_y):
        gx = goal_x - man_x
        gy = goal_y - man_y
        gn = sqrt(gx * gx + gy * gy)
        ux = gx / gn
        uy = gy / gn
        c1 = r - sigma
        if not c1 > d:
            if c1 <= -d:
                feasible = True
            else:
                a = c1 / d
                if a > 1:
                    a = 1.0
                if a < -1:
                    a = -1.0
                hw1 = acos(a)
                bdx = step * ux
                bdy = step * uy
                n2 = sqrt(bdx * bdx + bdy * bdy)
                if sigma > n2:
                    feasible = False
                else:
                    a2v = sigma / n2
                    if a2v > 1:
                        a2v = 1.0
                    hw2 = acos(a2v)
                    ang1 = atan2(dly, dlx)
                    if ang1 < 0:
                        ang1 = ang1 + TWO_PI
                    ang2 = atan2(bdy, bdx)
                    if ang2 < 0:
                        ang2 = ang2 + TWO_PI
                    delta = _mod_2pi(ang1 - ang2)
                    if delta > PI:
                        delta = TWO_PI - delta
                    feasible = delta <= hw1 + hw2
            if feasible:
                out_ux[0] = ux
                out_uy[0] = uy
                return 1

    tol = r
    if step > tol:
        tol = step
    if d > tol:
        tol = d
    tol = 1e-12 * tol
    lim = r - step
    if lim < 0:
        lim = -lim
    if d > r + step + tol or d < lim - tol:
        return -1
    cg = (r * r + d * d - step * step) / (2 * r * d)
    if cg > 1:
        cg = 1.0
    if cg < -1:
        cg = -1.0
    g = acos(cg)
    b0 = atan2(dly, dlx)
    ang = b0 + g
    qx = lion_x + r * cos(ang)
    qy = lion_y + r * sin(ang)
    vx = qx - man_x
    vy = qy - man_y
    vn = sqrt(vx * vx + vy * vy)
    if vn == 0:
        return -1
    out_ux[0] = vx / vn
    out_uy[0] = vy / vn
    return 2


def choose_move(double r, double sigma, double step, double man_x, double man_y,
                double lion_x, double lion_y, double goal_x, double goal_y,
                head_x, head_y, has_heading):
    cdef double ux = 0.0
    cdef double uy = 0.0
    cdef double hx = 0.0
    cdef double hy = 0.0
    cdef bint hh = bool(has_heading)
    if hh:
        hx = head_x
        hy = head_y
    cdef int code = _choose_move_c(r, sigma, step, man_x, man_y, lion_x, lion_y,
                                   goal_x, goal_y, hx, hy, hh, &ux, &uy)
    return code, ux, uy


cdef class KernelState:
    cdef public long long K
    cdef public double sigma, h, step, r, capture_eps
    cdef public int nlions, target_lion, top_slot, n_rec
    cdef long long[::1] kinds
    cdef long long[::1] cursors
    cdef double[::1] script_t
    cdef double[::1] script_x
    cdef double[::1] script_y
    cdef long long[::1] script_off
    cdef double[::1] lx
    cdef double[::1] ly
    cdef double[::1] lvx
    cdef double[::1] lvy
    cdef public double lion_t
    cdef public double man_x, man_y, man_t0, man_vx, man_vy
    cdef public double disp_x, disp_y, head_x, head_y
    cdef public bint has_heading, flight
    cdef public double flight_x, flight_y
    cdef public int move_code
    cdef public long long choice_idx
    cdef public double goal_x, goal_y
    cdef double[::1] rec_cx
    cdef double[::1] rec_cy
    cdef double[::1] rec_t0
    cdef double[::1] rec_vx
    cdef double[::1] rec_vy
    cdef double[::1] t_out
    cdef double[:, :, ::1] man_out
    cdef double[:, ::1] goal_out
    cdef signed char[::1] move_out
    cdef double[:, :, ::1] lions_out
    cdef public long long row, cap_rows
    cdef public list corners_out
    cdef public list kinds_out
    cdef public list disps_out
    cdef public object capture


def make_state(double sigma, long long K, double step, double r, double capture_eps,
               double start_x, double start_y, lion_xs, lion_ys, ctrl_kinds, scripts,
               int target_lion, int n_rec_levels, int top_slot,
               t_out, man_out, goal_out, move_out, lions_out, flight_dir=None):
    import numpy as np
    cdef KernelState st = KernelState()
    cdef int n
    st.K = K
    st.sigma = sigma
    st.h = sigma / K
    st.step = step
    st.r = r
    st.capture_eps = capture_eps
    st.target_lion = target_lion
    n = len(lion_xs)
    st.nlions = n
    st.kinds = np.asarray(list(ctrl_kinds), dtype=np.int64)
    st.cursors = np.zeros(n, dtype=np.int64)
    off = [0]
    ts, xs, ys = [], [], []
    for s in scripts:
        if s is not None:
            for (t, x, y) in s:
                ts.append(float(t))
                xs.append(float(x))
                ys.append(float(y))
        off.append(len(ts))
    st.script_t = np.asarray(ts, dtype=np.float64) if ts else np.zeros(1)
    st.script_x = np.asarray(xs, dtype=np.float64) if xs else np.zeros(1)
    st.script_y = np.asarray(ys, dtype=np.float64) if ys else np.zeros(1)
    st.script_off = np.asarray(off, dtype=np.int64)
    st.lx = np.asarray([float(v) for v in lion_xs], dtype=np.float64)
    st.ly = np.asarray([float(v) for v in lion_ys], dtype=np.float64)
    st.lvx = np.zeros(n)
    st.lvy = np.zeros(n)
    st.lion_t = 0.0
    st.man_x = start_x
    st.man_y = start_y
    st.man_t0 = 0.0
    st.man_vx = 0.0
    st.man_vy = 0.0
    st.disp_x = 0.0
    st.disp_y = 0.0
    st.head_x = 0.0
    st.head_y = 0.0
    st.has_heading = False
    if flight_dir is not None:
        st.flight = True
        st.flight_x = flight_dir[0]
        st.flight_y = flight_dir[1]
    else:
        st.flight = False
        st.flight_x = 0.0
        st.flight_y = 0.0
    st.move_code = 0
    st.choice_idx = 0
    st.goal_x = start_x
    st.goal_y = start_y
    st.n_rec = n_rec_levels
    st.rec_cx = np.full(n_rec_levels, start_x)
    st.rec_cy = np.full(n_rec_levels, start_y)
    st.rec_t0 = np.zeros(n_rec_levels)
    st.rec_vx = np.zeros(n_rec_levels)
    st.rec_vy = np.zeros(n_rec_levels)
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


def set_buffers(KernelState st, t_out, man_out, goal_out, move_out, lions_out):
    st.t_out = t_out
    st.man_out = man_out
    st.goal_out = goal_out
    st.move_out = move_out
    st.lions_out = lions_out
    st.cap_rows = len(t_out)


def set_goal(KernelState st, gx, gy):
    st.goal_x = gx
    st.goal_y = gy


def set_level_segment(KernelState st, int slot, cx, cy, t0, vx, vy):
    st.rec_cx[slot] = cx
    st.rec_cy[slot] = cy
    st.rec_t0[slot] = t0
    st.rec_vx[slot] = vx
    st.rec_vy[slot] = vy


def row_count(KernelState st):
    return st.row


def capture_info(KernelState st):
    return st.capture


def committed_path(KernelState st):
    return st.corners_out, st.kinds_out, st.disps_out


cdef inline double _time_of_substep_c(KernelState st, long long m):
    cdef long long q = m / st.K
    if m % st.K == 0:
        return q * st.sigma
    return m * st.h


def time_of_substep(KernelState st, m):
    return _time_of_substep_c(st, m)


cdef void _script_pos(KernelState st, int i, double t, double* px, double* py):
    cdef long long lo = st.script_off[i]
    cdef long long hi = st.script_off[i + 1]
    cdef long long cur = st.cursors[i]
    cdef double ta, xa, ya, tb, xb, yb, frac
    if cur < lo:
        cur = lo
    while cur + 1 < hi and st.script_t[cur + 1] <= t:
        cur += 1
    st.cursors[i] = cur
    if cur + 1 >= hi:
        px[0] = st.script_x[hi - 1]
        py[0] = st.script_y[hi - 1]
        return
    ta = st.script_t[cur]
    xa = st.script_x[cur]
    ya = st.script_y[cur]
    tb = st.script_t[cur + 1]
    xb = st.script_x[cur + 1]
    yb = st.script_y[cur + 1]
    frac = (t - ta) / (tb - ta)
    px[0] = xa + (xb - xa) * frac
    py[0] = ya + (yb - ya) * frac


def get_lion_positions(KernelState st, t):
    cdef double tt = t
    cdef double dt = tt - st.lion_t
    cdef double x = 0.0
    cdef double y = 0.0
    cdef int i
    out = []
    for i in range(st.nlions):
        if st.kinds[i] == 3:
            _script_pos(st, i, tt, &x, &y)
            out.append((x, y))
        else:
            out.append((st.lx[i] + st.lvx[i] * dt, st.ly[i] + st.lvy[i] * dt))
    return out


cdef void _advance_lions_to(KernelState st, double t):
    cdef double dt = t - st.lion_t
    cdef double x = 0.0
    cdef double y = 0.0
    cdef int i
    for i in range(st.nlions):
        if st.kinds[i] == 3:
            _script_pos(st, i, t, &x, &y)
            st.lx[i] = x
            st.ly[i] = y
        else:
            st.lx[i] = st.lx[i] + st.lvx[i] * dt
            st.ly[i] = st.ly[i] + st.lvy[i] * dt
    st.lion_t = t


cdef void _refresh_velocities(KernelState st, double t):
    cdef double h = st.h
    cdef double mx = st.man_x + st.man_vx * (t - st.man_t0)
    cdef double my = st.man_y + st.man_vy * (t - st.man_t0)
    cdef double tx, ty, dx, dy, d
    cdef long long k
    cdef int i
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
        d = sqrt(dx * dx + dy * dy)
        if d <= h:
            st.lvx[i] = dx / h
            st.lvy[i] = dy / h
        else:
            st.lvx[i] = dx / d
            st.lvy[i] = dy / d


cdef int _commit(KernelState st, double t):
    cdef int code
    cdef double ux = 0.0
    cdef double uy = 0.0
    if st.choice_idx > 0:
        st.man_x = st.man_x + st.disp_x
        st.man_y = st.man_y + st.disp_y
    st.man_t0 = t
    if st.flight:
        code = 0
        ux = st.flight_x
        uy = st.flight_y
    else:
        code = _choose_move_c(st.r, st.sigma, st.step, st.man_x, st.man_y,
                              st.lx[st.target_lion], st.ly[st.target_lion],
                              st.goal_x, st.goal_y, st.head_x, st.head_y,
                              st.has_heading, &ux, &uy)
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


cdef void _write_row(KernelState st, double t):
    cdef long long j = st.row
    cdef int s, i
    cdef double dts
    st.t_out[j] = t
    for s in range(st.n_rec):
        dts = t - st.rec_t0[s]
        st.man_out[j, s, 0] = st.rec_cx[s] + st.rec_vx[s] * dts
        st.man_out[j, s, 1] = st.rec_cy[s] + st.rec_vy[s] * dts
    st.goal_out[j, 0] = st.goal_x
    st.goal_out[j, 1] = st.goal_y
    st.move_out[j] = <signed char> st.move_code
    for i in range(st.nlions):
        st.lions_out[j, i, 0] = st.lx[i]
        st.lions_out[j, i, 1] = st.ly[i]
    st.row = j + 1


cdef bint _check_capture(KernelState st, double t):
    cdef double mx = st.man_x + st.man_vx * (t - st.man_t0)
    cdef double my = st.man_y + st.man_vy * (t - st.man_t0)
    cdef double eps_sq = st.capture_eps * st.capture_eps
    cdef double dx, dy
    cdef int i
    for i in range(st.nlions):
        dx = mx - st.lx[i]
        dy = my - st.ly[i]
        if dx * dx + dy * dy <= eps_sq:
            st.capture = (t, i + 1, st.row)
            return True
    return False


cdef int _process_grid_time(KernelState st, double t, long long m):
    cdef int code
    cdef bint captured
    _advance_lions_to(st, t)
    if m % st.K == 0:
        code = _commit(st, t)
        if code < 0:
            return -1
    _refresh_velocities(st, t)
    captured = _check_capture(st, t)
    _write_row(st, t)
    return _CAPTURE if captured else _OK


def advance_until(KernelState st, m_next, stop_time):
    cdef long long m = m_next
    cdef double stop = stop_time
    cdef double t
    cdef int status
    while True:
        t = _time_of_substep_c(st, m)
        if not t < stop:
            return OK, m
        if st.row >= st.cap_rows:
            return ROWS_FULL, m
        status = _process_grid_time(st, t, m)
        if status == -1:
            raise InvariantViolationError(
                f"avoidance geometry unavailable at t={t}; the between-choices "
                "distance band must have broken upstream")
        m += 1
        if status == _CAPTURE:
            return CAPTURE, m


def process_event_time(KernelState st, m_next, t):
    cdef long long m = m_next
    cdef double tt = t
    cdef int status
    cdef bint captured
    if st.row >= st.cap_rows:
        return ROWS_FULL, m
    if _time_of_substep_c(st, m) == tt:
        status = _process_grid_time(st, tt, m)
        if status == -1:
            raise InvariantViolationError(
                f"avoidance geometry unavailable at t={tt}; the between-choices "
                "distance band must have broken upstream")
        return (CAPTURE if status == _CAPTURE else OK), m + 1
    _advance_lions_to(st, tt)
    captured = _check_capture(st, tt)
    _write_row(st, tt)
    return (CAPTURE if captured else OK), m
