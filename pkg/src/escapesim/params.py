"""Level-by-level derivation and certification of the strategy constants.

Each strategy level n carries a record of constants (speed surplus eps_n,
decision period sigma_n, avoidance radius r, clearance radius rho, escape
half-angle theta, angular window phi, detour time bound tau, and the safety
distance c_n). Level k's constants depend on level k-1's, so the whole set is
derived front to back as a cascade; ``certify`` re-substitutes every defining
inequality and reports the residuals.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from . import precision as pm
from .errors import DomainError, PrecisionError, SolverError
from .geometry import Point2, dist
from .verdicts import Verdict, combine

logger = logging.getLogger("escapesim.params")

PRECISION_GUARD_ULPS = 1e6
REL_TOL = 1e-12

_JSON_KEYS = ("level", "eps_n", "sigma_n", "ell", "p", "r", "rho", "theta",
              "phi", "tau", "rho_prime", "c_n", "delta_n")


@dataclass(frozen=True)
class ParameterSet:
    """All constants of one strategy level. Scalars are floats in standard
    mode and MPFR values in extended mode; fields that only exist from level 2
    on (ell, p, r, rho, phi, tau, rho_prime, delta_n) are None at level 1."""

    level: int
    eps_n: float
    sigma_n: float
    c_n: float
    theta: float
    ell: float | None = None
    p: int | None = None
    r: float | None = None
    rho: float | None = None
    phi: float | None = None
    tau: float | None = None
    rho_prime: float | None = None
    delta_n: float | None = None

    def step_length(self):
        """Length of one committed path segment: sigma_n * (1 + eps_n)."""
        return self.sigma_n * (1 + self.eps_n)

    def to_json_dict(self) -> dict:
        vals = {
            "level": self.level,
            "eps_n": pm.to_float(self.eps_n),
            "sigma_n": pm.to_float(self.sigma_n),
            "ell": None if self.ell is None else pm.to_float(self.ell),
            "p": self.p,
            "r": None if self.r is None else pm.to_float(self.r),
            "rho": None if self.rho is None else pm.to_float(self.rho),
            "theta": pm.to_float(self.theta),
            "phi": None if self.phi is None else pm.to_float(self.phi),
            "tau": None if self.tau is None else pm.to_float(self.tau),
            "rho_prime": None if self.rho_prime is None else pm.to_float(self.rho_prime),
            "c_n": pm.to_float(self.c_n),
            "delta_n": None if self.delta_n is None else pm.to_float(self.delta_n),
        }
        assert tuple(vals) == _JSON_KEYS
        return vals


@dataclass(frozen=True)
class StartConfiguration:
    """Starting geometry: the man's start, the ordered lion starts, and the
    man's speed surplus eps (the man runs at 1+eps, lions at 1)."""

    man_start: Point2
    lion_starts: tuple[Point2, ...]
    eps: float

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise DomainError(f"eps must be in (0, 1), got {self.eps}")
        if not self.lion_starts:
            raise DomainError("at least one lion start is required")
        for i, s in enumerate(self.lion_starts):
            if s.x == self.man_start.x and s.y == self.man_start.y:
                raise DomainError(
                    f"lion {i + 1} starts at the man's start point {s}; every "
                    "pursuer must start away from the evader's start point"
                )

    def max_coordinate(self) -> float:
        coords = [abs(self.man_start.x), abs(self.man_start.y)]
        for s in self.lion_starts:
            coords += [abs(s.x), abs(s.y)]
        return max(pm.to_float(c) for c in coords)


def eps_level(eps, n: int):
    """Speed surplus at level n: (1 - 2^-n) * eps."""
    if n < 1:
        raise DomainError(f"level must be >= 1, got {n}")
    one = eps / eps if eps else 1.0  # unit in eps's scalar type
    return (one - one / 2 ** n) * eps


def delta_level(safety, n: int):
    """Deviation budget at level n from the safety distances c_1..c_{n-1}:
    min(1/2^n, min_i c_i / 2^(n-i+1))."""
    if n < 2:
        raise DomainError(f"delta is defined for levels >= 2, got {n}")
    safety = list(safety)
    if len(safety) != n - 1:
        raise DomainError(f"need safety distances c_1..c_{n-1}, got {len(safety)}")
    best = 0.5 ** n if isinstance(safety[0], float) else type(safety[0])(0.5) ** n
    for i, c in enumerate(safety, start=1):
        if not c > 0:
            raise DomainError(f"safety distance c_{i} must be positive, got {c}")
        cand = c / 2 ** (n - i + 1)
        if cand < best:
            best = cand
    return best


def _bisect_steps(x) -> int:
    return 140 if type(x) is float else 2 * pm.EXTENDED_PRECISION_BITS + 40


def solve_phi(rho, r, theta):
    """The unique phi in (0, pi/2] with rho*cos(phi) - 2r > 0 solving
    tan(theta) = rho*sin(phi) / (rho*cos(phi) - 2r).

    Bisection on (0, arccos(2r/rho)), where the right side increases from 0
    to +inf; residual must come out <= 1e-12 relative.
    """
    if not rho > 2 * r:
        raise SolverError(f"need rho > 2r for a solvable window (rho={rho}, r={r})")
    pi = pm.pi_for(rho)
    if not 0 < theta < pi / 2:
        raise SolverError(f"no root: escape half-angle {theta} outside (0, pi/2)")
    target = pm.tan(theta)
    lo = 0 * rho
    hi = pm.acos(2 * r / rho)
    for _ in range(_bisect_steps(rho)):
        mid = (lo + hi) / 2
        if mid == lo or mid == hi:
            break
        den = rho * pm.cos(mid) - 2 * r
        if den > 0 and rho * pm.sin(mid) / den < target:
            lo = mid
        else:
            hi = mid
    phi = (lo + hi) / 2
    den = rho * pm.cos(phi) - 2 * r
    if not den > 0:
        raise SolverError("bisection collapsed onto the singular boundary")
    residual = abs(rho * pm.sin(phi) / den - target) / target
    if not residual <= REL_TOL:
        raise SolverError(f"phi residual {residual} exceeds {REL_TOL}")
    return phi


def solve_sigma(r, rho, eps_n, phi):
    """0.99 x the largest decision period sigma satisfying both
    2*arcsin((2+eps)*sigma / (2(r-sigma))) + sigma/rho <= phi  and
    sigma < r / (3+eps)."""
    cap = r / (3 + eps_n)
    dom = 2 * r / (4 + eps_n)  # keeps the arcsine argument <= 1
    hi = cap if cap < dom else dom
    lo = 0 * r

    def lhs(s):
        a = (2 + eps_n) * s / (2 * (r - s))
        if a > 1:
            a = a / a
        return 2 * pm.asin(a) + s / rho

    if lhs(hi) <= phi:
        lo = hi
    else:
        for _ in range(_bisect_steps(r)):
            mid = (lo + hi) / 2
            if mid == lo or mid == hi:
                break
            if lhs(mid) <= phi:
                lo = mid
            else:
                hi = mid
    sigma = 0.99 * lo
    if not (lhs(sigma) <= phi and sigma < cap and sigma > 0):
        raise SolverError("no admissible decision period found")
    return sigma


def _avoidance_radius(segment_piece, delta_n, eps_n, eps_prev, start_gap):
    pi = pm.pi_for(eps_n)
    t1 = segment_piece * eps_n * (eps_n - eps_prev) / (2 + 2 * eps_n + 18 * pi * (1 + eps_n))
    t2 = (delta_n / 2) * eps_n / (2 + 2 * eps_n + 12 * pi * (1 + eps_n))
    return min(t1, t2, start_gap)


def derive_cascade(config: StartConfiguration, n: int, mode: str = pm.STANDARD,
                   delta_override=None) -> list[ParameterSet]:
    """Derive levels 1..n of the parameter cascade for the given start.

    Level 1 is the base case (sigma_1 = 1, c_1 = distance to lion 1); each
    later level computes delta, ell, p, r, rho, theta, phi, sigma, tau,
    rho_prime, c in that order. ``delta_override`` (values for levels 2..n)
    replaces the default budget formula; values must be positive.

    Raises PrecisionError when a derived sigma falls below 1e6 ulps of the
    largest start coordinate in the active scalar mode.
    """
    if n < 1:
        raise DomainError(f"level must be >= 1, got {n}")
    if len(config.lion_starts) < n:
        raise DomainError(f"level {n} needs {n} lion starts, got {len(config.lion_starts)}")
    if delta_override is not None:
        delta_override = list(delta_override)
        if len(delta_override) < n - 1:
            raise DomainError("delta override must cover levels 2..n")
        if any(not d > 0 for d in delta_override):
            raise DomainError("delta override values must be positive")

    pm.setup_mode(mode)
    eps = pm.from_float(config.eps, mode)
    one = pm.from_float(1.0, mode)
    man = Point2(pm.from_float(pm.to_float(config.man_start.x), mode),
                 pm.from_float(pm.to_float(config.man_start.y), mode))
    lions = [Point2(pm.from_float(pm.to_float(s.x), mode),
                    pm.from_float(pm.to_float(s.y), mode))
             for s in config.lion_starts]
    guard = PRECISION_GUARD_ULPS * pm.ulp(pm.from_float(config.max_coordinate(), mode))

    eps1 = eps_level(eps, 1)
    levels = [ParameterSet(level=1, eps_n=eps1, sigma_n=one, theta=pm.acos(1 / (1 + eps1)),
                           c_n=dist(man, lions[0]))]
    logger.debug("level 1: sigma=1, guard threshold=%.3e", guard)

    for k in range(2, n + 1):
        prev = levels[-1]
        eps_k = eps_level(eps, k)
        if delta_override is not None:
            delta_k = pm.from_float(float(delta_override[k - 2]), mode)
        else:
            delta_k = delta_level([lv.c_n for lv in levels], k)
        ell = prev.sigma_n * (1 + prev.eps_n)
        p = int(-(-pm.to_float(ell) // pm.to_float(delta_k / 2)))  # ceil
        while not ell / p <= delta_k / 2:
            p += 1
        while p > 1 and ell / (p - 1) <= delta_k / 2:
            p -= 1
        r = _avoidance_radius(prev.sigma_n / p, delta_k, eps_k, prev.eps_n,
                              dist(man, lions[k - 1]))
        rho = 2 * r / eps_k
        theta = pm.acos(1 / (1 + eps_k))
        phi = solve_phi(rho, r, theta)
        sigma_k = solve_sigma(r, rho, eps_k, phi)
        tau = 6 * pm.pi_for(r) * r / eps_k
        rho_prime = rho + r + (3 + eps_k) * sigma_k
        c_k = r - (3 + eps_k) * sigma_k
        if not c_k > 0:
            raise SolverError(f"level {k}: safety distance came out non-positive ({c_k})")
        if not pm.to_float(sigma_k) >= guard:
            raise PrecisionError(k, pm.to_float(sigma_k), guard)
        logger.debug("level %d: sigma=%.6e (%.1f ulp-guard headroom)", k,
                     pm.to_float(sigma_k), pm.to_float(sigma_k) / guard)
        levels.append(ParameterSet(level=k, eps_n=eps_k, sigma_n=sigma_k, ell=ell, p=p,
                                   r=r, rho=rho, theta=theta, phi=phi, tau=tau,
                                   rho_prime=rho_prime, c_n=c_k, delta_n=delta_k))
    return levels


def precision_headroom(ps: ParameterSet, config: StartConfiguration) -> float:
    """sigma_n expressed in multiples of the guard threshold (diagnostic)."""
    scale = pm.from_float(config.max_coordinate(),
                          pm.STANDARD if type(ps.sigma_n) is float else pm.EXTENDED)
    return pm.to_float(ps.sigma_n) / (PRECISION_GUARD_ULPS * pm.ulp(scale))


def _rel_gap(actual, expected) -> float:
    scale = max(abs(pm.to_float(expected)), 1e-300)
    return abs(pm.to_float(actual) - pm.to_float(expected)) / scale


def certify(ps: ParameterSet, prev: ParameterSet | None, config: StartConfiguration,
            delta_expected=None) -> Verdict:
    """Re-substitute every defining (in)equality of one level and report residuals.

    ``prev`` is the preceding level's record (None for level 1). When the full
    default delta formula value is known (no override), pass it as
    ``delta_expected``; otherwise only positivity and the level-(n-1) cap are
    checked. Violations are reported at time 0.0 (parameter checks are not
    time-indexed).
    """
    pm.setup_mode(pm.STANDARD if type(ps.sigma_n) is float else pm.EXTENDED)
    f: list[tuple[float | None, float, str]] = []
    n = ps.level
    one = ps.eps_n * 0 + 1  # unit in this level's scalar type

    def check(ok: bool, margin: float, note: str):
        f.append((None if ok else 0.0, margin, note))

    m = -_rel_gap(ps.eps_n, eps_level(config.eps * one, n))
    check(m >= -REL_TOL, m, f"eps_n formula residual {-m:.2e}")

    if n == 1:
        m = -_rel_gap(ps.sigma_n, 1.0)
        check(m >= -REL_TOL, m, f"sigma_1=1 residual {-m:.2e}")
        m = -_rel_gap(ps.c_n, dist(config.man_start, config.lion_starts[0]))
        check(m >= -REL_TOL, m, f"c_1=start distance residual {-m:.2e}")
        return combine(f"params-level-{n}", f)

    if prev is None:
        raise DomainError("levels >= 2 need the preceding level for certification")
    check(pm.to_float(prev.eps_n) < pm.to_float(ps.eps_n),
          pm.to_float(ps.eps_n) - pm.to_float(prev.eps_n), "eps level ordering")

    m = -_rel_gap(ps.ell, prev.sigma_n * (1 + prev.eps_n))
    check(m >= -REL_TOL, m, f"ell residual {-m:.2e}")

    half_delta = ps.delta_n / 2
    piece = ps.ell / ps.p
    m = (pm.to_float(half_delta) - pm.to_float(piece)) / pm.to_float(half_delta)
    check(m >= -REL_TOL, m, f"piece length <= delta/2 slack {m:.2e}")
    check(ps.p >= 1, float(ps.p), "p >= 1")
    if ps.p > 1:
        over = pm.to_float(ps.ell / (ps.p - 1)) - pm.to_float(half_delta)
        check(over >= -REL_TOL * pm.to_float(half_delta),
              over / pm.to_float(half_delta), "p is the least piece count")

    t3 = dist(config.man_start, config.lion_starts[n - 1])
    t1 = _avoidance_radius(prev.sigma_n / ps.p, ps.delta_n, ps.eps_n, prev.eps_n,
                           pm.to_float(t3) * one)
    # t1 already folds in all three min terms; r must equal the min and hence
    # sit at or below each term.
    m = -_rel_gap(ps.r, t1)
    check(m >= -REL_TOL, m, f"r = min(terms) residual {-m:.2e}")
    check(pm.to_float(ps.r) <= pm.to_float(t3) * (1 + REL_TOL),
          pm.to_float(t3) - pm.to_float(ps.r), "r <= start gap to lion n")

    m = -_rel_gap(ps.rho, 2 * ps.r / ps.eps_n)
    check(m >= -REL_TOL, m, f"rho residual {-m:.2e}")
    m = -_rel_gap(ps.theta, pm.acos(1 / (1 + ps.eps_n)))
    check(m >= -REL_TOL, m, f"theta residual {-m:.2e}")
    m = -_rel_gap(ps.tau, 6 * pm.pi_for(ps.r) * ps.r / ps.eps_n)
    check(m >= -REL_TOL, m, f"tau residual {-m:.2e}")
    m = -_rel_gap(ps.rho_prime, ps.rho + ps.r + (3 + ps.eps_n) * ps.sigma_n)
    check(m >= -REL_TOL, m, f"rho_prime residual {-m:.2e}")

    den = ps.rho * pm.cos(ps.phi) - 2 * ps.r
    check(pm.to_float(den) > 0, pm.to_float(den), "rho cos(phi) - 2r > 0")
    check(0 < pm.to_float(ps.phi) <= pm.to_float(pm.pi_for(ps.phi)) / 2,
          pm.to_float(ps.phi), "phi in (0, pi/2]")
    if pm.to_float(den) > 0:
        m = -_rel_gap(ps.rho * pm.sin(ps.phi) / den, pm.tan(ps.theta))
        check(m >= -REL_TOL, m, f"phi equation residual {-m:.2e}")

    arg = (2 + ps.eps_n) * ps.sigma_n / (2 * (ps.r - ps.sigma_n))
    if pm.to_float(arg) <= 1 and pm.to_float(ps.r - ps.sigma_n) > 0:
        lhs = 2 * pm.asin(arg) + ps.sigma_n / ps.rho
        m = (pm.to_float(ps.phi) - pm.to_float(lhs)) / pm.to_float(ps.phi)
        check(m >= -REL_TOL, m, f"sigma window constraint slack {m:.2e}")
    else:
        check(False, -1.0, "sigma window constraint: arcsine argument out of range")
    cap_slack = pm.to_float(ps.r / (3 + ps.eps_n)) - pm.to_float(ps.sigma_n)
    check(cap_slack > 0, cap_slack / pm.to_float(ps.sigma_n), "sigma < r/(3+eps)")

    m = -_rel_gap(ps.c_n, ps.r - (3 + ps.eps_n) * ps.sigma_n)
    check(m >= -REL_TOL, m, f"c_n residual {-m:.2e}")
    check(pm.to_float(ps.c_n) > 0, pm.to_float(ps.c_n), "c_n > 0")

    check(pm.to_float(ps.delta_n) > 0, pm.to_float(ps.delta_n), "delta_n > 0")
    if delta_expected is not None:
        m = -_rel_gap(ps.delta_n, delta_expected)
        check(m >= -REL_TOL, m, f"delta_n formula residual {-m:.2e}")
    else:
        lim = min(0.5 ** n, pm.to_float(prev.c_n) / 4)
        check(pm.to_float(ps.delta_n) <= lim * (1 + REL_TOL),
              lim - pm.to_float(ps.delta_n), "delta_n within level-(n-1) cap")

    return combine(f"params-level-{n}", f)


def certify_cascade(cascade: list[ParameterSet], config: StartConfiguration,
                    delta_override=None) -> list[Verdict]:
    """Certify every level; with no override the exact default delta formula
    value is recomputed and compared."""
    out = []
    for i, ps in enumerate(cascade):
        prev = cascade[i - 1] if i else None
        expected = None
        if delta_override is None and ps.level >= 2:
            expected = delta_level([lv.c_n for lv in cascade[:i]], ps.level)
        out.append(certify(ps, prev, config, delta_expected=expected))
    return out
