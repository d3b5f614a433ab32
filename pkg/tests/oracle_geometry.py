"""Brute-force geometric oracles: angular scans, never closed forms.

The scan locates the inside/outside transition on a coarse grid and refines
the bracket by bisection on the distance indicator, so its resolution is far
below the 1e-6 rad agreement bound while staying independent of the
radical-line/law-of-cosines constructions under test.
"""

import numpy as np

SCAN_SAMPLES = 10 ** 6
DIRECTION_SAMPLES = 10 ** 5


def scan_ccw_leading_angle(man, step, lion, r, samples=SCAN_SAMPLES):
    """Angle (on the lion circle, from its center) of the CCW-most point of
    C(lion, r) inside C(man, step), via scan + bracket bisection."""
    beta = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    px = lion[0] + r * np.cos(beta)
    py = lion[1] + r * np.sin(beta)
    inside = (px - man[0]) ** 2 + (py - man[1]) ** 2 <= step * step
    n_in = int(inside.sum())
    if n_in == 0 or n_in == samples:
        raise ValueError("scan found no transversal intersection")
    # CCW exit: inside at i, outside at i+1 (cyclically).
    exits = np.nonzero(inside & ~np.roll(inside, -1))[0]
    if len(exits) != 1:
        raise ValueError(f"expected one CCW exit, found {len(exits)}")
    i = int(exits[0])
    lo = beta[i]
    hi = lo + 2 * np.pi / samples

    def out_of_circle(b):
        x = lion[0] + r * np.cos(b)
        y = lion[1] + r * np.sin(b)
        return (x - man[0]) ** 2 + (y - man[1]) ** 2 > step * step

    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if out_of_circle(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi) % (2 * np.pi)


def brute_force_directions(constraints, samples=DIRECTION_SAMPLES):
    """Whether any of `samples` uniformly spaced unit directions u satisfies
    every (ax, ay, c) constraint <u, a> >= c."""
    ang = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    ux = np.cos(ang)
    uy = np.sin(ang)
    ok = np.ones(samples, dtype=bool)
    for ax, ay, c in constraints:
        ok &= ux * ax + uy * ay >= c
    return bool(ok.any())


def angular_distance(a, b):
    d = (a - b) % (2 * np.pi)
    return min(d, 2 * np.pi - d)
