"""Crown time bounds and the min-max equalizer.

A crown R(w, theta) is the annular sector of outer radius 1, inner radius
1 - w and central angle theta.  The three ``lemma*_time`` functions give
the time needed to wake every robot inside a crown from a corner, and
:func:`equalize` balances two concurrent crown activations.

All functions accept numpy arrays as well as floats unless stated
otherwise, which lets the parameter sweep reuse them unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

PHI = (1.0 + math.sqrt(5.0)) / 2.0
PHI3 = PHI**3
PHI4 = PHI**4
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GoldenConstants:
    phi: float = PHI
    phi3: float = PHI3
    phi4: float = PHI4


@dataclass(frozen=True)
class CrownSpec:
    """Central angle ``theta`` (radians) and radial ``width`` of a crown.

    ``theta == 0`` is accepted as a degenerate crown so that sweeps over
    coincident angles never raise.
    """

    theta: float
    width: float

    def __post_init__(self):
        if not (0.0 <= self.theta <= TWO_PI + 1e-12):
            raise ValueError(f"crown angle {self.theta} outside [0, 2pi]")
        if not (0.0 <= self.width <= 1.0 + 1e-12):
            raise ValueError(f"crown width {self.width} outside [0, 1]")


def outer_coefficient(theta):
    """phi^4 / (phi^3 + theta), the width coefficient for two robots."""
    return PHI4 / (PHI3 + theta)


def lemma1_time(spec: CrownSpec) -> float:
    """One awake robot at a corner: theta + phi * w."""
    return spec.theta + PHI * spec.width


def lemma2_time(spec: CrownSpec) -> float:
    """Two awake robots at an exterior corner."""
    return spec.theta + outer_coefficient(spec.theta) * spec.width


def lemma3_time(spec: CrownSpec) -> float:
    """One awake robot at an interior corner."""
    return spec.theta + (1.0 + outer_coefficient(spec.theta)) * spec.width


def inner_corner_time(theta, width):
    """Array form of :func:`lemma3_time`.  Used by every strategy curve."""
    return theta + (1.0 + PHI4 / (PHI3 + theta)) * width


def corner_route_time(theta: float, w: float, gamma: float) -> float:
    """Time of the explicit inner-corner route that proves the Lemma 3 bound.

    The robot walks ``gamma`` along the inner arc, steps out to the outer
    arc with the robot it found there, and the pair finishes the remaining
    crown of angle ``theta - gamma`` from the exterior corner.
    """
    CrownSpec(theta, w)
    if not (0.0 <= gamma <= theta):
        raise ValueError(f"gamma={gamma} must lie in [0, theta={theta}]")
    return float(inner_route_time(theta, w, gamma))


def inner_route_time(theta, w, gamma):
    """Unchecked array form of :func:`corner_route_time`."""
    rest = theta - gamma
    return (1.0 - w) * gamma + w + rest + outer_coefficient(rest) * w


def sample_route_slack(n: int, seed: int) -> np.ndarray:
    """Inner-corner bound minus route time on ``n`` seeded random crowns.

    Angles are uniform on [0, 2pi], widths on [0, 1] and the detour angle
    uniform on [0, theta].  Every entry should be nonnegative.
    """
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, TWO_PI, n)
    w = rng.uniform(0.0, 1.0, n)
    gamma = rng.uniform(0.0, 1.0, n) * theta
    return inner_corner_time(theta, w) - inner_route_time(theta, w, gamma)


@dataclass(frozen=True)
class MinimaxResult:
    x_star: float
    value: float
    converged: bool


def equalize(
    f: Callable[[float], float],
    g: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-9,
    max_iter: int = 200,
) -> MinimaxResult:
    """Minimise max(f, g) over [lo, hi] for f nondecreasing, g nonincreasing.

    Bisection on f - g.  When one curve dominates on the whole interval the
    corresponding endpoint is returned.
    """
    if lo > hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")

    def gap(x):
        fx, gx = f(x), g(x)
        if not (math.isfinite(fx) and math.isfinite(gx)):
            raise ValueError(f"non-finite curve value at x={x}: f={fx}, g={gx}")
        return fx - gx, max(fx, gx)

    d_lo, v_lo = gap(lo)
    if d_lo >= 0.0:
        return MinimaxResult(lo, v_lo, True)
    d_hi, v_hi = gap(hi)
    if d_hi <= 0.0:
        return MinimaxResult(hi, v_hi, True)

    a, b = lo, hi
    best_x, best_v = (lo, v_lo) if v_lo <= v_hi else (hi, v_hi)
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        d, v = gap(mid)
        if v < best_v:
            best_x, best_v = mid, v
        if abs(d) <= tol:
            return MinimaxResult(mid, v, True)
        if d < 0.0:
            a = mid
        else:
            b = mid
        if b - a <= 4e-16 * max(1.0, abs(b)):
            break
    return MinimaxResult(best_x, best_v, abs(f(best_x) - g(best_x)) <= tol)


def bisection_steps(width: float, x_tol: float) -> int:
    if width <= 0.0:
        return 0
    return max(1, math.ceil(math.log2(width / x_tol)))


def equalize_array(f, g, lo, hi, x_tol: float = 1e-9, steps: int | None = None):
    """Vectorised :func:`equalize` with a fixed bisection budget.

    ``lo`` and ``hi`` broadcast against the arrays captured by ``f`` and
    ``g``.  Returns ``(x_star, value)`` arrays.  Both end candidates of the
    final bracket are valid choices of x, so the smaller max is kept.
    Passing ``steps`` pins the iteration count independently of the
    bracket widths, which keeps results identical across grids.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if steps is None:
        steps = bisection_steps(float(np.max(hi - lo)), x_tol)
    a = lo + np.zeros_like(f(lo))
    b = hi + np.zeros_like(a)
    for _ in range(steps):
        mid = 0.5 * (a + b)
        below = f(mid) < g(mid)
        a = np.where(below, mid, a)
        b = np.where(below, b, mid)
    va = np.maximum(f(a), g(a))
    vb = np.maximum(f(b), g(b))
    take_a = va <= vb
    return np.where(take_a, a, b), np.where(take_a, va, vb)
