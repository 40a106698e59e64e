"""Makespan bounds of the crown strategies on the reduced planar scenario.

Only the three robots nearest the source matter to the strategies; every
other robot lies at radius >= r3 and is swept up by some crown.  A
scenario places p1 on the positive x-axis, p2 at polar angle ``mu12`` and
p3 at polar angle ``-mu13`` (case SUM) or ``+mu13`` (case DIFF).

Each ``*_curves`` function returns the pair of competing completion-time
curves of one strategy together with the admissible range of the split
angle x.  The functions are written against numpy so that the sweep in
:mod:`freezetag.certify` evaluates exactly the same expressions on whole
grids at once.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

import numpy as np

from .crowns import PHI, TWO_PI, equalize, inner_corner_time
from .geometry import chord

PI = math.pi
INFEASIBLE = math.inf


class Mu23Case(str, enum.Enum):
    SUM = "sum"
    DIFF = "diff"


def fold_angle(a):
    """Angular distance in [0, pi] for any real angle difference."""
    a = np.abs(np.asarray(a, dtype=float)) % TWO_PI
    return np.minimum(a, TWO_PI - a)


@dataclass(frozen=True)
class Scenario2D:
    r1: float
    r2: float
    r3: float
    mu12: float
    mu13: float
    mu23_case: Mu23Case = Mu23Case.SUM

    def __post_init__(self):
        object.__setattr__(self, "mu23_case", Mu23Case(self.mu23_case))
        if not (0.0 <= self.r1 <= self.r2 <= self.r3 <= 1.0):
            raise ValueError(f"radii must satisfy 0 <= r1 <= r2 <= r3 <= 1, got {self.radii}")
        for name in ("mu12", "mu13"):
            v = getattr(self, name)
            if not (0.0 <= v <= PI):
                raise ValueError(f"{name}={v} outside [0, pi]")

    @property
    def radii(self) -> tuple[float, float, float]:
        return (self.r1, self.r2, self.r3)

    @property
    def polar_angles(self) -> tuple[float, float, float]:
        sign = -1.0 if self.mu23_case is Mu23Case.SUM else 1.0
        return (0.0, self.mu12, sign * self.mu13)

    @property
    def mu23(self) -> float:
        return float(fold_angle(self.polar_angles[1] - self.polar_angles[2]))

    def mu(self, i: int, j: int) -> float:
        th = self.polar_angles
        return float(fold_angle(th[i - 1] - th[j - 1]))

    def radius(self, i: int) -> float:
        return self.radii[i - 1]

    def points(self) -> np.ndarray:
        th = np.array(self.polar_angles)
        r = np.array(self.radii)
        return np.stack([r * np.cos(th), r * np.sin(th)], axis=1)

    @property
    def beta_max(self) -> float:
        """Largest beta consistent with p2 and p3 lying within pi - beta of p1."""
        return PI - max(self.mu12, self.mu13)


@dataclass(frozen=True)
class StrategyEval:
    name: str
    bound: float
    x_star: float | None = None
    orientation_note: str = ""

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.bound)


# ---------------------------------------------------------------- curves


def three_crowns_curves(r1, r2, mu12, t_side="near"):
    """p0 wakes p1, then p0 runs to p2 while p1 runs to t on C(r2).

    The pair at p2 sweeps two crowns of angle x; p1 sweeps 2pi - 2x from t.
    ``t_side="near"`` puts t on p1's side of p2, ``"far"`` on the other.
    """
    w = 1.0 - r2
    lead = r1 + chord(r1, r2, mu12)
    sign = -1.0 if t_side == "near" else 1.0

    def pair(x):
        return lead + inner_corner_time(x, w)

    def single(x):
        return r1 + chord(r1, r2, np.abs(mu12 + sign * x)) + inner_corner_time(TWO_PI - 2.0 * x, w)

    return pair, single, 0.0, PI


def two_crowns_r3_curves(r2, r3, mu12):
    """Both robots stand at radius r3 on ray Op1, crowns x (towards p2) and 2pi - x.

    Returns two (f, g, lo, hi) options: the detour 2(r3 - r2) that wakes p2
    charged to the x crown (needs x >= mu12) or to the other one (x <= mu12).
    """
    w = 1.0 - r3
    detour = 2.0 * (r3 - r2)

    def toward(x):
        return inner_corner_time(x, w)

    def away(x):
        return inner_corner_time(TWO_PI - x, w)

    def toward_detour(x):
        return toward(x) + detour

    def away_detour(x):
        return away(x) + detour

    return (toward_detour, away, mu12, TWO_PI), (toward, away_detour, 0.0, mu12)


def early_three_curves(ra, rb, rc, mu_ab):
    """Three-crowns pattern: first p_a, then the pair wakes p_b and steps to radius r_c.

    p0 leaves p_a for q on C(r_c) at angle x from p_b on p_a's side.
    """
    w = 1.0 - rc
    lead = ra + chord(ra, rb, mu_ab) + np.abs(rc - rb)

    def pair(x):
        return lead + inner_corner_time(x, w)

    def single(x):
        return ra + chord(ra, rc, np.abs(mu_ab - x)) + inner_corner_time(TWO_PI - 2.0 * x, w)

    return pair, single, 0.0, PI


def early_four_curves(ra, rb, rc, r3, mu_ab, mu_ac, mu_bc):
    """p0 wakes p_a; the two robots wake p_b and p_c; pairs rotate to antipodes on C(r3)."""
    w = 1.0 - r3
    turn = 0.5 * np.abs(PI - mu_bc)
    lead_b = ra + chord(ra, rb, mu_ab) + chord(rb, r3, turn)
    lead_c = ra + chord(ra, rc, mu_ac) + chord(rc, r3, turn)

    def pair_b(x):
        return lead_b + inner_corner_time(x, w)

    def pair_c(x):
        return lead_c + inner_corner_time(PI - x, w)

    return pair_b, pair_c, 0.0, PI


def dagger_gaps(mu12, beta):
    """Angular distance from p2 to p-dagger for both sides p-dagger may sit on."""
    arm = PI - beta
    return fold_angle(arm - mu12), fold_angle(arm + mu12)


def four_crowns_curves(r1, r2, r3, mu12, beta, gap_2dagger):
    """p0 wakes p2; p0 goes on to p1 and p2 to p-dagger through the mid-annulus point s."""
    w = 1.0 - r3
    lead01 = r2 + chord(r2, r1, mu12) + chord(r1, r3, beta)
    lead2d = r2 + chord(r2, 0.5 * (1.0 + r3), gap_2dagger) + 0.5 * w + (1.0 + PHI) * w

    def pair01(x):
        return lead01 + inner_corner_time(x, w)

    def pair2d(x):
        return lead2d + (PI - x)

    return pair01, pair2d, 0.0, PI


def two_crowns_beta_value(r1, beta):
    return r1 + inner_corner_time(PI - beta, 1.0 - r1)


# ------------------------------------------------------------ evaluators


def _eval(name, curves, x_tol, note="", offset=0.0):
    f, g, lo, hi = curves
    res = equalize(f, g, float(lo), float(hi), tol=x_tol)
    return StrategyEval(name, float(res.value) + offset, float(res.x_star), note)


def three_crowns(s: Scenario2D, x_tol: float = 1e-9, t_side: str = "near") -> StrategyEval:
    return _eval("three_crowns", three_crowns_curves(s.r1, s.r2, s.mu12, t_side), x_tol, f"t on {t_side} side")


def two_crowns(r1: float) -> StrategyEval:
    return StrategyEval("two_crowns", float(two_crowns_beta_value(r1, 0.0)), PI)


def two_crowns_r2(r1: float, r2: float) -> StrategyEval:
    if r1 > r2:
        raise ValueError("two_crowns_r2 needs r1 <= r2")
    return StrategyEval("two_crowns_r2", float(r2 + inner_corner_time(PI, 1.0 - r2)), PI)


def two_crowns_r3(s: Scenario2D, x_tol: float = 1e-9) -> StrategyEval:
    right, left = two_crowns_r3_curves(s.r2, s.r3, s.mu12)
    a = _eval("two_crowns_r3", right, x_tol, "p2 detour in the x crown", offset=s.r3)
    b = _eval("two_crowns_r3", left, x_tol, "p2 detour in the 2pi-x crown", offset=s.r3)
    return a if a.bound <= b.bound else b


def early_p3_three(s: Scenario2D, order: tuple[int, int], x_tol: float = 1e-9) -> StrategyEval:
    a, b = order
    if a == b or {a, b} - {1, 2, 3}:
        raise ValueError(f"order must be two distinct robots of 1..3, got {order}")
    (c,) = {1, 2, 3} - {a, b}
    curves = early_three_curves(s.radius(a), s.radius(b), s.radius(c), s.mu(a, b))
    return _eval(f"early_p3_three[{a},{b}]", curves, x_tol, f"crown width 1-r{c}")


def three_crowns_r3(s: Scenario2D, x_tol: float = 1e-9) -> StrategyEval:
    ev = early_p3_three(s, (1, 2), x_tol)
    return StrategyEval("three_crowns_r3", ev.bound, ev.x_star, "q on p1's side of p2")


def early_p3_four(s: Scenario2D, first: int, x_tol: float = 1e-9) -> StrategyEval:
    if first not in (1, 2, 3):
        raise ValueError(f"first must be 1, 2 or 3, got {first}")
    b, c = sorted({1, 2, 3} - {first})
    best = None
    for pb, pc in ((b, c), (c, b)):
        curves = early_four_curves(
            s.radius(first), s.radius(pb), s.radius(pc), s.r3, s.mu(first, pb), s.mu(first, pc), s.mu(pb, pc)
        )
        ev = _eval(f"early_p3_four[{first}]", curves, x_tol, f"pair at p{pb} takes angle x")
        if best is None or ev.bound < best.bound:
            best = ev
    return best


def four_crowns_beta(s: Scenario2D, beta: float, x_tol: float = 1e-9) -> StrategyEval:
    name = "four_crowns_beta"
    if not (0.0 <= beta <= s.beta_max + 1e-12):
        return StrategyEval(name, INFEASIBLE, None, f"beta={beta} infeasible")
    worst = None
    for side, gap in zip(("near", "far"), dagger_gaps(s.mu12, beta)):
        ev = _eval(name, four_crowns_curves(s.r1, s.r2, s.r3, s.mu12, beta, float(gap)), x_tol, f"p-dagger {side} side")
        if worst is None or ev.bound > worst.bound:
            worst = ev
    return worst


def two_crowns_beta(r1: float, beta: float) -> StrategyEval:
    if not (0.0 <= beta <= PI):
        raise ValueError(f"beta={beta} outside [0, pi]")
    return StrategyEval("two_crowns_beta", float(two_crowns_beta_value(r1, beta)), PI - beta)


def angle_grid(step: float, upper: float) -> np.ndarray:
    """Multiples k*step in [0, upper].

    Decimal steps are expanded as exact rationals so that grids whose steps
    divide each other share bit-identical points.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    frac = Fraction(step).limit_denominator(10**4)
    if float(frac) == step:
        count = math.floor(Fraction(upper) / frac + Fraction(1, 10**12))
        vals = [float(k * frac) for k in range(count + 1)]
    else:
        count = math.floor(upper / step + 1e-12)
        vals = [k * step for k in range(count + 1)]
    return np.array([v for v in vals if v <= upper])


def two_or_four(s: Scenario2D, beta_step: float, x_tol: float = 1e-9) -> StrategyEval:
    """Worst case over the unknown angular slack beta of the better of two/four crowns."""
    worst = None
    for beta in angle_grid(beta_step, s.beta_max):
        four = four_crowns_beta(s, float(beta), x_tol)
        two = two_crowns_beta(s.r1, float(beta))
        pick = four if four.bound < two.bound else two
        if worst is None or pick.bound > worst.bound:
            worst = StrategyEval("two_or_four", pick.bound, pick.x_star, f"beta={beta:.6g} via {pick.name}")
    return worst


STRATEGY_ORDER = (
    "three_crowns",
    "two_crowns",
    "two_crowns_r2",
    "two_crowns_r3",
    "three_crowns_r3",
    "two_or_four",
    "early_p3_four[1]",
    "early_p3_four[2]",
    "early_p3_four[3]",
) + tuple(f"early_p3_three[{a},{b}]" for a, b in permutations((1, 2, 3), 2))


def all_strategies(s: Scenario2D, beta_step: float = 0.05, x_tol: float = 1e-9) -> list[StrategyEval]:
    evals = [
        three_crowns(s, x_tol),
        two_crowns(s.r1),
        two_crowns_r2(s.r1, s.r2),
        two_crowns_r3(s, x_tol),
        three_crowns_r3(s, x_tol),
        two_or_four(s, beta_step, x_tol),
    ]
    evals += [early_p3_four(s, k, x_tol) for k in (1, 2, 3)]
    evals += [early_p3_three(s, order, x_tol) for order in permutations((1, 2, 3), 2)]
    return evals


def best_bound(s: Scenario2D, beta_step: float = 0.05, x_tol: float = 1e-9) -> StrategyEval:
    """Smallest bound of the whole portfolio; ties go to the earlier strategy."""
    best = None
    for ev in all_strategies(s, beta_step, x_tol):
        assert ev.bound >= s.r1 - 1e-12, ev
        if best is None or ev.bound < best.bound:
            best = ev
    return best
