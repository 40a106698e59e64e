"""High-precision closed forms used as frozen expectations.

Computed with :mod:`decimal` at 40 digits so they share no code path
with the float implementation under test.
"""

from decimal import Decimal, getcontext

getcontext().prec = 40

PI = Decimal("3.141592653589793238462643383279502884197")
SQRT2 = Decimal(2).sqrt()
SQRT5 = Decimal(5).sqrt()
PHI = (1 + SQRT5) / 2
PHI3 = PHI**3
PHI4 = PHI**4


def coef(theta: Decimal) -> Decimal:
    return PHI4 / (PHI3 + theta)


def inner_corner(theta: Decimal, w: Decimal) -> Decimal:
    return theta + (1 + coef(theta)) * w


def f(x: Decimal) -> float:
    return float(x)


def dsin(x: Decimal) -> Decimal:
    term, total, k = x, x, 1
    while abs(term) > Decimal(10) ** -45:
        term = -term * x * x / ((2 * k) * (2 * k + 1))
        total += term
        k += 1
    return total


def dcos(x: Decimal) -> Decimal:
    return dsin(PI / 2 - x)


def rim_crossing() -> Decimal:
    """Root of 3x - 2 sin(x/2) = 2 pi by Newton's method.

    Unit radii and mu12 = 0: T02 = 1 + x and T1 = 1 + 2 sin(x/2) + 2pi - 2x.
    """
    x = 2 * PI / 3
    for _ in range(60):
        x -= (3 * x - 2 * dsin(x / 2) - 2 * PI) / (3 - dcos(x / 2))
    return x


# crown lemmas
LEMMA1_PI_1 = f(PI + PHI)
LEMMA1_HALF_PI_HALF = f(PI / 2 + PHI / 2)
LEMMA2_PI_1 = f(PI + coef(PI))
LEMMA3_PI_013 = f(inner_corner(PI, Decimal("0.13")))
ROUTE_PI_1_PI = f(1 + PHI)  # zero inner radius: the arc walk is free

# planar strategies
TWO_CROWNS_0 = f(inner_corner(PI, Decimal(1)))
TWO_CROWNS_087 = f(Decimal("0.87") + inner_corner(PI, Decimal("0.13")))
TWO_CROWNS_09 = f(Decimal("0.9") + inner_corner(PI, Decimal("0.1")))
THREE_CROWNS_CENTRE = f(inner_corner(2 * PI / 3, Decimal(1)))
THREE_CROWNS_RIM = f(1 + rim_crossing())
ZERO_WIDTH_LINEAR = f(1 + 2 * PI / 3)
TWO_CROWNS_BETA_05_1 = f(Decimal("0.5") + inner_corner(PI - 1, Decimal("0.5")))
FOUR_CROWNS_RIM_ALIGNED = f(2 + PI / 2)
EARLY_FOUR_RIM_RIGHT = f(1 + SQRT2 + PI / 2)

# grid error allowance 3 * sqrt(step^2 + (1/n)^2)
EPS_FINE_GRID = f(3 * (Decimal("0.0001") + Decimal("0.000025")).sqrt())
EPS_DESK_GRID = f(3 * (Decimal("0.0025") + Decimal("0.000625")).sqrt())

# 3D bounds
FOUR_SIN_3PI_8 = f(2 * (2 + SQRT2).sqrt())  # 4 sin(3pi/8) = 2 sqrt(2 + sqrt 2)
TWO_SQRT2_PLUS_SQRT5 = f(2 * SQRT2 + SQRT5)
L2_TOTAL = f(4 + 2 * (2 + SQRT2).sqrt() + 2 * SQRT2 + SQRT5)

CROSS_OPTIMUM = f(1 + 2 * SQRT2)
