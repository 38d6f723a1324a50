"""Log-gamma and Hurwitz zeta values at s = 0 and s = -1.

``log_gamma`` uses the recurrence Gamma(x+1) = x Gamma(x) to push the argument
above ``SHIFT_TO`` and then the Stirling series

    log Gamma(x) = (x - 1/2) log x - x + log(2 pi)/2
                   + sum_{j=1}^{J} B_{2j} / (2j (2j-1) x^{2j-1}) + R_J(x).

For real x > 0 the remainder R_J has the sign of, and is bounded in modulus
by, the first omitted term, so the returned bound is rigorous up to
floating-point rounding (which is added separately).
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import DomainError

EPS = 2.0**-52

# B_2, B_4, ..., B_20
_BERNOULLI_EVEN = (
    Fraction(1, 6),
    Fraction(-1, 30),
    Fraction(1, 42),
    Fraction(-1, 30),
    Fraction(5, 66),
    Fraction(-691, 2730),
    Fraction(7, 6),
    Fraction(-3617, 510),
    Fraction(43867, 798),
    Fraction(-174611, 330),
)

SHIFT_TO = 12.0
N_TERMS = 8
LOG_2PI = math.log(2.0 * math.pi)


def log_gamma_with_bound(x: float) -> tuple[float, float]:
    """Return ``(log Gamma(x), error_bound)`` for real ``x > 0``."""
    if not x > 0.0 or not math.isfinite(x):
        raise DomainError(f"log_gamma needs a finite positive argument, got {x!r}")
    shift_terms = []
    y = x
    while y < SHIFT_TO:
        shift_terms.append(math.log(y))
        y += 1.0
    series = []
    y_pow = y
    y2 = y * y
    for j in range(1, N_TERMS + 1):
        b = _BERNOULLI_EVEN[j - 1]
        series.append(float(b) / (2 * j * (2 * j - 1) * y_pow))
        y_pow *= y2
    b_next = _BERNOULLI_EVEN[N_TERMS]
    truncation = abs(float(b_next)) / ((2 * N_TERMS + 2) * (2 * N_TERMS + 1) * y_pow)
    main = (y - 0.5) * math.log(y) - y + 0.5 * LOG_2PI
    value = math.fsum([main, *series, *(-t for t in shift_terms)])
    rounding = 8 * EPS * (abs(main) + abs(value) + math.fsum(abs(t) for t in shift_terms))
    return value, truncation + rounding


def log_gamma(x: float) -> float:
    return log_gamma_with_bound(x)[0]


def hurwitz_zeta0(a: float) -> tuple[float, float]:
    """``(zeta_H(0, a), d/ds zeta_H(s, a) at s=0)`` for ``0 < a <= 1``.

    zeta_H(0, a) = 1/2 - a and zeta_H'(0, a) = log Gamma(a) - log(2 pi)/2.
    """
    value, _ = hurwitz_zeta0_with_bound(a)
    return value


def hurwitz_zeta0_with_bound(a: float) -> tuple[tuple[float, float], float]:
    if not (0.0 < a <= 1.0):
        raise DomainError(f"Hurwitz parameter must lie in (0, 1], got {a!r}")
    lg, err = log_gamma_with_bound(a)
    return (0.5 - a, lg - 0.5 * LOG_2PI), err + 4 * EPS * abs(lg)


def hurwitz_zeta_minus_one(a: float) -> float:
    """zeta_H(-1, a) = -B_2(a)/2 = -(a^2 - a + 1/6)/2."""
    if not (0.0 < a <= 1.0):
        raise DomainError(f"Hurwitz parameter must lie in (0, 1], got {a!r}")
    return -0.5 * (a * a - a + 1.0 / 6.0)
