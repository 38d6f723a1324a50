import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtorsion.errors import DomainError
from qtorsion.special import (
    hurwitz_zeta0,
    hurwitz_zeta0_with_bound,
    hurwitz_zeta_minus_one,
    log_gamma,
    log_gamma_with_bound,
)

mpmath.mp.dps = 30


def test_hurwitz_at_one():
    (z, dz), err = hurwitz_zeta0_with_bound(1.0)
    assert z == -0.5
    assert abs(dz + 0.5 * math.log(2 * math.pi)) <= err < 1e-13


def test_hurwitz_at_half():
    (z, dz), err = hurwitz_zeta0_with_bound(0.5)
    assert z == 0.0
    assert abs(dz + 0.5 * math.log(2.0)) <= err < 1e-13


def test_reflection_quarter():
    d1 = hurwitz_zeta0(0.25)[1] + 0.5 * math.log(2 * math.pi)
    d2 = hurwitz_zeta0(0.75)[1] + 0.5 * math.log(2 * math.pi)
    # Gamma(a) Gamma(1-a) = pi / sin(pi a)
    assert d1 + d2 - math.log(2 * math.pi) == pytest.approx(
        math.log(math.pi / math.sin(math.pi / 4)) - math.log(2 * math.pi), abs=1e-13
    )


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-6, max_value=1.0))
def test_hurwitz_derivative_matches_mpmath(a):
    (z, dz), err = hurwitz_zeta0_with_bound(a)
    ref_z = float(mpmath.zeta(0, a))
    ref_dz = float(mpmath.zeta(0, a, 1))
    assert abs(z - ref_z) < 1e-15
    assert abs(dz - ref_dz) <= err + 1e-15 * max(1.0, abs(ref_dz))


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-8, max_value=1e6))
def test_log_gamma_bound_covers_error(x):
    val, err = log_gamma_with_bound(x)
    ref = float(mpmath.loggamma(x))
    assert abs(val - ref) <= err + 2e-16 * abs(ref)
    assert err < 1e-12 * max(1.0, abs(ref))


def test_log_gamma_agrees_with_lgamma():
    for x in (0.1, 0.5, 1.0, 2.5, 11.9, 12.0, 100.0):
        val, err = log_gamma_with_bound(x)
        assert log_gamma(x) == val
        assert abs(val - math.lgamma(x)) <= err + 4e-16 * abs(val)


@pytest.mark.parametrize("a", [0.0, -0.5, 1.5, float("nan")])
def test_hurwitz_domain(a):
    with pytest.raises(DomainError):
        hurwitz_zeta0(a)


def test_log_gamma_domain():
    with pytest.raises(DomainError):
        log_gamma(0.0)
    with pytest.raises(DomainError):
        log_gamma(float("inf"))


@pytest.mark.parametrize("a", [0.1, 0.25, 0.5, 0.9, 1.0])
def test_hurwitz_minus_one(a):
    assert hurwitz_zeta_minus_one(a) == pytest.approx(float(mpmath.zeta(-1, a)), abs=1e-15)
