import random
from fractions import Fraction

import mpmath
import pytest

from betafreq.dynamics import BetaContext, CertifiedInterval, orbit_value, parse_beta
from betafreq.orbit import OrbitPoint
from betafreq.precision import CertifiedReal, Membership, Ordering, decide

F = Fraction


def admissible_walk(beta: Fraction, M: int, x: Fraction, length: int, seed: int) -> list:
    """Random admissible digits, chosen in exact rational arithmetic."""
    rng = random.Random(seed)
    top = M / (beta - 1)
    digits, y = [], x
    for _ in range(length):
        options = [k for k in range(M + 1) if 0 <= beta * y - k <= top]
        k = rng.choice(options)
        digits.append(k)
        y = beta * y - k
    return digits


def ball_contains(orbit: OrbitPoint, value: Fraction) -> bool:
    mid, rad = orbit.ball()
    scale = 1 << orbit.Q
    return Fraction(mid - rad, scale) <= value <= Fraction(mid + rad, scale)


@pytest.mark.parametrize("budget", [None, 50, 5000])
def test_rational_base_orbit_encloses_exact_orbit(budget):
    beta, M, x = F(3, 2), 2, F(7, 5)
    digits = admissible_walk(beta, M, x, 3000, seed=1)
    ctx = BetaContext.create(M, beta, 2)
    orbit = OrbitPoint(ctx, x, budget=budget)
    y = x
    for i, k in enumerate(digits):
        orbit.push(k)
        y = beta * y - k
        if i % 97 == 0:
            orbit.sync()
        assert ball_contains(orbit, y)
    orbit.sync()
    assert ball_contains(orbit, y)
    assert decide(orbit.current, y) is Ordering.EQUAL
    assert list(orbit.counts) == [digits.count(k) for k in range(M + 1)]
    assert bytes(orbit.digits) == bytes(digits)


def test_irrational_base_orbit_against_high_precision_series():
    ctx = BetaContext.create(1, parse_beta("golden"), 1)
    x = F(1)
    with mpmath.workprec(4000):
        _golden_walk(ctx, x)


def _golden_walk(ctx, x):
    phi = (1 + mpmath.sqrt(5)) / 2
    rng = random.Random(7)
    y_mp = mpmath.mpf(1)
    orbit = OrbitPoint(ctx, x)
    top = 1 / (phi - 1)
    for _ in range(2000):
        options = [k for k in (0, 1) if 1e-300 < phi * y_mp - k < top - mpmath.mpf(1e-300)]
        k = rng.choice(options)
        y_mp = phi * y_mp - k
        orbit.push(k)
    orbit.sync()
    mid, rad = orbit.ball()
    scale = mpmath.mpf(2) ** orbit.Q
    assert (mid - rad) / scale <= y_mp <= (mid + rad) / scale


def test_locate_and_certify():
    ctx = BetaContext.create(1, F(3, 2), 1)
    orbit = OrbitPoint(ctx, F(1))
    inside = CertifiedInterval(CertifiedReal.from_rational(F(1, 2)), CertifiedReal.from_rational(F(3, 2)))
    touching = CertifiedInterval(CertifiedReal.from_rational(F(1)), CertifiedReal.from_rational(F(2)))
    away = CertifiedInterval(CertifiedReal.from_rational(F(2)), CertifiedReal.from_rational(F(3)))
    assert orbit.locate(inside) is Membership.YES
    assert orbit.locate(away) is Membership.NO
    assert orbit.certify_in(touching)
    orbit.push(0)  # 3/2
    assert orbit.certify_in(touching)
    assert orbit.certify_in(inside)


def test_peek_matches_push():
    ctx = BetaContext.create(2, parse_beta("auto", 2), 2)
    orbit = OrbitPoint(ctx, F(9, 10))
    ahead = orbit.peek(1)
    orbit.push(1)
    assert orbit.ball() == ahead


def test_orbit_value_agrees_with_engine():
    ctx = BetaContext.create(2, parse_beta("auto", 1), 1)
    digits = [0, 1, 2, 1, 0, 1]
    orbit = OrbitPoint(ctx, F(1))
    orbit.extend(digits)
    ref = CertifiedReal.from_rational(1)
    for d in digits:
        ref = ctx.beta * ref - d
    assert decide(orbit_value(ctx, F(1), digits), ref) is Ordering.EQUAL
    assert str(orbit.word_so_far) == "012101"
