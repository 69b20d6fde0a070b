from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from betafreq.errors import MultipleSignChanges, NoSignChange, PrecisionExhausted
from betafreq.precision import (
    Ball,
    CertifiedReal,
    Ordering,
    _Node,
    compare,
    decide,
    isolate_root,
    parse_rational,
    refine,
)

with mpmath.workdps(80):
    PHI = (1 + mpmath.sqrt(5)) / 2


@pytest.fixture(autouse=True)
def _mp_digits():
    with mpmath.workdps(80):
        yield


class _FixedBall(_Node):
    """A value known only to a fixed accuracy, for exercising ``compare``."""

    __slots__ = ("b",)

    def __init__(self, b: Ball):
        super().__init__()
        self.b = b

    def _compute(self, prec):
        return self.b.rescale(prec)


def fuzzy(mid: str, rad: str) -> CertifiedReal:
    prec = 20
    m, r = parse_rational(mid), parse_rational(rad)
    return CertifiedReal(_FixedBall(Ball(round(m * 2**prec), int(r * 2**prec) + 1, prec)))


def encloses(cr: CertifiedReal, value, prec: int) -> bool:
    b = cr.enclose(prec)
    return mpmath.mpf(b.lower().numerator) / b.lower().denominator <= value <= mpmath.mpf(b.upper().numerator) / b.upper().denominator


# --------------------------------------------------------------------------- root isolation


def test_golden_ratio_root():
    r = isolate_root([1, -1, -1], (1, 2))
    assert abs(float(CertifiedReal.from_root(r)) - 1.6180339887) < 1e-9


def test_normality_constant_root():
    r = isolate_root([1, -1, -2, 1], (1, 2))
    assert CertifiedReal.from_root(r).format(5) == "1.80194"


def test_linear_root_is_exact():
    r = isolate_root([1, -2], (1, 3))
    cr = CertifiedReal.from_root(r)
    assert cr.rational == 2
    assert cr.radius == 0


def test_no_sign_change():
    with pytest.raises(NoSignChange):
        isolate_root([1, 0, 1], (0, 1))


def test_multiple_sign_changes_report_evidence():
    with pytest.raises(MultipleSignChanges) as info:
        isolate_root([1, 0, -1], (-2, 2))
    assert len(info.value.evidence) == 2


def test_even_multiplicity_has_no_sign_change():
    with pytest.raises(NoSignChange):
        isolate_root([1, -2, 1], (0, 3))


def test_root_residual_bound_for_critical_polynomials():
    # |f(m)| <= max|f'| * radius on the enclosure, for a spread of n
    for n in (1, 2, 5, 17, 100, 400, 1000):
        coeffs = [1, -1] + [0] * (n - 1) + [-1]
        cr = CertifiedReal.from_root(isolate_root(coeffs, (1, 2)), 256)
        b = cr.enclose(256)
        m, rad = b.midpoint(), b.radius()
        f = m ** (n + 1) - m**n - 1
        hi = b.upper()
        deriv_bound = (n + 1) * hi**n + n * hi ** (n - 1)
        assert abs(f) <= deriv_bound * rad


# --------------------------------------------------------------------------- refine


def test_refine_golden_to_thirty_decimals():
    cr = refine(isolate_root([1, -1, -1], (1, 2)), Fraction(1, 10**30))
    assert cr.radius <= Fraction(1, 10**30)
    assert abs(mpmath.mpf(cr.value.numerator) / cr.value.denominator - PHI) < mpmath.mpf(10) ** -30


def test_refine_beta_2_prints_three_decimals():
    cr = refine(isolate_root([1, -1, 0, -1], (1, 2)), Fraction(1, 1000))
    assert cr.radius <= Fraction(1, 1000)
    assert abs(cr.value - Fraction(14656, 10000)) <= Fraction(1, 1000)
    assert cr.format(3) == "1.466"


def test_refine_exact_rational():
    cr = refine(isolate_root([2, -3], (1, 2)), Fraction(1, 10))
    assert cr.value == Fraction(3, 2)
    assert cr.radius == 0


@pytest.mark.parametrize("target", [Fraction(1, 2**10), Fraction(1, 2**100), Fraction(1, 10**50)])
def test_refine_encloses_root(target):
    cr = refine(isolate_root([1, -1, -1], (1, 2)), target)
    assert cr.radius <= target
    assert encloses(cr, PHI, cr.prec)


# --------------------------------------------------------------------------- comparisons


def test_compare_disjoint():
    assert compare(fuzzy("1", "1/10"), fuzzy("2", "1/10")) is Ordering.LESS
    assert compare(fuzzy("2", "1/10"), fuzzy("1", "1/10")) is Ordering.GREATER


def test_compare_overlapping_is_undecided():
    assert compare(fuzzy("1", "1/5"), fuzzy("11/10", "1/5")) is Ordering.UNDECIDED


def test_compare_golden_against_rational():
    phi = refine(isolate_root([1, -1, -1], (1, 2)), Fraction(1, 10**20))
    assert compare(phi, Fraction("1.618")) is Ordering.GREATER


def test_decide_settles_exact_tie_algebraically():
    phi = CertifiedReal.from_root(isolate_root([1, -1, -1], (1, 2)))
    assert decide(phi * phi, phi + 1) is Ordering.EQUAL
    assert decide(CertifiedReal.from_rational(Fraction(1, 3)) * 3, 1) is Ordering.EQUAL


def test_decide_gives_up_without_exact_form():
    x = fuzzy("1", "1/10")
    with pytest.raises(PrecisionExhausted):
        decide(x, 1, cap=512)


def test_log_and_exp_are_accurate():
    for q in (Fraction(2), Fraction(3, 7), Fraction(1000)):
        cr = CertifiedReal.from_rational(q).log()
        assert encloses(cr, mpmath.log(mpmath.mpf(q.numerator) / q.denominator), 200)
        cr = CertifiedReal.from_rational(q).exp() if q < 100 else None
        if cr is not None:
            assert encloses(cr, mpmath.exp(mpmath.mpf(q.numerator) / q.denominator), 200)


def test_format_rounds_correctly():
    assert CertifiedReal.from_rational(Fraction(1, 8)).format(2) == "0.13"
    assert CertifiedReal.from_rational(Fraction(-1, 8)).format(2) == "-0.13"
    assert CertifiedReal.from_rational(Fraction(2)).format(0) == "2"


def test_parse_rational_forms():
    assert parse_rational("3/7") == Fraction(3, 7)
    assert parse_rational("0.15") == Fraction(3, 20)
    assert parse_rational(4) == 4
    with pytest.raises(ValueError):
        parse_rational("abc")


# --------------------------------------------------------------------------- properties

_leaf = st.one_of(
    st.fractions(min_value=-10, max_value=10, max_denominator=50).map(CertifiedReal.from_rational),
    st.sampled_from([(1, -1, -1), (1, -1, 0, -1), (1, -1, -2, 1)]).map(
        lambda c: CertifiedReal.from_root(isolate_root(c, (1, 2)))
    ),
)


def _combine(children):
    return st.tuples(children, children, st.sampled_from(["add", "sub", "mul", "div", "log", "pow"])).map(
        lambda t: _apply(*t)
    )


def _apply(a, b, op):
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "pow":
        return a**3
    if op == "log":
        return (a * a + 1).log()
    # keep divisors away from zero
    return a / (b * b + 1)


dags = st.recursive(_leaf, _combine, max_leaves=8)


@given(dags, st.integers(min_value=32, max_value=200), st.integers(min_value=1, max_value=300))
def test_enclosures_refine_monotonically(x, p, extra):
    lo = x.enclose(p)
    hi = x.enclose(p + extra)
    assert lo.lower() <= hi.lower() and hi.upper() <= lo.upper()


@given(dags)
def test_radius_shrinks_with_precision(x):
    assert x.enclose(400).radius() <= x.enclose(100).radius()


@given(st.fractions(max_denominator=1000), st.fractions(max_denominator=1000))
def test_rational_arithmetic_encloses_exact_result(a, b):
    A, B = CertifiedReal.from_rational(a), CertifiedReal.from_rational(b)
    for value, exact in ((A + B, a + b), (A - B, a - b), (A * B, a * b)):
        ball = value.enclose(64)
        assert ball.lower() <= exact <= ball.upper()
