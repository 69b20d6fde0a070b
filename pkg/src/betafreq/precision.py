"""Certified real arithmetic.

Values are carried as dyadic balls ``[(mid - rad) / 2**prec, (mid + rad) / 2**prec]``
with integer ``mid`` and ``rad``.  A :class:`CertifiedReal` remembers how it was
built (an exact rational, a polynomial root, or an expression over other
certified reals) so it can be re-evaluated at any precision.  Comparisons never
guess: :func:`compare` answers ``UNDECIDED`` when enclosures overlap and
:func:`decide` escalates precision, finishing with an exact sign test when both
sides are rational functions of the same algebraic number.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

import gmpy2
import mpmath
from mpmath import iv

from . import _poly
from .errors import MultipleSignChanges, NoSignChange, ParseError, PrecisionExhausted

DEFAULT_PRECISION = int(os.environ.get("BETAFREQ_PRECISION", "128"))
ESCALATION_CAP = 1 << 16


class Ordering(enum.Enum):
    LESS = "less"
    GREATER = "greater"
    EQUAL = "equal"
    UNDECIDED = "undecided"


class Membership(enum.Enum):
    YES = "yes"
    NO = "no"
    UNDECIDED = "undecided"


def parse_rational(text: Union[str, int, Fraction]) -> Fraction:
    """Parse ``"3/2"``, ``"0.8"`` or ``"2"`` into an exact rational."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    try:
        value = Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"not an exact rational: {text!r}") from exc
    return value


def _ceil_shift(x: int, s: int) -> int:
    return -((-x) >> s)


# --------------------------------------------------------------------------- balls


@dataclass(frozen=True, slots=True)
class Ball:
    """Closed dyadic interval ``[(mid - rad) / 2**prec, (mid + rad) / 2**prec]``."""

    mid: int
    rad: int
    prec: int

    @classmethod
    def exact(cls, q, prec: int) -> "Ball":
        q = Fraction(q)
        num = q.numerator << prec if prec >= 0 else q.numerator
        den = q.denominator if prec >= 0 else q.denominator << -prec
        mid, rem = divmod(num, den)
        return cls(int(mid), 0 if rem == 0 else 1, prec)

    def lower(self) -> Fraction:
        return Fraction(self.mid - self.rad, 1 << self.prec)

    def upper(self) -> Fraction:
        return Fraction(self.mid + self.rad, 1 << self.prec)

    def midpoint(self) -> Fraction:
        return Fraction(self.mid, 1 << self.prec)

    def radius(self) -> Fraction:
        return Fraction(self.rad, 1 << self.prec)

    def rescale(self, prec: int) -> "Ball":
        s = self.prec - prec
        if s == 0:
            return self
        if s < 0:
            return Ball(self.mid << -s, self.rad << -s, prec)
        return Ball(self.mid >> s, _ceil_shift(self.rad, s) + 1, prec)

    def sign(self):
        """+1, -1, or ``None`` when the ball touches zero (0 for the exact zero)."""
        if self.mid - self.rad > 0:
            return 1
        if self.mid + self.rad < 0:
            return -1
        if self.mid == 0 and self.rad == 0:
            return 0
        return None

    def __neg__(self) -> "Ball":
        return Ball(-self.mid, self.rad, self.prec)

    def add(self, other: "Ball", prec: int) -> "Ball":
        q = max(self.prec, other.prec)
        a, b = self.rescale(q), other.rescale(q)
        return Ball(a.mid + b.mid, a.rad + b.rad, q).rescale(prec)

    def sub(self, other: "Ball", prec: int) -> "Ball":
        return self.add(-other, prec)

    def mul(self, other: "Ball", prec: int) -> "Ball":
        am, ar, bm, br = self.mid, self.rad, other.mid, other.rad
        mid = am * bm
        rad = abs(am) * br + abs(bm) * ar + ar * br
        return Ball(mid, rad, self.prec + other.prec).rescale(prec)

    def div(self, other: "Ball", prec: int) -> "Ball":
        am, ar, bm, br = self.mid, self.rad, other.mid, other.rad
        if abs(bm) <= br:
            raise ZeroDivisionError("divisor ball contains zero")
        e = prec + other.prec - self.prec
        num = am << e if e >= 0 else am
        den = bm if e >= 0 else bm << -e
        mid = num // den
        err_num = ar * abs(bm) + abs(am) * br
        err_den = abs(bm) * (abs(bm) - br)
        if e >= 0:
            err_num <<= e
        else:
            err_den <<= -e
        rad = -((-err_num) // err_den) + 1
        return Ball(int(mid), int(rad), prec)

    def pow(self, k: int, prec: int) -> "Ball":
        if k < 0:
            raise ValueError("negative exponent")
        work = prec + 2 * k.bit_length() + 8
        result = Ball(1 << work, 0, work)
        base = self.rescale(work) if self.prec < work else self
        while k:
            if k & 1:
                result = result.mul(base, work)
            k >>= 1
            if k:
                base = base.mul(base, work)
        return result.rescale(prec)


def _ball_to_iv(b: Ball):
    """Interval containing the ball, rounded outward to the current ``iv.prec``."""
    lo_m, hi_m = b.mid - b.rad, b.mid + b.rad
    # build the endpoints exactly; the interval constructor then rounds outward
    with mpmath.workprec(max(abs(lo_m).bit_length(), abs(hi_m).bit_length(), 1) + 8):
        lo = mpmath.mpf((lo_m, -b.prec))
        hi = mpmath.mpf((hi_m, -b.prec))
    return iv.mpf([lo, hi])


def _raw_to_fraction(raw) -> Fraction:
    sign, man, exp = raw[0], int(raw[1]), raw[2]
    val = Fraction(man) * (Fraction(2) ** exp)
    return -val if sign else val


def _iv_to_ball(x, prec: int) -> Ball:
    lo_raw, hi_raw = x._mpi_
    lo = _raw_to_fraction(lo_raw)
    hi = _raw_to_fraction(hi_raw)
    lo_i = math.floor(lo * (1 << prec))
    hi_i = math.ceil(hi * (1 << prec))
    mid = (lo_i + hi_i) // 2
    return Ball(mid, max(hi_i - mid, mid - lo_i), prec)


# --------------------------------------------------------------------------- exact forms


class _NoForm(Exception):
    pass


class AlgebraicForm:
    """Exact value ``num(beta) / den(beta)`` with ``beta`` a root given by a descriptor.

    Polynomials are reduced modulo the descriptor's polynomial, which vanishes at
    ``beta``.  A form without a root is a plain rational.  Only used to settle
    ties that numerical escalation cannot separate.
    """

    __slots__ = ("root", "num", "den")

    def __init__(self, root, num, den=(Fraction(1),)):
        if root is not None and root.is_exact:
            value = _poly.evaluate(num, root.exact_value) / _poly.evaluate(den, root.exact_value)
            root, num, den = None, (value,), (Fraction(1),)
        self.root = root
        if root is not None:
            num = root.reduce(num)
            den = root.reduce(den)
        self.num = tuple(Fraction(a) for a in _poly.trim(num))
        self.den = tuple(Fraction(a) for a in _poly.trim(den))

    @classmethod
    def constant(cls, q) -> "AlgebraicForm":
        return cls(None, (Fraction(q),))

    @classmethod
    def generator(cls, root) -> "AlgebraicForm":
        return cls(root, (Fraction(0), Fraction(1)))

    @property
    def is_rational(self) -> bool:
        return self.root is None

    def rational_value(self) -> Fraction:
        return self.num[0] / self.den[0]

    def _unify(self, other: "AlgebraicForm"):
        if self.root is None:
            return other.root
        if other.root is None or other.root.key == self.root.key:
            return self.root
        raise _NoForm

    def __add__(self, other: "AlgebraicForm") -> "AlgebraicForm":
        root = self._unify(other)
        num = _poly.padd(_poly.pmul(self.num, other.den), _poly.pmul(other.num, self.den))
        return AlgebraicForm(root, num, _poly.pmul(self.den, other.den))

    def __neg__(self) -> "AlgebraicForm":
        return AlgebraicForm(self.root, [-a for a in self.num], self.den)

    def __sub__(self, other: "AlgebraicForm") -> "AlgebraicForm":
        return self + (-other)

    def __mul__(self, other: "AlgebraicForm") -> "AlgebraicForm":
        root = self._unify(other)
        return AlgebraicForm(root, _poly.pmul(self.num, other.num), _poly.pmul(self.den, other.den))

    def __truediv__(self, other: "AlgebraicForm") -> "AlgebraicForm":
        root = self._unify(other)
        if other.sign() == 0:
            raise ZeroDivisionError("exact division by zero")
        return AlgebraicForm(root, _poly.pmul(self.num, other.den), _poly.pmul(self.den, other.num))

    def pow(self, k: int) -> "AlgebraicForm":
        result = AlgebraicForm.constant(1)
        base = self if k >= 0 else AlgebraicForm.constant(1) / self
        k = abs(k)
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def sign(self) -> int:
        if self.root is None:
            v = self.rational_value()
            return (v > 0) - (v < 0)
        return self.root.sign_of(self.num) * self.root.sign_of(self.den)


# --------------------------------------------------------------------------- roots


@dataclass(frozen=True)
class RootDescriptor:
    """A real root of an integer polynomial, pinned down by an isolating interval.

    ``coefficients`` are listed highest degree first.  The polynomial changes
    sign exactly once on the open interval ``(lo, hi)``; a degenerate interval
    ``lo == hi`` means the root is that rational number.
    """

    coefficients: tuple
    lo: Fraction
    hi: Fraction
    monotone: bool = True
    _state: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        poly = _poly.from_highest(self.coefficients)
        state = {"poly": poly, "lo": Fraction(self.lo), "hi": Fraction(self.hi)}
        if self.lo != self.hi:
            s = _poly.sign_at(poly, self.lo)
            if s == 0 or s * _poly.sign_at(poly, self.hi) >= 0:
                raise NoSignChange(f"no sign change of {self.coefficients} on ({self.lo}, {self.hi})")
            state["sign_lo"] = s
        object.__setattr__(self, "_state", state)

    @property
    def key(self):
        return (self.coefficients, self.lo, self.hi)

    @property
    def poly(self) -> list[int]:
        return self._state["poly"]

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi or self._state["lo"] == self._state["hi"]

    @property
    def exact_value(self) -> Fraction:
        return self._state["lo"]

    @property
    def degree(self) -> int:
        return len(self.poly) - 1

    def bracket(self, prec: int) -> tuple[Fraction, Fraction]:
        """Current isolating interval refined to width at most ``2**-prec``."""
        st = self._state
        width = Fraction(1, 1 << prec) if prec >= 0 else Fraction(1 << -prec)
        if st["hi"] - st["lo"] <= width:
            return st["lo"], st["hi"]
        self._bisect_to(Fraction(1, 1 << 24))
        if st["hi"] - st["lo"] > width and prec > 24:
            self._newton_to(prec)
        self._bisect_to(width)
        return st["lo"], st["hi"]

    def _bisect_to(self, width: Fraction):
        st = self._state
        poly = st["poly"]
        while st["hi"] - st["lo"] > width:
            mid = (st["lo"] + st["hi"]) / 2
            s = _poly.sign_at(poly, mid)
            if s == 0:
                st["lo"] = st["hi"] = mid
                return
            if s == st["sign_lo"]:
                st["lo"] = mid
            else:
                st["hi"] = mid

    def _newton_to(self, prec: int):
        st = self._state
        terms = [(i, int(a)) for i, a in enumerate(st["poly"]) if a]
        target = prec + 2
        with mpmath.workprec(64):
            x = mpmath.mpf(st["lo"].numerator) / st["lo"].denominator
            x += (mpmath.mpf(st["hi"].numerator) / st["hi"].denominator - x) / 2
        work = 64
        while True:
            work = min(2 * work, target + 32)
            with mpmath.workprec(work):
                x = mpmath.mpf(x)
                for _ in range(2):
                    val, der = _mp_eval(terms, x)
                    if der == 0:
                        return
                    x = x - val / der
            if work >= target + 32:
                break
        man, exp = x.man_exp
        centre = Fraction(int(man)) * Fraction(2) ** int(exp)
        eps = Fraction(1, 1 << (target + 1))
        a = max(centre - eps, st["lo"])
        b = min(centre + eps, st["hi"])
        if a >= b:
            return
        sa = _poly.sign_at(st["poly"], a)
        sb = _poly.sign_at(st["poly"], b)
        if sa == 0:
            st["lo"] = st["hi"] = a
        elif sb == 0:
            st["lo"] = st["hi"] = b
        elif sa == st["sign_lo"] and sb == -st["sign_lo"]:
            st["lo"], st["hi"] = a, b

    def ball(self, prec: int) -> Ball:
        lo, hi = self.bracket(prec + 1)
        if lo == hi:
            return Ball.exact(lo, prec)
        lo_i = math.floor(lo * (1 << prec))
        hi_i = math.ceil(hi * (1 << prec))
        mid = (lo_i + hi_i) // 2
        return Ball(mid, max(hi_i - mid, mid - lo_i), prec)

    def reduce(self, num: Sequence) -> list:
        num = _poly.trim([Fraction(a) for a in num])
        if len(num) <= self.degree:
            return num
        return _poly.prem(num, self.poly)

    def sign_of(self, g: Sequence) -> int:
        """Exact sign of the rational polynomial ``g`` evaluated at the root."""
        g = self.reduce(g)
        if _poly.degree(g) < 0:
            return 0
        if self.is_exact:
            v = _poly.evaluate(g, self.exact_value)
            return (v > 0) - (v < 0)
        gi = _poly.primitive(g)
        scale_sign = 1 if (Fraction(g[-1]) > 0) == (gi[-1] > 0) else -1
        prec = 64
        gcd_checked = False
        while prec <= ESCALATION_CAP:
            s = _ball_poly(gi, self.ball(prec + 16), prec).sign()
            if s is not None and s != 0:
                return s * scale_sign
            if not gcd_checked and prec >= 256:
                gcd_checked = True
                h = _poly.primitive(_poly.pgcd(gi, self.poly))
                if _poly.degree(h) >= 1:
                    lo, hi = self._state["lo"], self._state["hi"]
                    if lo == hi or _poly.sign_at(h, lo) * _poly.sign_at(h, hi) <= 0:
                        return 0
            prec *= 2
        raise PrecisionExhausted("cannot decide sign at algebraic root")

    def scaled(self, s) -> "RootDescriptor":
        """Descriptor of ``s * root`` for a positive rational ``s``."""
        s = Fraction(s)
        if s <= 0:
            raise ValueError("scale must be positive")
        poly = self.poly
        d = len(poly) - 1
        u, v = s.numerator, s.denominator
        # root' = s * root is a zero of sum c_i (x/s)^i, times u^d
        new = [c * v**i * u ** (d - i) for i, c in enumerate(poly)]
        new = _poly.primitive(new)
        lo, hi = self._state["lo"], self._state["hi"]
        if lo == hi:
            return exact_root(lo * s)
        return RootDescriptor(tuple(_poly.to_highest(new)), lo * s, hi * s, self.monotone)

    def shifted(self, t) -> "RootDescriptor":
        """Descriptor of ``root + t`` for a rational ``t``."""
        t = Fraction(t)
        lo, hi = self._state["lo"], self._state["hi"]
        if lo == hi:
            return exact_root(lo + t)
        new = _poly.primitive(_poly.taylor_shift(self.poly, -t))
        return RootDescriptor(tuple(_poly.to_highest(new)), lo + t, hi + t, self.monotone)


def _mp_eval(terms, x):
    """Value and derivative of a sparse polynomial at an mpmath number."""
    val = mpmath.mpf(0)
    der = mpmath.mpf(0)
    for i, a in terms:
        if i == 0:
            val += a
            continue
        p = x ** (i - 1)
        der += a * i * p
        val += a * p * x
    return val, der


def exact_root(q) -> RootDescriptor:
    q = Fraction(q)
    return RootDescriptor((q.denominator, -q.numerator), q, q, True)


def _ball_poly(c: Sequence[int], x: Ball, prec: int) -> Ball:
    """Evaluate an integer polynomial (lowest first) on a ball."""
    work = x.prec
    nonzero = [i for i, a in enumerate(c) if a]
    if len(nonzero) * 4 < len(c):
        total = Ball(0, 0, work)
        power = Ball(1 << work, 0, work)
        last = 0
        for i in nonzero:
            if i > last:
                power = power.mul(x.pow(i - last, work), work)
                last = i
            total = total.add(Ball(c[i] * power.mid, abs(c[i]) * power.rad, work), work)
        return total.rescale(prec)
    acc = Ball(c[-1] << work, 0, work)
    for a in reversed(c[:-1]):
        acc = acc.mul(x, work).add(Ball(a << work, 0, work), work)
    return acc.rescale(prec)


def _isolate_all(c: list[int], a: Fraction, b: Fraction, depth: int = 0) -> list:
    """Vincent-Collins-Akritas bisection on a squarefree polynomial."""
    count = _poly.descartes_interval(c, a, b)
    if count == 0:
        return []
    if count == 1:
        return [(a, b)]
    if depth > 200:
        return [(a, b)] * count
    m = (a + b) / 2
    out = _isolate_all(c, a, m, depth + 1)
    if _poly.sign_at(c, m) == 0:
        out.append((m, m))
    out.extend(_isolate_all(c, m, b, depth + 1))
    return out


def _derivative_monotone(c: list[int], a: Fraction, b: Fraction) -> bool:
    dc = _poly.derivative(c)
    if _poly.degree(dc) <= 0:
        return True
    if _poly.descartes_halfline(dc, a) == 0:
        return True
    if len(dc) <= 64:
        return _poly.descartes_interval(dc, a, b) == 0
    return False


def isolate_root(coefficients: Sequence[int], search_interval) -> RootDescriptor:
    """Certify a unique sign-changing root of an integer polynomial on an open interval.

    ``coefficients`` are listed highest degree first, so ``[1, -1, -1]`` is
    ``x**2 - x - 1``.
    """
    coeffs = [int(a) for a in coefficients]
    if any(a != b for a, b in zip(coeffs, coefficients)):
        raise ParseError("coefficients must be integers")
    c = _poly.from_highest(coeffs)
    if _poly.degree(c) < 1:
        raise NoSignChange("constant polynomial has no root")
    a, b = (parse_rational(t) for t in search_interval)
    if not a < b:
        raise ParseError(f"empty search interval ({a}, {b})")
    if _poly.degree(c) == 1:
        root = Fraction(-c[0], c[1])
        if a < root < b:
            return exact_root(root)
        raise NoSignChange(f"root {root} outside ({a}, {b})")
    sa, sb = _poly.sign_at(c, a), _poly.sign_at(c, b)
    if sa * sb < 0 and _poly.descartes_halfline(c, a) == 1:
        return RootDescriptor(tuple(_poly.to_highest(c)), a, b, _derivative_monotone(c, a, b))
    sqf = _poly.squarefree(c)
    roots = _isolate_all(sqf, a, b)
    if not roots:
        raise NoSignChange(f"no root of {tuple(coeffs)} in ({a}, {b})")
    if len(roots) > 1:
        raise MultipleSignChanges(
            f"{len(roots)} roots of {tuple(coeffs)} in ({a}, {b})", evidence=roots
        )
    lo, hi = roots[0]
    if lo == hi:
        return exact_root(lo)
    if _poly.sign_at(c, lo) * _poly.sign_at(c, hi) >= 0:
        raise NoSignChange(f"root of even multiplicity in ({a}, {b}); no sign change")
    if sa * sb < 0:
        return RootDescriptor(tuple(_poly.to_highest(c)), a, b, _derivative_monotone(c, a, b))
    return RootDescriptor(tuple(_poly.to_highest(c)), lo, hi, _derivative_monotone(c, lo, hi))


# --------------------------------------------------------------------------- expression nodes


class _Node:
    __slots__ = ("_balls", "_form", "_form_ready")

    def __init__(self):
        self._balls = {}
        self._form_ready = False
        self._form = None

    def ball(self, prec: int) -> Ball:
        b = self._balls.get(prec)
        if b is None:
            b = self._compute(prec)
            if len(self._balls) > 8:
                self._balls.clear()
            self._balls[prec] = b
        return b

    def form(self):
        if not self._form_ready:
            try:
                self._form = self._compute_form()
            except _NoForm:
                self._form = None
            self._form_ready = True
        return self._form

    def _compute(self, prec: int) -> Ball:
        raise NotImplementedError

    def _compute_form(self):
        return None

    def describe(self) -> str:
        return type(self).__name__


class _Rational(_Node):
    __slots__ = ("q",)

    def __init__(self, q: Fraction):
        super().__init__()
        self.q = q

    def _compute(self, prec):
        return Ball.exact(self.q, prec)

    def _compute_form(self):
        return AlgebraicForm.constant(self.q)

    def describe(self):
        return f"rational {self.q}"


class _RootNode(_Node):
    __slots__ = ("desc",)

    def __init__(self, desc: RootDescriptor):
        super().__init__()
        self.desc = desc

    def _compute(self, prec):
        return self.desc.ball(prec)

    def _compute_form(self):
        return AlgebraicForm.generator(self.desc)

    def describe(self):
        return f"root of {self.desc.coefficients} in ({self.desc.lo}, {self.desc.hi})"


_BINARY = {
    "add": lambda a, b, p: a.add(b, p),
    "sub": lambda a, b, p: a.sub(b, p),
    "mul": lambda a, b, p: a.mul(b, p),
    "div": lambda a, b, p: a.div(b, p),
}


class _Op(_Node):
    __slots__ = ("op", "args")

    def __init__(self, op: str, *args):
        super().__init__()
        self.op = op
        self.args = args

    def _combine(self, q: int, prec: int) -> Ball:
        op = self.op
        if op == "neg":
            return (-self.args[0].ball(q)).rescale(prec)
        if op == "pow":
            return self.args[0].ball(q).pow(self.args[1], prec)
        return _BINARY[op](self.args[0].ball(q), self.args[1].ball(q), prec)

    def _compute(self, prec):
        guard = 32
        while True:
            try:
                result = self._combine(prec + guard, prec)
            except ZeroDivisionError:
                if guard > ESCALATION_CAP:
                    raise
                guard *= 2
                continue
            if result.rad <= 4 or guard > 4 * prec + ESCALATION_CAP // 4:
                return result
            guard += result.rad.bit_length() + 8

    def _compute_form(self):
        op = self.op
        if op == "pow":
            base = self.args[0].form()
            if base is None:
                raise _NoForm
            return base.pow(self.args[1])
        forms = [a.form() for a in self.args]
        if any(f is None for f in forms):
            raise _NoForm
        if op == "neg":
            return -forms[0]
        if op == "add":
            return forms[0] + forms[1]
        if op == "sub":
            return forms[0] - forms[1]
        if op == "mul":
            return forms[0] * forms[1]
        return forms[0] / forms[1]

    def describe(self):
        return f"{self.op}({', '.join(a.describe() for a in self.args if isinstance(a, _Node))})"


class _Func(_Node):
    __slots__ = ("name", "arg")

    def __init__(self, name: str, arg: _Node):
        super().__init__()
        self.name = name
        self.arg = arg

    def _compute(self, prec):
        guard = 32
        fn = getattr(iv, self.name)
        while True:
            q = prec + guard
            x = self.arg.ball(q)
            saved = iv.prec
            iv.prec = q + 16
            try:
                if self.name == "log" and x.mid - x.rad <= 0:
                    if x.mid + x.rad <= 0:
                        raise ValueError("log of a non-positive number")
                    guard *= 2
                    if guard > ESCALATION_CAP:
                        raise PrecisionExhausted("cannot separate log argument from zero")
                    continue
                result = _iv_to_ball(fn(_ball_to_iv(x)), prec)
            finally:
                iv.prec = saved
            if result.rad <= 4 or guard > 4 * prec + 4096:
                return result
            guard += result.rad.bit_length() + 8

    def describe(self):
        return f"{self.name}({self.arg.describe()})"


# --------------------------------------------------------------------------- public value type


Number = Union["CertifiedReal", int, Fraction, str]


class CertifiedReal:
    """A real number with a rigorous enclosure at any requested precision.

    ``value`` and ``radius`` report the enclosure at the working precision
    ``prec`` (bits).  Arithmetic builds a new value whose provenance records the
    operation, so :meth:`enclose` can recompute it at higher precision.
    """

    __slots__ = ("_node", "prec")

    def __init__(self, node: _Node, prec: int | None = None):
        self._node = node
        self.prec = DEFAULT_PRECISION if prec is None else int(prec)

    # construction --------------------------------------------------------
    @classmethod
    def from_rational(cls, q, prec: int | None = None) -> "CertifiedReal":
        return cls(_Rational(parse_rational(q) if isinstance(q, str) else Fraction(q)), prec)

    @classmethod
    def from_root(cls, desc: RootDescriptor, prec: int | None = None) -> "CertifiedReal":
        if desc.is_exact:
            return cls(_Rational(desc.exact_value), prec)
        return cls(_RootNode(desc), prec)

    @classmethod
    def coerce(cls, x: Number) -> "CertifiedReal":
        if isinstance(x, CertifiedReal):
            return x
        if isinstance(x, (int, Fraction)):
            return cls.from_rational(Fraction(x))
        if isinstance(x, str):
            return cls.from_rational(parse_rational(x))
        raise TypeError(f"cannot certify {type(x).__name__}; use an exact rational")

    def with_precision(self, prec: int) -> "CertifiedReal":
        return CertifiedReal(self._node, prec)

    # enclosures ----------------------------------------------------------
    def enclose(self, prec: int | None = None) -> Ball:
        return self._node.ball(self.prec if prec is None else int(prec))

    @property
    def value(self) -> Fraction:
        return self.enclose().midpoint()

    @property
    def radius(self) -> Fraction:
        return self.enclose().radius()

    def lower(self, prec: int | None = None) -> Fraction:
        return self.enclose(prec).lower()

    def upper(self, prec: int | None = None) -> Fraction:
        return self.enclose(prec).upper()

    @property
    def exact_form(self):
        return self._node.form()

    @property
    def rational(self):
        """The exact rational value when the provenance is a rational literal."""
        node = self._node
        return node.q if isinstance(node, _Rational) else None

    @property
    def root(self):
        node = self._node
        return node.desc if isinstance(node, _RootNode) else None

    @property
    def provenance(self) -> str:
        return self._node.describe()

    def __float__(self) -> float:
        return float(self.enclose(64).midpoint())

    def format(self, decimals: int) -> str:
        """Correctly rounded decimal rendering (rounds half away from zero)."""
        exact = self.rational
        if exact is not None:
            return _round_decimal(exact, decimals)
        prec = max(self.prec, int(decimals * 3.33) + 16)
        while prec <= ESCALATION_CAP:
            b = self.enclose(prec)
            lo, hi = _round_decimal(b.lower(), decimals), _round_decimal(b.upper(), decimals)
            if lo == hi:
                return lo
            prec *= 2
        return _round_decimal(self.enclose(prec // 2).midpoint(), decimals)

    def __repr__(self) -> str:
        b = self.enclose()
        return f"CertifiedReal({float(b.midpoint())!r} ± {float(b.radius()):.2e})"

    def __str__(self) -> str:
        return self.format(12)

    # arithmetic ----------------------------------------------------------
    def _bin(self, op: str, other: Number, reflected: bool = False) -> "CertifiedReal":
        try:
            other = CertifiedReal.coerce(other)
        except TypeError:
            return NotImplemented
        a, b = (other, self) if reflected else (self, other)
        return CertifiedReal(_Op(op, a._node, b._node), max(self.prec, other.prec))

    def __add__(self, other):
        return self._bin("add", other)

    def __radd__(self, other):
        return self._bin("add", other, True)

    def __sub__(self, other):
        return self._bin("sub", other)

    def __rsub__(self, other):
        return self._bin("sub", other, True)

    def __mul__(self, other):
        return self._bin("mul", other)

    def __rmul__(self, other):
        return self._bin("mul", other, True)

    def __truediv__(self, other):
        return self._bin("div", other)

    def __rtruediv__(self, other):
        return self._bin("div", other, True)

    def __neg__(self):
        return CertifiedReal(_Op("neg", self._node), self.prec)

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return 1 / self ** (-k)
        return CertifiedReal(_Op("pow", self._node, k), self.prec)

    def log(self) -> "CertifiedReal":
        return CertifiedReal(_Func("log", self._node), self.prec)

    def exp(self) -> "CertifiedReal":
        return CertifiedReal(_Func("exp", self._node), self.prec)

    def sqrt(self) -> "CertifiedReal":
        return CertifiedReal(_Func("sqrt", self._node), self.prec)


def _round_decimal(q: Fraction, decimals: int) -> str:
    scaled = q * 10**decimals
    sign = "-" if scaled < 0 else ""
    scaled = abs(scaled)
    n = math.floor(scaled + Fraction(1, 2))
    text = str(n).rjust(decimals + 1, "0")
    if decimals:
        text = text[:-decimals] + "." + text[-decimals:]
    return sign + text if n else text


def refine(r: RootDescriptor, target_radius) -> CertifiedReal:
    """Certified value of the root with enclosure radius at most ``target_radius``."""
    target = Fraction(target_radius) if not isinstance(target_radius, float) else Fraction(repr(target_radius))
    if target <= 0:
        raise ValueError("target radius must be positive")
    if r.is_exact:
        return CertifiedReal.from_rational(r.exact_value)
    prec = max(8, math.ceil(-math.log2(target)) + 3) if target < 1 else 8
    cr = CertifiedReal.from_root(r, prec)
    while cr.radius > target:
        prec += 4
        cr = cr.with_precision(prec)
    return cr


def compare(a: Number, b: Number, prec: int | None = None) -> Ordering:
    """Three-way comparison at a single precision; never escalates."""
    a, b = CertifiedReal.coerce(a), CertifiedReal.coerce(b)
    p = max(a.prec, b.prec) if prec is None else prec
    x, y = a.enclose(p), b.enclose(p)
    if x.mid + x.rad < y.mid - y.rad:
        return Ordering.LESS
    if x.mid - x.rad > y.mid + y.rad:
        return Ordering.GREATER
    return Ordering.UNDECIDED


def decide(a: Number, b: Number, *, start: int | None = None, cap: int = ESCALATION_CAP) -> Ordering:
    """Compare with precision doubling, settling exact ties algebraically.

    Returns LESS, GREATER or EQUAL; raises :class:`PrecisionExhausted` if the
    enclosures keep overlapping and no exact form is available.
    """
    a, b = CertifiedReal.coerce(a), CertifiedReal.coerce(b)
    prec = start or max(a.prec, b.prec, DEFAULT_PRECISION)
    tried_exact = False
    while prec <= cap:
        result = compare(a, b, prec)
        if result is not Ordering.UNDECIDED:
            return result
        if not tried_exact and prec >= 256:
            tried_exact = True
            fa, fb = a.exact_form, b.exact_form
            if fa is not None and fb is not None:
                try:
                    s = (fa - fb).sign()
                except _NoForm:
                    s = None
                if s is not None:
                    return {-1: Ordering.LESS, 0: Ordering.EQUAL, 1: Ordering.GREATER}[s]
        prec *= 2
    raise PrecisionExhausted(f"could not separate {a!r} and {b!r} up to {cap} bits")


def sign(a: Number) -> int:
    return {Ordering.LESS: -1, Ordering.EQUAL: 0, Ordering.GREATER: 1}[decide(a, 0)]


def certified_less(a: Number, b: Number) -> bool:
    return decide(a, b) is Ordering.LESS
