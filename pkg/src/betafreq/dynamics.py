"""Digit maps, interval geometry and admissibility.

The digit map ``T_k(y) = beta*y - k`` sends the value of an expansion to the
value of its shifted tail.  A digit sequence is a valid expansion of ``x``
exactly when every orbit point stays inside ``[0, M/(beta-1)]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from . import bounds
from .errors import DomainError, HypothesisViolated, InclusionViolated, ValidationError
from .precision import (
    AlgebraicForm,
    Ball,
    CertifiedReal,
    Membership,
    Ordering,
    PrecisionExhausted,
    _Node,
    _NoForm,
    compare,
    decide,
    parse_rational,
)

SHADOW_PRECISION = 384


# --------------------------------------------------------------------------- words


@dataclass(frozen=True)
class Word:
    """A finite digit sequence."""

    digits: tuple = ()

    def __post_init__(self):
        digits = tuple(int(d) for d in self.digits)
        if any(d < 0 for d in digits):
            raise ValidationError("digits must be non-negative")
        object.__setattr__(self, "digits", digits)

    def __len__(self) -> int:
        return len(self.digits)

    def __iter__(self):
        return iter(self.digits)

    def __getitem__(self, i):
        return self.digits[i]

    def __add__(self, other: "Word") -> "Word":
        return Word(self.digits + tuple(other))

    def count(self, k: int) -> int:
        return self.digits.count(k)

    def counts(self, M: int | None = None) -> tuple:
        size = (max(self.digits, default=-1) + 1) if M is None else M + 1
        out = [0] * size
        for d in self.digits:
            out[d] += 1
        return tuple(out)

    def __str__(self) -> str:
        return "".join(_DIGIT_CHARS[d] for d in self.digits)


_DIGIT_CHARS = "0123456789abcdefghijklmnopqrstuvwxyz"


# --------------------------------------------------------------------------- context


@dataclass(frozen=True, eq=False)
class BetaContext:
    """The parameters ``(M, beta, n)`` together with the checks they passed.

    ``flags`` records ``beta_gt_1``, ``beta_lt_2`` and ``beta_lt_beta_n``; the
    frequency constructions refuse to run unless all of them hold.
    """

    M: int
    beta: CertifiedReal
    n: int
    flags: dict = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def create(cls, M: int, beta, n: int = 1) -> "BetaContext":
        if int(M) != M or M < 1:
            raise ValidationError(f"M must be a positive integer, got {M!r}")
        if int(n) != n or n < 1:
            raise ValidationError(f"n must be a positive integer, got {n!r}")
        beta = CertifiedReal.coerce(beta)
        flags = {
            "beta_gt_1": _certified(beta, 1, Ordering.GREATER),
            "beta_lt_2": _certified(beta, 2, Ordering.LESS),
            "beta_lt_beta_n": _certified(beta, bounds.beta_n(int(n)), Ordering.LESS),
        }
        if not flags["beta_gt_1"]:
            raise DomainError("beta must exceed 1")
        return cls(int(M), beta, int(n), flags)

    @property
    def validated(self) -> bool:
        return all(self.flags.values())

    def require_validated(self):
        if not self.validated:
            failed = ", ".join(k for k, v in self.flags.items() if not v)
            raise HypothesisViolated(f"context not validated ({failed}); beta must lie in (1, beta_n)")

    @cached_property
    def upper(self) -> CertifiedReal:
        """Right endpoint ``M/(beta-1)`` of the admissible interval."""
        return self.M / (self.beta - 1)

    @cached_property
    def interval(self) -> "CertifiedInterval":
        return CertifiedInterval(CertifiedReal.from_rational(0), self.upper, "I")

    @cached_property
    def beta_rational(self):
        return self.beta.rational

    @cached_property
    def log2_beta(self) -> float:
        """Upper bound on log2(beta), used to size precision budgets."""
        return math.log2(float(self.beta.upper(64))) * (1 + 1e-9) + 1e-12

    def fixed_beta(self, prec: int) -> tuple[int, int]:
        key = ("beta", prec)
        if key not in self._cache:
            b = self.beta.enclose(prec)
            self._cache[key] = (b.mid, b.rad)
        return self._cache[key]

    def fixed_point(self, k: int) -> CertifiedReal:
        return k / (self.beta - 1)

    def check_digit(self, k: int):
        if int(k) != k or not 0 <= k <= self.M:
            raise ValidationError(f"digit {k!r} outside 0..{self.M}")


def _certified(a, b, want: Ordering) -> bool:
    try:
        return decide(a, b) is want
    except PrecisionExhausted:
        return False


# --------------------------------------------------------------------------- intervals


@dataclass(frozen=True)
class FixedInterval:
    """Integer enclosures of an interval's endpoints at scale ``2**-prec``.

    ``[inner_lo, inner_hi]`` lies inside the true interval and
    ``[outer_lo, outer_hi]`` contains it.
    """

    inner_lo: int
    inner_hi: int
    outer_lo: int
    outer_hi: int
    prec: int

    def locate(self, mid: int, rad: int) -> Membership:
        if mid - rad >= self.inner_lo and mid + rad <= self.inner_hi:
            return Membership.YES
        if mid + rad < self.outer_lo or mid - rad > self.outer_hi:
            return Membership.NO
        return Membership.UNDECIDED


@dataclass(frozen=True, eq=False)
class CertifiedInterval:
    """Closed interval with certified endpoints."""

    lo: CertifiedReal
    hi: CertifiedReal
    name: str = ""

    def contains(self, y, prec: int | None = None) -> Membership:
        y = CertifiedReal.coerce(y)
        p = prec or max(y.prec, self.lo.prec)
        return self.fixed(p).locate(*_mid_rad(y.enclose(p)))

    def decide_contains(self, y) -> bool:
        """Closed membership with escalation and exact tie-breaking."""
        y = CertifiedReal.coerce(y)
        left = decide(self.lo, y)
        if left is Ordering.GREATER:
            return False
        return decide(y, self.hi) is not Ordering.GREATER

    def strictly_inside(self, other: "CertifiedInterval") -> bool:
        """True when this interval lies in the interior of ``other``."""
        return decide(other.lo, self.lo) is Ordering.LESS and decide(self.hi, other.hi) is Ordering.LESS

    def inside(self, other: "CertifiedInterval") -> bool:
        return decide(other.lo, self.lo) is not Ordering.GREATER and decide(
            self.hi, other.hi
        ) is not Ordering.GREATER

    def fixed(self, prec: int) -> FixedInterval:
        cache = self.__dict__.setdefault("_fixed", {})
        if prec not in cache:
            lo, hi = self.lo.enclose(prec), self.hi.enclose(prec)
            cache[prec] = FixedInterval(
                lo.mid + lo.rad, hi.mid - hi.rad, lo.mid - lo.rad, hi.mid + hi.rad, prec
            )
        return cache[prec]

    def as_floats(self) -> tuple[float, float]:
        return float(self.lo), float(self.hi)

    def __repr__(self) -> str:
        lo, hi = self.as_floats()
        label = f"{self.name} " if self.name else ""
        return f"<{label}[{lo:.10g}, {hi:.10g}]>"


def _mid_rad(b: Ball) -> tuple[int, int]:
    return b.mid, b.rad


# --------------------------------------------------------------------------- maps


def apply_map(ctx: BetaContext, k: int, y, l: int = 1) -> CertifiedReal:
    """``T_k`` applied ``l`` times, computed through the fixed point in one step."""
    ctx.check_digit(k)
    if l < 1:
        raise ValidationError("repetition count must be at least 1")
    y = CertifiedReal.coerce(y)
    if k == 0:
        return ctx.beta**l * y
    fp = ctx.fixed_point(k)
    return fp + ctx.beta**l * (y - fp)


def eval_periodic(ctx: BetaContext, w: Sequence[int]) -> CertifiedReal:
    """Value of the purely periodic expansion ``(w)^infinity``."""
    digits = tuple(w)
    if not digits:
        raise ValidationError("periodic word must be nonempty")
    beta = ctx.beta
    num = CertifiedReal.from_rational(digits[0])
    for d in digits[1:]:
        num = num * beta + d
    return num / (beta ** len(digits) - 1)


def admissible_step(ctx: BetaContext, y, k: int, prec: int | None = None) -> Membership:
    """Whether ``T_k(y)`` stays in ``[0, M/(beta-1)]`` at the given precision.

    Boundary cases that the enclosure cannot settle are decided exactly when
    the value has an algebraic form; otherwise the answer stays UNDECIDED.
    """
    ctx.check_digit(k)
    y = CertifiedReal.coerce(y)
    image = ctx.beta * y - k
    where = ctx.interval.contains(image, prec)
    if where is Membership.UNDECIDED and image.exact_form is not None:
        try:
            return Membership.YES if ctx.interval.decide_contains(image) else Membership.NO
        except PrecisionExhausted:
            return Membership.UNDECIDED
    return where


class _OrbitNode(_Node):
    """Value of ``T_{a_j} o ... o T_{a_1}(x0)``, recomputed by Horner's rule."""

    __slots__ = ("ctx", "x0", "digits", "hints")
    FORM_LIMIT = 20000

    def __init__(self, ctx: BetaContext, x0: Fraction, digits, hints=()):
        super().__init__()
        self.ctx = ctx
        self.x0 = Fraction(x0)
        self.digits = bytes(digits)
        self.hints = tuple(hints)

    def _compute(self, prec):
        for h in self.hints:
            if h.prec >= prec:
                r = h.rescale(prec)
                if r.rad <= 8:
                    return r
        guard = 32
        L = len(self.digits)
        while True:
            work = prec + guard + math.ceil(L * self.ctx.log2_beta)
            bm, br = self.ctx.fixed_beta(work)
            y = Ball.exact(self.x0, work)
            mid, rad = y.mid, y.rad
            for d in self.digits:
                m = bm * mid
                rad = (abs(bm) * rad + abs(mid) * br + br * rad) >> work
                rad += 2
                mid = (m >> work) - (d << work)
            result = Ball(mid, rad, work).rescale(prec)
            if result.rad <= 8:
                return result
            guard += result.rad.bit_length() + 16

    def _compute_form(self):
        if len(self.digits) > self.FORM_LIMIT:
            raise _NoForm
        beta_rat = self.ctx.beta_rational
        if beta_rat is not None:
            y = self.x0
            for d in self.digits:
                y = beta_rat * y - d
            return AlgebraicForm.constant(y)
        b = self.ctx.beta.exact_form
        if b is None:
            raise _NoForm
        y = AlgebraicForm.constant(self.x0)
        for d in self.digits:
            y = y * b - AlgebraicForm.constant(d)
        return y

    def describe(self):
        return f"orbit of {self.x0} under {len(self.digits)} digits"


def orbit_value(ctx: BetaContext, x0, digits: Iterable[int], hints=()) -> CertifiedReal:
    """Certified value of the orbit point reached from ``x0`` after ``digits``."""
    return CertifiedReal(_OrbitNode(ctx, parse_rational(x0), bytes(digits), hints))


# --------------------------------------------------------------------------- geometry


@dataclass(frozen=True, eq=False)
class PairGeometry:
    """The named intervals attached to a digit pair ``k1 < k2``."""

    k1: int
    k2: int
    I_pair: CertifiedInterval
    S_pair: CertifiedInterval
    A_hi: CertifiedInterval
    A_lo: CertifiedInterval
    D_pair: CertifiedInterval
    D_global: CertifiedInterval


def global_state_interval(ctx: BetaContext) -> CertifiedInterval:
    key = "D_global"
    if key not in ctx._cache:
        M, n = ctx.M, ctx.n
        left = eval_periodic(ctx, (0, 1) + (0,) * (n - 1))
        right = eval_periodic(ctx, (M, M - 1) + (M,) * (n - 1))
        ctx._cache[key] = CertifiedInterval(
            ctx.beta * left - 1, ctx.beta * right - (M - 1), "D_global"
        )
    return ctx._cache[key]


def _raw_geometry(ctx: BetaContext, k1: int, k2: int) -> PairGeometry:
    n, beta = ctx.n, ctx.beta
    fp1, fp2 = ctx.fixed_point(k1), ctx.fixed_point(k2)
    I_pair = CertifiedInterval(fp1, fp2, "I_pair")
    S_pair = CertifiedInterval(
        k2 / beta + k1 / (beta * (beta - 1)), k1 / beta + k2 / (beta * (beta - 1)), "S_pair"
    )
    A_hi = CertifiedInterval(
        eval_periodic(ctx, (k1,) + (k2,) * n),
        eval_periodic(ctx, (k2, k1) + (k2,) * (n - 1)),
        "A_hi",
    )
    A_lo = CertifiedInterval(
        eval_periodic(ctx, (k1, k2) + (k1,) * (n - 1)),
        eval_periodic(ctx, (k2,) + (k1,) * n),
        "A_lo",
    )
    D_pair = CertifiedInterval(beta * A_lo.lo - k2, beta * A_hi.hi - k1, "D_pair")
    return PairGeometry(k1, k2, I_pair, S_pair, A_hi, A_lo, D_pair, global_state_interval(ctx))


def check_inclusions(ctx: BetaContext, k1: int, k2: int) -> dict:
    """Certified truth values of the strict inclusions the constructions rely on."""
    g = _raw_geometry(ctx, k1, k2)
    zero = CertifiedReal.from_rational(0)
    open_I = CertifiedInterval(zero, ctx.upper, "I")
    results = {}
    for name, test in (
        ("A_hi in int S_pair", lambda: g.A_hi.strictly_inside(g.S_pair)),
        ("A_lo in int S_pair", lambda: g.A_lo.strictly_inside(g.S_pair)),
        ("D_pair in D_global", lambda: g.D_pair.inside(g.D_global)),
        ("D_global in int I", lambda: g.D_global.strictly_inside(open_I)),
    ):
        try:
            results[name] = test()
        except PrecisionExhausted:
            results[name] = False
    return results


def build_geometry(ctx: BetaContext, k1: int, k2: int) -> PairGeometry:
    """Intervals for the pair ``k1 < k2`` with every inclusion certified."""
    ctx.check_digit(k1)
    ctx.check_digit(k2)
    if not k1 < k2:
        raise ValidationError(f"need k1 < k2, got ({k1}, {k2})")
    key = ("geometry", k1, k2)
    if key in ctx._cache:
        return ctx._cache[key]
    checks = check_inclusions(ctx, k1, k2)
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        raise InclusionViolated(
            f"interval inclusions fail for pair ({k1}, {k2}) at beta={float(ctx.beta):.12g}: "
            + "; ".join(failed),
            failures=failed,
        )
    geom = _raw_geometry(ctx, k1, k2)
    ctx._cache[key] = geom
    return geom


def parse_beta(spec: str, n: int | None = None, margin=Fraction(1, 1000)) -> CertifiedReal:
    """Interpret a base specification.

    Accepted forms: ``"auto"`` (``beta_n * (1 - margin)``, needs ``n``),
    ``"auto:0.01"`` (explicit margin), ``"golden"``, an exact rational such as
    ``"1.5"`` or ``"3/2"``, or ``"root:1,-1,-1@1,2"`` for the root of an integer
    polynomial (highest degree first) on an isolating interval.
    """
    from .precision import isolate_root

    spec = spec.strip()
    if spec.startswith("auto"):
        if n is None:
            raise ValidationError("beta 'auto' requires n")
        if ":" in spec:
            margin = parse_rational(spec.split(":", 1)[1])
        if not 0 < margin < 1:
            raise ValidationError("auto margin must lie in (0, 1)")
        desc = bounds.beta_n(n).root
        return CertifiedReal.from_root(desc.scaled(1 - margin))
    if spec == "golden":
        return bounds.generalized_golden(1)
    if spec.startswith("root:"):
        body = spec[5:]
        coeffs, _, interval = body.partition("@")
        lo, hi = interval.split(",") if interval else ("1", "2")
        desc = isolate_root([int(c) for c in coeffs.split(",")], (lo, hi))
        return CertifiedReal.from_root(desc)
    return CertifiedReal.from_rational(parse_rational(spec))
