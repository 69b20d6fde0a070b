"""Long certified orbits.

Tracking ``y_j = T_{a_j} o ... o T_{a_1}(x0)`` for a million digits needs
roughly ``j * log2(beta)`` bits, because every step multiplies the error by
``beta``.  :class:`OrbitPoint` keeps two representations:

* a *shadow* ball at a fixed low precision, advanced one digit at a time and
  used for every membership decision;
* a high-precision state advanced in blocks, ``y <- beta**m * y - sum d_i beta**(m-i)``,
  using a table of powers of ``beta`` so a block costs one big multiplication
  plus cheap additions.

When the shadow's error grows past a threshold it is refreshed from the
high-precision state.  If the high-precision error itself grows too large
(more digits than budgeted), the precision is doubled and the orbit replayed.
"""

from __future__ import annotations

import math
from fractions import Fraction

import gmpy2

from .dynamics import SHADOW_PRECISION, BetaContext, CertifiedInterval, Word, orbit_value
from .errors import PrecisionExhausted
from .precision import Ball, CertifiedReal, Membership, parse_rational

_DEFAULT_BUDGET = 2048
_MAX_TABLE = 4096


class _PowerTable:
    """Fixed-point powers ``beta**t * 2**P`` for ``t = 0..m`` with error bounds."""

    def __init__(self, ctx: BetaContext, prec: int, size: int):
        self.prec = prec
        self.size = size
        guard = math.ceil(size * ctx.log2_beta) + size.bit_length() + 24
        work = prec + guard
        bm, br = ctx.fixed_beta(work)
        w = 1 << work
        e = 0
        values = [gmpy2.mpz(1) << prec]
        errors = [0]
        for _ in range(size):
            e = ((abs(bm) * e + w * br + br * e) >> work) + 1
            w = (w * bm) >> work
            values.append(gmpy2.mpz(w) >> guard)
            errors.append((e >> guard) + 2)
        self.values = values
        self.errors = errors

    def truncate(self, new_prec: int):
        s = self.prec - new_prec
        if s <= 0:
            return
        self.values = [v >> s for v in self.values]
        self.errors = [(-((-e) >> s)) + 1 for e in self.errors]
        self.values[0] = gmpy2.mpz(1) << new_prec
        self.errors[0] = 0
        self.prec = new_prec


class OrbitPoint:
    """Certified orbit of an exact rational starting point.

    ``push(k)`` appends digit ``k`` (applies ``T_k``); membership questions are
    answered by :meth:`locate` (three-valued, cheap) and :meth:`certify_in`
    (escalates until decided).  ``budget`` is the expected number of digits
    and only affects speed.
    """

    def __init__(self, ctx: BetaContext, x0, *, budget: int | None = None):
        self.ctx = ctx
        self.x0 = parse_rational(x0) if not isinstance(x0, Fraction) else x0
        self.Q = SHADOW_PRECISION
        self.digits = bytearray()
        self.counts = [0] * (ctx.M + 1)
        self._bq, self._beq = ctx.fixed_beta(self.Q)
        self._es_limit = 1 << (self.Q - 120)
        lifetime = math.ceil((self.Q - 152) / max(ctx.log2_beta, 1e-6))
        self._table_size = max(16, min(_MAX_TABLE, lifetime + 8))
        self._budget = budget or _DEFAULT_BUDGET
        self._fixed_budget = budget is not None
        self._start_precise(self._budget)

    # high precision management ---------------------------------------------------
    def _precision_for(self, remaining: int) -> int:
        return math.ceil(max(remaining, 0) * self.ctx.log2_beta) + self.Q + 96

    def _start_precise(self, budget: int):
        P = self._precision_for(budget)
        self._P = P
        self._table = _PowerTable(self.ctx, P, self._table_size)
        start = Ball.exact(self.x0, P)
        self._Y = gmpy2.mpz(start.mid)
        self._E = start.rad
        self._pending = bytearray()
        self._applied = 0
        # replay digits already emitted (after an escalation)
        history = bytes(self.digits)
        for i in range(0, len(history), self._table_size):
            self._pending = bytearray(history[i : i + self._table_size])
            self._flush()
        self._refresh_shadow()

    def _flush(self):
        pending = self._pending
        m = len(pending)
        if not m:
            return
        table = self._table
        W, EW, P = table.values, table.errors, table.prec
        M = self.ctx.M
        acc = [gmpy2.xmpz(0) for _ in range(M + 1)]
        err = 0
        idx = m
        for d in pending:
            idx -= 1
            if d:
                acc[d] += W[idx]
                err += d * EW[idx]
        Y, E = self._Y, self._E
        total = gmpy2.mpz(0)
        for d in range(1, M + 1):
            if acc[d]:
                total += d * gmpy2.mpz(acc[d])
        self._Y = ((W[m] * Y) >> P) - total
        self._E = (((W[m] + EW[m]) * E + abs(Y) * EW[m]) >> P) + 2 + err
        self._applied += m
        self._pending = bytearray()
        self._check_precision()

    def _check_precision(self):
        P = self._P
        if self._E > (1 << (P - self.Q + 32)):
            self._escalate()
            return
        if self._fixed_budget:
            remaining = self._budget - self._applied
            target = self._precision_for(remaining)
            if target <= (3 * P) // 4:
                s = P - target
                self._Y >>= s
                self._E = (-((-self._E) >> s)) + 1
                self._table.truncate(target)
                self._P = target

    def _escalate(self):
        new_budget = max(2 * self._budget, 2 * len(self.digits) + 64)
        if self._precision_for(new_budget) > 1 << 27:
            raise PrecisionExhausted("orbit precision budget exceeded")
        self._budget = new_budget
        self._fixed_budget = False
        self._start_precise(new_budget)

    def _refresh_shadow(self):
        s = self._P - self.Q
        self._ys = int(self._Y >> s)
        self._es = int(-((-self._E) >> s)) + 1

    def sync(self):
        """Bring the shadow ball back to full accuracy."""
        self._flush()
        self._refresh_shadow()

    # stepping -----------------------------------------------------------------------
    def push(self, k: int):
        ys = self._ys
        Q = self.Q
        self._ys = ((self._bq * ys) >> Q) - (k << Q)
        self._es = (((self._bq + self._beq) * self._es + abs(ys) * self._beq) >> Q) + 2
        self.digits.append(k)
        self.counts[k] += 1
        self._pending.append(k)
        if self._es > self._es_limit or len(self._pending) >= self._table_size:
            self.sync()

    def extend(self, digits):
        for k in digits:
            self.push(k)

    def ball(self) -> tuple[int, int]:
        """Current shadow enclosure ``(mid, rad)`` at scale ``2**-Q``."""
        return self._ys, self._es

    def peek(self, k: int) -> tuple[int, int]:
        """Shadow enclosure of ``T_k`` applied to the current point."""
        ys, Q = self._ys, self.Q
        return (
            ((self._bq * ys) >> Q) - (k << Q),
            (((self._bq + self._beq) * self._es + abs(ys) * self._beq) >> Q) + 2,
        )

    # membership ---------------------------------------------------------------------
    def locate(self, interval: CertifiedInterval) -> Membership:
        return interval.fixed(self.Q).locate(self._ys, self._es)

    def certify_in(self, interval: CertifiedInterval) -> bool:
        """Certified closed membership of the current point, escalating as needed."""
        r = interval.fixed(self.Q).locate(self._ys, self._es)
        if r is Membership.UNDECIDED:
            self.sync()
            r = interval.fixed(self.Q).locate(self._ys, self._es)
        if r is Membership.UNDECIDED:
            self._flush()
            prec = self._P
            if prec > self.Q:
                r = interval.fixed(prec).locate(int(self._Y), int(self._E))
        if r is Membership.UNDECIDED:
            return interval.decide_contains(self.current)
        return r is Membership.YES

    # views ----------------------------------------------------------------------------
    @property
    def current(self) -> CertifiedReal:
        self._flush()
        hints = [Ball(int(self._Y), int(self._E), self._P), Ball(self._ys, self._es, self.Q)]
        return orbit_value(self.ctx, self.x0, self.digits, hints)

    @property
    def word_so_far(self) -> Word:
        return Word(tuple(self.digits))

    def __len__(self) -> int:
        return len(self.digits)

    def value_estimate(self) -> float:
        return self._ys / (1 << self.Q) if abs(self._ys) < (1 << 1000) else math.inf

    def __repr__(self) -> str:
        return f"OrbitPoint(x0={self.x0}, digits={len(self.digits)}, y~{self.value_estimate():.12g})"
