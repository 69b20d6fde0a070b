"""Connector words: move an orbit into a target interval under constraints.

Instead of expanding a breadth-first tree of words we compute, level by level,
the set ``B_t`` of points from which the target is reachable in exactly ``t``
admissible steps:

    B_0 = target,   B_t = constraint  ∩  union over allowed k of (B_{t-1} + k) / beta.

Each ``B_t`` is a finite union of intervals kept as integer endpoints with
*inward* rounding, so a certified inclusion in the approximation implies
inclusion in the true set.  The shortest word length from a start point is the
first ``t`` with ``start ∈ B_t``; the lexicographically smallest word of that
length is read off greedily.  This returns exactly what breadth-first search
would, in time linear in the word length.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Sequence

from .dynamics import SHADOW_PRECISION, BetaContext, CertifiedInterval, Word, apply_map
from .errors import Diverged, NotReachableWithinCutoff, ValidationError
from .orbit import OrbitPoint
from .precision import CertifiedReal, Membership, Ordering, decide

DEFAULT_MAX_LEN = 64
_MAX_PRECISION = 4096
_MAX_COMPONENTS = 200_000


@dataclass(frozen=True)
class NavRequest:
    """Where to go, with which digits, and which interval the path must stay in."""

    start: object
    target: CertifiedInterval
    allowed_digits: tuple
    state_constraint: CertifiedInterval
    max_len: int = DEFAULT_MAX_LEN

    def __post_init__(self):
        object.__setattr__(self, "allowed_digits", tuple(sorted(set(int(k) for k in self.allowed_digits))))
        if not self.allowed_digits:
            raise ValidationError("no allowed digits")
        if self.max_len < 0:
            raise ValidationError("max_len must be non-negative")


class _Reachability:
    """Inner approximations of the sets ``B_t`` at scale ``2**-prec``."""

    def __init__(self, ctx: BetaContext, target, allowed, constraint, prec: int):
        self.prec = prec
        self.allowed = allowed
        bm, br = ctx.fixed_beta(prec)
        self.b_min, self.b_max = bm - br, bm + br
        self.bm, self.br = bm, br
        c = constraint.fixed(prec)
        t = target.fixed(prec)
        self.c_lo, self.c_hi = c.inner_lo, c.inner_hi
        lo, hi = max(t.inner_lo, self.c_lo), min(t.inner_hi, self.c_hi)
        self.levels = [[(lo, hi)] if lo <= hi else []]
        self.starts = [[lo] if lo <= hi else []]

    def level(self, t: int):
        while len(self.levels) <= t:
            nxt = self._preimage(self.levels[-1])
            self.levels.append(nxt)
            self.starts.append([a for a, _ in nxt])
        return self.levels[t]

    def _preimage(self, prev):
        Q = self.prec
        one = 1 << Q
        b_min, b_max = self.b_min, self.b_max
        pieces = []
        for k in self.allowed:
            kq = k * one
            for lo, hi in prev:
                a, b = (lo + kq) << Q, (hi + kq) << Q
                new_lo = -((-a) // b_min) if a >= 0 else -((-a) // b_max)
                new_hi = b // b_max if b >= 0 else b // b_min
                new_lo = max(new_lo, self.c_lo)
                new_hi = min(new_hi, self.c_hi)
                if new_lo <= new_hi:
                    pieces.append((new_lo, new_hi))
        pieces.sort()
        merged = []
        for lo, hi in pieces:
            if merged and lo <= merged[-1][1]:
                if hi > merged[-1][1]:
                    merged[-1] = (merged[-1][0], hi)
            else:
                merged.append((lo, hi))
        if len(merged) > _MAX_COMPONENTS:
            raise NotReachableWithinCutoff("reachable set too fragmented; raise precision or lower max_len")
        return merged

    def locate(self, t: int, mid: int, rad: int, slack: int = 1 << 16) -> Membership:
        levels = self.level(t)
        starts = self.starts[t]
        i = bisect.bisect_right(starts, mid - rad) - 1
        if i >= 0 and mid + rad <= levels[i][1]:
            return Membership.YES
        # anything within the slack of an endpoint may belong to the true set
        j = bisect.bisect_right(starts, mid + rad + slack) - 1
        if j >= 0 and levels[j][1] >= mid - rad - slack:
            return Membership.UNDECIDED
        return Membership.NO

    def step(self, mid: int, rad: int, k: int):
        Q = self.prec
        return ((self.bm * mid) >> Q) - (k << Q), (((self.bm + self.br) * rad + abs(mid) * self.br) >> Q) + 2

    def extract(self, mid: int, rad: int, t: int):
        word = []
        for s in range(t, 0, -1):
            for k in self.allowed:
                m2, r2 = self.step(mid, rad, k)
                if self.locate(s - 1, m2, r2) is Membership.YES:
                    word.append(k)
                    mid, rad = m2, r2
                    break
            else:
                return None
        return word


def _reachability(ctx: BetaContext, req: NavRequest, prec: int) -> _Reachability:
    key = ("reach", id(req.target), id(req.state_constraint), req.allowed_digits, prec)
    entry = ctx._cache.get(key)
    if entry is None or entry[0] is not req.target or entry[1] is not req.state_constraint:
        entry = (req.target, req.state_constraint, _Reachability(ctx, req.target, req.allowed_digits, req.state_constraint, prec))
        ctx._cache[key] = entry
    return entry[2]


def _start_ball(start, prec: int, synced: bool):
    if isinstance(start, OrbitPoint):
        if prec == start.Q:
            if synced:
                start.sync()
            return start.ball()
        b = start.current.enclose(prec)
        return b.mid, b.rad
    b = CertifiedReal.coerce(start).enclose(prec)
    return b.mid, b.rad


def _start_in(start, interval: CertifiedInterval) -> bool:
    if isinstance(start, OrbitPoint):
        return start.certify_in(interval)
    return interval.decide_contains(start)


def navigate(ctx: BetaContext, req: NavRequest) -> Word:
    """Shortest (then lexicographically smallest) connector word into ``req.target``."""
    for k in req.allowed_digits:
        ctx.check_digit(k)
    if not _start_in(req.start, req.state_constraint):
        raise ValidationError("navigation start lies outside the state constraint")
    if _start_in(req.start, req.target):
        return Word(())
    # an orbit's cheap shadow ball is tried first, then its synced ball
    prec = SHADOW_PRECISION
    synced = not isinstance(req.start, OrbitPoint)
    while True:
        reach = _reachability(ctx, req, prec)
        mid, rad = _start_ball(req.start, prec, synced)
        undecided = False
        for t in range(1, req.max_len + 1):
            where = reach.locate(t, mid, rad)
            if where is Membership.YES:
                word = reach.extract(mid, rad, t)
                if word is not None:
                    if undecided and prec < _MAX_PRECISION:
                        break
                    return Word(tuple(word))
                undecided = True
            elif where is Membership.UNDECIDED:
                undecided = True
        else:
            if synced and (not undecided or prec >= _MAX_PRECISION):
                raise NotReachableWithinCutoff(
                    f"target {req.target!r} not reached within {req.max_len} digits"
                )
        if not synced:
            synced = True
            continue
        if prec >= _MAX_PRECISION:
            raise NotReachableWithinCutoff("boundary ties persist at maximal precision")
        prec *= 2


def hitting_run(ctx: BetaContext, k: int, start, target: CertifiedInterval, max_l: int = 100_000) -> int:
    """Smallest ``l >= 1`` with ``T_k**l(start)`` in ``target``."""
    ctx.check_digit(k)
    start = CertifiedReal.coerce(start)
    if decide(start, ctx.fixed_point(k)) is Ordering.EQUAL:
        raise Diverged(f"start is the fixed point of T_{k}")
    I = ctx.interval
    for l in range(1, max_l + 1):
        y = apply_map(ctx, k, start, l)
        if target.decide_contains(y):
            return l
        if not I.decide_contains(y):
            raise Diverged(f"orbit left the admissible interval after {l} applications of T_{k}")
    raise Diverged(f"no hit within {max_l} applications of T_{k}")
