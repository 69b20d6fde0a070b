"""Two-letter streams with bounded digit-count discrepancy.

The orbit alternates between two anchor intervals inside the switch region of
a digit pair ``k1 < k2``.  On the LOW side it repeatedly emits ``k2`` followed
by a run of ``k1`` that returns it to ``A_lo`` (each such block raises the
discrepancy); on the HIGH side it emits ``k1`` followed by a run of ``k2``
back into ``A_hi`` (each block lowers it).  When the discrepancy crosses zero
the orbit is steered to the other anchor interval with a short connector.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

from .dynamics import BetaContext, PairGeometry, Word, build_geometry
from .errors import Diverged, NotInSimplex, ValidationError
from .navigator import NavRequest, navigate
from .orbit import OrbitPoint
from .precision import Membership, parse_rational

MAX_RUN = 100_000


class Side(enum.Enum):
    LOW = "low"
    HIGH = "high"


@dataclass
class BalancerState:
    """Mutable state of one balanced two-letter stream.

    ``disc_scaled`` is ``b * count(k1) - a * length`` for ``p_k1 = a/b``, so
    the discrepancy ``count(k1) - p_k1 * length`` is ``disc_scaled / b``
    without any rounding.
    """

    ctx: BetaContext
    geometry: PairGeometry
    p_k1: Fraction
    orbit: OrbitPoint
    side: Side = Side.LOW
    disc_scaled: int = 0
    emitted_len: int = 0
    counts: list = field(default_factory=list)
    max_abs_scaled: int = 0
    max_run: int = 0
    max_connector: int = 0
    switches: int = 0
    confined: bool = True
    first_escape: int | None = None
    connector: Word = Word(())

    @property
    def k1(self) -> int:
        return self.geometry.k1

    @property
    def k2(self) -> int:
        return self.geometry.k2

    @property
    def discrepancy(self) -> Fraction:
        return Fraction(self.disc_scaled, self.p_k1.denominator)

    @property
    def max_abs_discrepancy(self) -> Fraction:
        return Fraction(self.max_abs_scaled, self.p_k1.denominator)

    def recompute_discrepancy(self) -> Fraction:
        """Discrepancy from the raw counts, for checking the running value."""
        return self.counts[self.k1] - self.p_k1 * self.emitted_len

    def anchor(self, side: Side | None = None):
        side = side or self.side
        return self.geometry.A_lo if side is Side.LOW else self.geometry.A_hi


def _check_p(ctx: BetaContext, p) -> Fraction:
    p = parse_rational(p) if not isinstance(p, Fraction) else p
    lo, hi = Fraction(1, ctx.n + 1), Fraction(ctx.n, ctx.n + 1)
    if not lo <= p <= hi:
        raise NotInSimplex(f"p_k1={p} outside [{lo}, {hi}]")
    return p


def _push(state: BalancerState, k: int):
    orbit = state.orbit
    orbit.push(k)
    p = state.p_k1
    state.disc_scaled += (p.denominator if k == state.geometry.k1 else 0) - p.numerator
    a = abs(state.disc_scaled)
    if a > state.max_abs_scaled:
        state.max_abs_scaled = a
    state.counts[k] += 1
    state.emitted_len += 1
    D = state.geometry.D_pair
    if orbit.locate(D) is not Membership.YES and not orbit.certify_in(D):
        if state.confined:
            state.first_escape = state.emitted_len
        state.confined = False


def _in_anchor(orbit: OrbitPoint, anchor) -> bool:
    r = orbit.locate(anchor)
    if r is Membership.UNDECIDED:
        return orbit.certify_in(anchor)
    return r is Membership.YES


def _connect(state: BalancerState, side: Side):
    word = navigate(
        state.ctx,
        NavRequest(state.orbit, state.anchor(side), (state.k1, state.k2), state.geometry.D_pair),
    )
    state.max_connector = max(state.max_connector, len(word))
    return word


def init_balancer(
    ctx: BetaContext, k1: int, k2: int, p_k1, x, *, side: Side = Side.LOW, budget: int | None = None
) -> BalancerState:
    """Start a stream from ``x`` (an :class:`OrbitPoint` or rational) inside ``D_pair``.

    The orbit is first navigated into the anchor interval of ``side`` using
    only ``k1`` and ``k2``; those connector digits are emitted and counted.
    """
    ctx.require_validated()
    geometry = build_geometry(ctx, k1, k2)
    p = _check_p(ctx, p_k1)
    orbit = x if isinstance(x, OrbitPoint) else OrbitPoint(ctx, x, budget=budget)
    if not orbit.certify_in(geometry.D_pair):
        raise ValidationError("balancer start must lie in D_pair")
    state = BalancerState(ctx, geometry, p, orbit, side, counts=[0] * (ctx.M + 1))
    word = _connect(state, side)
    for k in word:
        _push(state, k)
    state.connector = word
    return state


def _block(state: BalancerState):
    """Digits of one block on the current side, pushed one by one."""
    if state.side is Side.LOW:
        first, runner = state.k2, state.k1
    else:
        first, runner = state.k1, state.k2
    anchor = state.anchor()
    _push(state, first)
    yield first
    n = state.ctx.n
    l = 0
    while True:
        _push(state, runner)
        l += 1
        yield runner
        if l >= n and _in_anchor(state.orbit, anchor):
            break
        if l > MAX_RUN:
            raise Diverged(f"run of {runner} did not return to the anchor interval")
    state.max_run = max(state.max_run, l)


def _should_switch(state: BalancerState) -> bool:
    if state.side is Side.LOW:
        return state.disc_scaled > 0
    return state.disc_scaled < 0


def emit_block(state: BalancerState) -> Word:
    """Append one full block on the current side and return it."""
    return Word(tuple(_block(state)))


def step_balancer(state: BalancerState):
    """Unbounded digit stream; every digit is applied to the orbit before it is yielded."""
    while True:
        if _should_switch(state):
            side = Side.HIGH if state.side is Side.LOW else Side.LOW
            word = _connect(state, side)
            state.side = side
            state.switches += 1
            for k in word:
                _push(state, k)
                yield k
        yield from _block(state)
