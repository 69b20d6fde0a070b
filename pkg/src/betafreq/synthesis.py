"""Expansions with prescribed, or deliberately oscillating, digit frequencies.

A target vector ``p`` with every entry at most ``n/(n+1)`` is written as a
convex combination of the extremal vectors ``v_{n,a,b}`` (``n/(n+1)`` on
``a``, ``1/(n+1)`` on ``b``).  The expansion is then built in rounds
``i = 1, 2, ...``: for every ordered pair ``(a, b)`` with positive weight
``r_ab`` the balancer emits ``floor(N_i * r_ab)`` digits over ``{a, b}``
balanced towards ``v_{n,a,b}``, and a connector word moves the orbit to the
next pair.  With ``N_i = i**2`` the connectors and rounding losses vanish in
the limit, so the digit frequencies converge to ``p``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .balancer import Side, init_balancer, step_balancer
from .dynamics import BetaContext, CertifiedInterval, build_geometry, global_state_interval
from .errors import DomainError, InfeasibleTargets, NotInSimplex, NotReachableWithinCutoff, ValidationError
from .navigator import DEFAULT_MAX_LEN, NavRequest, navigate
from .orbit import OrbitPoint
from .precision import CertifiedReal, Ordering, decide, parse_rational

# --------------------------------------------------------------------------- vectors


def _rational(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return parse_rational(v)
    raise ValidationError(f"expected an exact rational, got {v!r}")


@dataclass(frozen=True)
class FreqVector:
    """Exact probability vector ``(p_0, ..., p_M)``."""

    entries: tuple

    def __post_init__(self):
        entries = tuple(_rational(e) for e in self.entries)
        if len(entries) < 2:
            raise NotInSimplex("a frequency vector needs at least two entries")
        if any(e < 0 for e in entries):
            raise NotInSimplex(f"negative entry in {entries}")
        if sum(entries) != 1:
            raise NotInSimplex(f"entries sum to {sum(entries)}, not 1")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def parse(cls, text: str) -> "FreqVector":
        return cls(tuple(parse_rational(t) for t in text.split(",")))

    @property
    def M(self) -> int:
        return len(self.entries) - 1

    def __getitem__(self, k: int) -> Fraction:
        return self.entries[k]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def in_truncated_simplex(self, n: int) -> bool:
        """Membership in the simplex with every entry at most ``n/(n+1)``."""
        cap = Fraction(n, n + 1)
        return all(e <= cap for e in self.entries)

    def as_strings(self) -> list:
        return [str(e) for e in self.entries]


def ordered_pairs(M: int) -> list:
    """All ordered pairs ``(a, b)`` with ``a != b``, lexicographically."""
    return [(a, b) for a in range(M + 1) for b in range(M + 1) if a != b]


def extremal_vector(M: int, n: int, a: int, b: int) -> FreqVector:
    v = [Fraction(0)] * (M + 1)
    v[a] = Fraction(n, n + 1)
    v[b] = Fraction(1, n + 1)
    return FreqVector(tuple(v))


@dataclass(frozen=True)
class PairWeights:
    """Convex weights over ordered digit pairs."""

    M: int
    n: int
    r: dict

    def reconstruct(self) -> tuple:
        """``p_k = sum_b n r_kb/(n+1) + sum_a r_ak/(n+1)``."""
        n = self.n
        p = [Fraction(0)] * (self.M + 1)
        for (a, b), w in self.r.items():
            p[a] += w * n / (n + 1)
            p[b] += w / (n + 1)
        return tuple(p)

    def support(self) -> list:
        return [pair for pair in ordered_pairs(self.M) if self.r.get(pair, 0) > 0]


# --------------------------------------------------------------------------- decomposition


def _phase_one(rows: list, n_vars: int):
    """Integer-pivoting phase-one simplex with Bland's rule.

    ``rows`` are ``[coefficients..., rhs]`` with non-negative integer rhs.
    Returns the basic solution as Fractions, or None when infeasible.
    """
    m = len(rows)
    width = n_vars + m
    T = [list(row[:n_vars]) + [1 if j == i else 0 for j in range(m)] + [row[n_vars]] for i, row in enumerate(rows)]
    # phase-one objective: sum of artificials, expressed in non-basic columns
    z = [sum(T[i][j] for i in range(m)) for j in range(width + 1)]
    for j in range(n_vars, width):
        z[j] = 0
    basis = list(range(n_vars, width))
    d = 1
    while True:
        enter = next((j for j in range(n_vars) if z[j] > 0 and j not in basis), None)
        if enter is None:
            break
        leave, best = None, None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = (T[i][width], a)
                if best is None:
                    leave, best = i, ratio
                else:
                    lhs, rhs = ratio[0] * best[1], best[0] * ratio[1]
                    if lhs < rhs or (lhs == rhs and basis[i] < basis[leave]):
                        leave, best = i, ratio
        if leave is None:
            return None
        piv = T[leave][enter]
        prow = T[leave]
        for i in range(m):
            if i == leave:
                continue
            row = T[i]
            f = row[enter]
            T[i] = [(row[j] * piv - f * prow[j]) // d for j in range(width + 1)]
        f = z[enter]
        z = [(z[j] * piv - f * prow[j]) // d for j in range(width + 1)]
        d = piv
        basis[leave] = enter
    if z[width] != 0:
        return None
    x = [Fraction(0)] * n_vars
    for i, j in enumerate(basis):
        if j < n_vars:
            x[j] = Fraction(T[i][width], d)
    return x


def decompose(p, n: int) -> PairWeights:
    """Exact convex weights ``r`` with ``p = sum r_ab v_{n,a,b}``.

    Vertices return the indicator of their pair; otherwise an exact
    phase-one simplex finds a basic feasible solution.  The reconstruction
    identity is checked before returning.
    """
    p = p if isinstance(p, FreqVector) else FreqVector(tuple(p))
    if int(n) != n or n < 1:
        raise ValidationError("n must be a positive integer")
    if not p.in_truncated_simplex(n):
        raise NotInSimplex(f"{p.as_strings()} has an entry above {n}/{n + 1}")
    M = p.M
    pairs = ordered_pairs(M)
    support = [k for k in range(M + 1) if p[k]]
    if len(support) == 2:
        a, b = support
        if p[a] < p[b]:
            a, b = b, a
        if p[a] == Fraction(n, n + 1) and p[b] == Fraction(1, n + 1):
            return PairWeights(M, n, {pair: Fraction(int(pair == (a, b))) for pair in pairs})
    L = math.lcm(*(e.denominator for e in p))
    rows = []
    for k in range(M + 1):
        coeffs = [(n if a == k else 0) + (1 if b == k else 0) for a, b in pairs]
        rows.append(coeffs + [int(p[k] * (n + 1) * L)])
    # the coefficients above are scaled by (n+1); scale the variables by L too
    sol = _phase_one(rows, len(pairs))
    if sol is None:
        raise NotInSimplex(f"no convex decomposition found for {p.as_strings()}")
    r = {pair: sol[i] / L for i, pair in enumerate(pairs)}
    weights = PairWeights(M, n, r)
    if weights.reconstruct() != tuple(p) or sum(r.values()) != 1 or any(w < 0 for w in r.values()):
        raise NotInSimplex("decomposition failed its reconstruction check")
    return weights


# --------------------------------------------------------------------------- schedule


@dataclass(frozen=True)
class Schedule:
    """Round lengths ``N_i`` and per-pair block lengths ``floor(N_i * r_pair)``."""

    weights: PairWeights
    exponent: int = 2
    lengths: Callable[[int], int] | None = None

    def __post_init__(self):
        if self.lengths is None and self.exponent < 1:
            raise ValidationError("round lengths i**e need e >= 1")

    def round_length(self, i: int) -> int:
        return self.lengths(i) if self.lengths else i**self.exponent

    def blocks(self, i: int) -> list:
        """Non-empty blocks ``(pair, length)`` of round ``i`` in pair order."""
        N = self.round_length(i)
        out = []
        for pair in ordered_pairs(self.weights.M):
            length = math.floor(N * self.weights.r.get(pair, 0))
            if length > 0:
                out.append((pair, length))
        return out

    def check_growth(self, horizon: int = 10_000) -> bool:
        """``S_{j+1}/S_j -> 1`` and ``j/S_j -> 0`` for the partial sums ``S_j``.

        Polynomial schedules ``i**e`` with ``e >= 1`` satisfy both; custom
        schedules are checked numerically at ``horizon``.
        """
        if self.lengths is None:
            return self.exponent >= 1
        S = [0]
        for i in range(1, horizon + 2):
            S.append(S[-1] + self.round_length(i))
        j = horizon
        return S[j] > 0 and S[j + 1] / S[j] < 1.01 and j / S[j] < 0.01


# --------------------------------------------------------------------------- streams


@dataclass(frozen=True)
class Checkpoint:
    """Snapshot of the digit counts after ``N`` digits."""

    N: int
    counts: tuple
    round: int
    kind: str
    target: int = 0
    pair: tuple | None = None
    max_abs_discrepancy: Fraction = Fraction(0)

    def frequencies(self) -> tuple:
        return tuple(Fraction(c, self.N) if self.N else Fraction(0) for c in self.counts)

    def sup_error(self, target: Sequence) -> Fraction:
        return max(abs(f - t) for f, t in zip(self.frequencies(), target))


@dataclass
class ExpansionStream:
    """Digits of an expansion of ``x`` generated on demand, with checkpoints."""

    ctx: BetaContext
    x: Fraction
    mode: str
    targets: list
    orbit: OrbitPoint
    checkpoints: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    _gen: object = None

    @property
    def digits(self) -> bytes:
        return bytes(self.orbit.digits)

    def __len__(self) -> int:
        return len(self.orbit)

    def counts(self) -> tuple:
        return tuple(self.orbit.counts)

    def advance(self, total: int) -> "ExpansionStream":
        """Generate digits until ``total`` have been produced, then checkpoint."""
        need = total - len(self.orbit)
        if need > 0:
            for _ in itertools.islice(self._gen, need):
                pass
            self._checkpoint("final")
        return self

    def _checkpoint(self, kind: str, round_: int = 0, target: int = 0, pair=None, disc=Fraction(0)):
        cp = Checkpoint(len(self.orbit), tuple(self.orbit.counts), round_, kind, target, pair, disc)
        if self.checkpoints and self.checkpoints[-1].N == cp.N and self.checkpoints[-1].kind == kind:
            return
        self.checkpoints.append(cp)

    def round_checkpoints(self) -> list:
        return [c for c in self.checkpoints if c.kind in ("round", "switch")]


def _check_start(ctx: BetaContext, x) -> Fraction:
    x = _rational(x)
    if decide(x, 0) is not Ordering.GREATER or decide(x, ctx.upper) is not Ordering.LESS:
        raise DomainError("x must lie strictly inside [0, M/(beta-1)]; the endpoints have a single expansion")
    return x


def _entry_max_len(ctx: BetaContext, x: Fraction) -> int:
    """Cutoff for the first connector: points near 0 or the top need long runs."""
    gap = min(float(x), float(ctx.upper - x))
    steps = math.log(1 / gap) / math.log(float(ctx.beta)) if gap > 0 else 0
    return DEFAULT_MAX_LEN + math.ceil(max(steps, 0)) * 2


def _connect(stream: ExpansionStream, target: CertifiedInterval, max_len: int = DEFAULT_MAX_LEN):
    """Full-alphabet connector inside D_global, or inside I if that fails."""
    ctx = stream.ctx
    alphabet = tuple(range(ctx.M + 1))
    D = global_state_interval(ctx)
    word = None
    if stream.orbit.certify_in(D):
        try:
            word = navigate(ctx, NavRequest(stream.orbit, target, alphabet, D, max_len))
        except NotReachableWithinCutoff:
            word = None
    if word is None:
        word = navigate(ctx, NavRequest(stream.orbit, target, alphabet, ctx.interval, max_len))
        stream.stats["connector_fallbacks"] = stream.stats.get("connector_fallbacks", 0) + 1
    stream.stats["max_connector"] = max(stream.stats.get("max_connector", 0), len(word))
    return word


def _pair_roles(ctx: BetaContext, pair) -> tuple:
    heavy, light = pair
    k1, k2 = min(pair), max(pair)
    n = ctx.n
    p_k1 = Fraction(n, n + 1) if heavy == k1 else Fraction(1, n + 1)
    return k1, k2, p_k1


def _segment(stream: ExpansionStream, pair, length: int, round_: int, target: int, max_len: int):
    """Connector into the pair's anchor interval, then ``length`` balanced digits."""
    ctx = stream.ctx
    k1, k2, p_k1 = _pair_roles(ctx, pair)
    geom = build_geometry(ctx, k1, k2)
    for k in _connect(stream, geom.A_lo, max_len):
        stream.orbit.push(k)
        yield k
    state = init_balancer(ctx, k1, k2, p_k1, stream.orbit, side=Side.LOW)
    emitted = 0
    gen = step_balancer(state)
    while emitted < length:
        k = next(gen)
        emitted += 1
        yield k
    if not state.confined:
        stream.stats["confinement_failures"] = stream.stats.get("confinement_failures", 0) + 1
    stats = stream.stats
    stats["max_run"] = max(stats.get("max_run", 0), state.max_run)
    stats["max_abs_discrepancy"] = max(stats.get("max_abs_discrepancy", Fraction(0)), state.max_abs_discrepancy)
    stream._checkpoint("segment", round_, target, pair, state.max_abs_discrepancy)


def _prepare(ctx: BetaContext, x, budget: int | None):
    ctx.require_validated()
    x = _check_start(ctx, x)
    orbit = OrbitPoint(ctx, x, budget=(budget + 4096) if budget else None)
    return x, orbit


def synthesize(ctx: BetaContext, x, p, digit_budget: int, *, schedule_exponent: int = 2) -> ExpansionStream:
    """Expansion of ``x`` whose digit frequencies converge to ``p``.

    ``digit_budget`` digits are generated eagerly; :meth:`ExpansionStream.advance`
    continues the same expansion.
    """
    p = p if isinstance(p, FreqVector) else FreqVector(tuple(p))
    if p.M != ctx.M:
        raise ValidationError(f"target has {len(p)} entries, expected {ctx.M + 1}")
    weights = decompose(p, ctx.n)
    x, orbit = _prepare(ctx, x, digit_budget)
    stream = ExpansionStream(ctx, x, "target", [p], orbit)
    schedule = Schedule(weights, schedule_exponent)
    stream.stats["weights"] = {f"{a},{b}": str(w) for (a, b), w in weights.r.items() if w}

    def generate():
        max_len = _entry_max_len(ctx, x)
        i = 0
        while True:
            i += 1
            for pair, length in schedule.blocks(i):
                yield from _segment(stream, pair, length, i, 0, max_len)
                max_len = DEFAULT_MAX_LEN
            stream._checkpoint("round", i, 0)

    stream._gen = generate()
    return stream.advance(digit_budget)


def oscillation_targets(M: int, n: int, D: Iterable[int], p_partial: dict) -> tuple:
    """Two targets that agree off ``D`` and differ at every digit of ``D``.

    The residual mass ``m`` is spread over ``D`` as ``m(1/|D| +- c delta)``
    with ``delta = (1, ..., 1, -(|D|-1))`` and ``c`` the largest value up to
    ``1/(2|D|**2)`` keeping every entry at most ``n/(n+1)``.
    """
    D = sorted(set(int(k) for k in D))
    if len(D) < 2:
        raise ValidationError("the oscillating digit set needs at least two digits")
    if any(not 0 <= k <= M for k in D):
        raise ValidationError(f"digit set {D} not inside 0..{M}")
    rest = [k for k in range(M + 1) if k not in D]
    partial = {int(k): _rational(v) for k, v in p_partial.items()}
    if set(partial) != set(rest):
        raise ValidationError(f"fixed frequencies must be given exactly for digits {rest}")
    cap = Fraction(n, n + 1)
    for k, v in partial.items():
        if not 0 <= v <= cap:
            raise InfeasibleTargets(f"fixed frequency p_{k}={v} outside [0, {cap}]")
    m = 1 - sum(partial.values(), Fraction(0))
    if m <= 0:
        raise InfeasibleTargets(f"residual mass {m} leaves nothing to oscillate")
    size = len(D)
    c_room = (cap / m - Fraction(1, size)) / (size - 1)
    c = min(Fraction(1, 2 * size * size), c_room)
    if c <= 0:
        raise InfeasibleTargets(
            f"residual mass {m} over {size} digits needs {m}/{size} > {cap} per digit"
        )
    delta = [1] * (size - 1) + [-(size - 1)]
    q = [Fraction(0)] * (M + 1)
    q2 = [Fraction(0)] * (M + 1)
    for k, v in partial.items():
        q[k] = q2[k] = v
    for k, dk in zip(D, delta):
        q[k] = m * (Fraction(1, size) + c * dk)
        q2[k] = m * (Fraction(1, size) - c * dk)
    first, second = FreqVector(tuple(q)), FreqVector(tuple(q2))
    for v in (first, second):
        if not v.in_truncated_simplex(n):
            raise InfeasibleTargets(f"constructed target {v.as_strings()} leaves the truncated simplex")
    return first, second


def switch_threshold(q: FreqVector, q2: FreqVector, D: Sequence[int], stage: int) -> Fraction:
    """Sup-norm distance that counts as close enough at ``stage`` (1-based)."""
    gap = min(abs(q[k] - q2[k]) for k in D)
    return gap / (4 * stage)


def synthesize_nonconvergent(
    ctx: BetaContext, x, D: Iterable[int], p_partial: dict, digit_budget: int
) -> ExpansionStream:
    """Expansion whose digit frequencies on ``D`` oscillate and do not converge.

    Rounds are built towards ``q`` until the whole-prefix frequency vector is
    within :func:`switch_threshold` of it, then towards ``q'``, and so on.
    Every switch is recorded as a ``switch`` checkpoint labelled with the
    target that was just reached.
    """
    D = sorted(set(int(k) for k in D))
    q, q2 = oscillation_targets(ctx.M, ctx.n, D, p_partial)
    targets = [q, q2]
    weights = [decompose(q, ctx.n), decompose(q2, ctx.n)]
    x, orbit = _prepare(ctx, x, digit_budget)
    stream = ExpansionStream(ctx, x, "oscillate", targets, orbit)
    stream.stats["oscillating_digits"] = D

    def generate():
        max_len = _entry_max_len(ctx, x)
        i, stage, current = 0, 1, 0
        while True:
            i += 1
            for pair, length in Schedule(weights[current]).blocks(i):
                yield from _segment(stream, pair, length, i, current, max_len)
                max_len = DEFAULT_MAX_LEN
            N = len(orbit)
            if N == 0:
                continue
            err = max(abs(Fraction(c, N) - t) for c, t in zip(orbit.counts, targets[current]))
            if err <= switch_threshold(q, q2, D, stage):
                stream._checkpoint("switch", i, current)
                current = 1 - current
                stage += 1
            else:
                stream._checkpoint("round", i, current)

    stream._gen = generate()
    return stream.advance(digit_budget)
