"""Brute-force ground truth for expansions.

:func:`enumerate_prefixes` lists every digit prefix whose orbit stays in
``[0, M/(beta-1)]``; these are exactly the prefixes of the expansions of
``x``.  :func:`validate_expansion` replays an artifact digit by digit and
checks the reconstruction bound with an independent interval evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .artifact import Artifact
from .dynamics import BetaContext, orbit_value
from .errors import DomainError, PrecisionBudgetExceeded, ValidationError
from .orbit import OrbitPoint
from .precision import CertifiedReal, Membership, Ordering, _ball_to_iv, _raw_to_fraction, decide, parse_rational

DEFAULT_MAX_DEPTH = 24
DEFAULT_MAX_NODES = 2_000_000
_MAX_BITS = 1 << 16


@dataclass
class BranchTree:
    """All admissible prefixes of ``x`` up to ``depth``, level by level."""

    x: object
    depth: int
    levels: list
    _sets: dict = field(default_factory=dict, repr=False)

    @property
    def counts(self) -> list:
        """Number of admissible prefixes at depths ``1..depth``."""
        return [len(level) for level in self.levels[1:]]

    def prefixes(self, depth: int) -> list:
        return [p for p, _ in self.levels[depth]]

    def contains(self, prefix) -> bool:
        prefix = bytes(prefix)
        d = len(prefix)
        if d > self.depth:
            raise ValidationError(f"prefix longer than the enumerated depth {self.depth}")
        if d not in self._sets:
            self._sets[d] = {p for p, _ in self.levels[d]}
        return prefix in self._sets[d]


def _check_x(ctx: BetaContext, x):
    if isinstance(x, (str, int)):
        x = parse_rational(x)
    if decide(x, 0) is Ordering.LESS or decide(x, ctx.upper) is Ordering.GREATER:
        raise DomainError("x has no expansion: it lies outside [0, M/(beta-1)]")
    return x


def enumerate_prefixes(
    ctx: BetaContext,
    x,
    depth: int,
    *,
    max_depth: int = DEFAULT_MAX_DEPTH,
    max_nodes: int = DEFAULT_MAX_NODES,
    keep_prefixes: bool = True,
    alphabet=None,
    interval=None,
) -> BranchTree:
    """Every admissible digit prefix of ``x`` of length at most ``depth``.

    ``alphabet`` and ``interval`` restrict the system to a sub-alphabet and
    a sub-interval (default: all digits and ``[0, M/(beta-1)]``).  Rational bases are handled in exact rational arithmetic.  Otherwise the
    orbit is tracked with integer balls at a precision covering the error
    growth, and any undecided membership is settled exactly.
    """
    x = _check_x(ctx, x)
    if depth < 0:
        raise ValidationError("depth must be non-negative")
    if depth > max_depth:
        raise PrecisionBudgetExceeded(f"depth {depth} above the enumeration cap {max_depth}")
    digits = tuple(range(ctx.M + 1)) if alphabet is None else tuple(sorted(set(alphabet)))
    for k in digits:
        ctx.check_digit(k)
    region = ctx.interval if interval is None else interval
    q = ctx.beta_rational
    lo_q, hi_q = region.lo.rational, region.hi.rational
    if q is not None and isinstance(x, Fraction) and lo_q is not None and hi_q is not None:
        step = lambda v, k: q * v - k
        inside = lambda prefix, v: lo_q <= v <= hi_q
        root = x
    else:
        W = 64 + math.ceil(depth * ctx.log2_beta) + 32
        if W > _MAX_BITS:
            raise PrecisionBudgetExceeded(f"depth {depth} needs {W} bits")
        bm, br = ctx.fixed_beta(W)
        box = region.fixed(W)
        one = 1 << W

        def step(v, k):
            mid, rad = v
            return ((bm * mid) >> W) - k * one, (((bm + br) * rad + abs(mid) * br) >> W) + 2

        def exact_point(prefix):
            if isinstance(x, Fraction):
                return orbit_value(ctx, x, prefix)
            y = CertifiedReal.coerce(x)
            for d in prefix:
                y = ctx.beta * y - d
            return y

        def inside(prefix, v):
            where = box.locate(*v)
            if where is Membership.UNDECIDED:
                return region.decide_contains(exact_point(prefix))
            return where is Membership.YES

        b = CertifiedReal.coerce(x).enclose(W)
        root = (b.mid, b.rad)
    levels = [[(b"", root)]]
    for d in range(depth):
        nxt = []
        for prefix, v in levels[-1]:
            for k in digits:
                w = step(v, k)
                child = prefix + bytes((k,))
                if inside(child, w):
                    nxt.append((child, w))
        if len(nxt) > max_nodes:
            raise PrecisionBudgetExceeded(f"more than {max_nodes} prefixes at depth {d + 1}")
        levels.append(nxt)
        if not keep_prefixes and d >= 1:
            levels[-2] = [None] * len(levels[-2])
    return BranchTree(x, depth, levels)


def branching_profile(ctx: BetaContext, x, N: int, **kwargs) -> list:
    """Counts ``c_1, ..., c_N`` of admissible prefixes per depth."""
    return enumerate_prefixes(ctx, x, N, keep_prefixes=False, **kwargs).counts


# --------------------------------------------------------------------------- validation


@dataclass
class ValidationReport:
    ok: bool
    N: int
    admissible: bool
    first_violation: int | None
    reconstruction_ok: bool
    reconstruction_log10_error: float | None
    checkpoint_mismatches: list
    violations: list

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "N": self.N,
            "admissible": self.admissible,
            "first_violation": self.first_violation,
            "reconstruction_ok": self.reconstruction_ok,
            "reconstruction_log10_error": self.reconstruction_log10_error,
            "checkpoint_mismatches": self.checkpoint_mismatches,
            "violations": self.violations,
        }


def replay_admissible(ctx: BetaContext, x, digits) -> int | None:
    """Index (1-based) of the first digit whose orbit point leaves I, or None."""
    x = parse_rational(x) if not isinstance(x, Fraction) else x
    orbit = OrbitPoint(ctx, x, budget=len(digits) + 64)
    I = ctx.interval
    M = ctx.M
    for i, d in enumerate(digits, 1):
        if d > M:
            return i
        orbit.push(d)
        if orbit.locate(I) is not Membership.YES and not orbit.certify_in(I):
            return i
    return None


def reconstruct_tail(ctx: BetaContext, x, digits, *, block: int = 64):
    """Rational bounds ``(lo, hi, U)`` on ``beta**N * (x - sum a_i beta**-i)`` and a lower bound on ``M/(beta-1)``.

    Evaluated by blockwise Horner's rule in interval arithmetic, independently
    of the orbit engine.
    """
    N = len(digits)
    extra = 64
    while True:
        prec = math.ceil(N * ctx.log2_beta) + extra
        iv = mpmath.iv
        old = iv.prec
        iv.prec = prec
        try:
            beta = _ball_to_iv(ctx.beta.enclose(prec + 16))
            pw = [iv.mpf(1)]
            for _ in range(block):
                pw.append(pw[-1] * beta)
            x = parse_rational(x) if not isinstance(x, Fraction) else x
            y = iv.mpf(x.numerator) / x.denominator
            for s in range(0, N, block):
                chunk = digits[s : s + block]
                m = len(chunk)
                acc = iv.mpf(0)
                for i, d in enumerate(chunk, 1):
                    if d:
                        acc += d * pw[m - i]
                y = pw[m] * y - acc
            U = _ball_to_iv(ctx.upper.enclose(prec + 16))
        finally:
            iv.prec = old
        lo, hi = _raw_to_fraction(y._mpi_[0]), _raw_to_fraction(y._mpi_[1])
        u_lo = _raw_to_fraction(U._mpi_[0])
        if hi - lo < u_lo / 1000:
            return lo, hi, u_lo
        extra *= 2


def validate_expansion(ctx: BetaContext, artifact: Artifact) -> ValidationReport:
    """Replay an artifact: admissibility, reconstruction and checkpoint counts."""
    digits = artifact.digits
    N = len(digits)
    violations = []
    first = replay_admissible(ctx, artifact.x, digits)
    if first is not None:
        violations.append({"kind": "admissibility", "index": first, "digit": digits[first - 1]})
    lo, hi, u_lo = reconstruct_tail(ctx, artifact.x, digits)
    # |x - S_N| <= beta**-N * M/(beta-1)  <=>  |y_N| <= M/(beta-1)
    rec_ok = hi <= u_lo and lo >= -u_lo
    mag = max(abs(lo), abs(hi))
    log10_tail = math.log10(mag.numerator) - math.log10(mag.denominator) if mag > 0 else None
    if not rec_ok:
        violations.append({"kind": "reconstruction", "index": N, "log10_tail": log10_tail})
    log10_err = None if log10_tail is None else log10_tail - N * math.log10(float(ctx.beta))
    mismatches = []
    M = artifact.M
    counts = [0] * (M + 1)
    pos = 0
    for cp in sorted(artifact.checkpoints, key=lambda c: c["N"]):
        n_cp = cp["N"]
        if n_cp > N:
            mismatches.append({"N": n_cp, "reason": "beyond the digit stream"})
            continue
        seg = digits[pos:n_cp]
        for k in range(M + 1):
            counts[k] += seg.count(k)
        pos = n_cp
        if list(cp["counts"]) != counts:
            mismatches.append({"N": n_cp, "stored": list(cp["counts"]), "replayed": list(counts)})
    for m in mismatches:
        violations.append({"kind": "checkpoint", **m})
    ok = first is None and rec_ok and not mismatches
    return ValidationReport(ok, N, first is None, first, rec_ok, log10_err, mismatches, violations)
