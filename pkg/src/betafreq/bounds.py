"""Critical bases, growth envelopes and local-dimension bounds.

All logarithms are natural logarithms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .errors import DomainError, HypothesisViolated, ValidationError
from .precision import CertifiedReal, Ordering, decide, isolate_root, parse_rational

# Rows of the published table whose upper bound is not reproduced by the
# entropy formula (the source used unstated refinements).
UNREPRODUCED_ROWS = frozenset({10, 25})
DEFAULT_TABLE_NS = (1, 2, 3, 4, 5, 10, 25, 50, 100)


def critical_polynomial(n: int) -> list[int]:
    """Coefficients (highest first) of ``x**(n+1) - x**n - 1``."""
    return [1, -1] + [0] * (n - 1) + [-1]


@lru_cache(maxsize=None)
def beta_n(n: int) -> CertifiedReal:
    """The root in (1, 2) of ``x**(n+1) - x**n - 1``."""
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    return CertifiedReal.from_root(isolate_root(critical_polynomial(int(n)), (1, 2)))


@lru_cache(maxsize=None)
def generalized_golden(M: int) -> CertifiedReal:
    """``k+1`` for ``M = 2k`` and the positive root of ``y**2 - (k+1)y - (k+1)`` for ``M = 2k+1``."""
    if int(M) != M or M < 1:
        raise DomainError(f"M must be a positive integer, got {M!r}")
    k, odd = divmod(int(M), 2)
    if not odd:
        return CertifiedReal.from_rational(k + 1)
    return CertifiedReal.from_root(isolate_root([1, -(k + 1), -(k + 1)], (k + 1, k + 2)))


@lru_cache(maxsize=None)
def normality_threshold() -> CertifiedReal:
    """Root of ``x**3 - x**2 - 2x + 1`` in (1, 2), about 1.80194."""
    return CertifiedReal.from_root(isolate_root([1, -1, -2, 1], (1, 2)))


def _log(q) -> CertifiedReal:
    return CertifiedReal.coerce(q).log()


def binary_entropy(t) -> CertifiedReal:
    """``-t log t - (1-t) log(1-t)`` for rational ``t`` in [0, 1]."""
    t = Fraction(t)
    if not 0 <= t <= 1:
        raise DomainError("entropy argument must lie in [0, 1]")
    total = CertifiedReal.from_rational(0)
    for w in (t, 1 - t):
        if w:
            total = total - w * _log(w)
    return total


def lower_envelope(n: int) -> CertifiedReal:
    """``1 + (log n - log log n)/n``; undefined for ``n <= 1``."""
    if int(n) != n or n <= 1:
        raise DomainError("lower envelope needs n >= 2 (log log n must exist)")
    ln = _log(n)
    return 1 + (ln - ln.log()) / n


def check_lower(n: int) -> bool:
    """Certify ``f_n(lower_envelope(n)) < 0``, i.e. the envelope lies below beta_n.

    The underlying inequality needs ``log log n > 0``; for ``n = 2`` the check
    evaluates honestly and returns False.
    """
    x = lower_envelope(n)
    value = x ** (n + 1) - x**n - 1
    return decide(value, 0) is Ordering.LESS


def _min(a: CertifiedReal, b: CertifiedReal) -> CertifiedReal:
    return a if decide(a, b) is not Ordering.GREATER else b


def upper_envelope(M: int, n: int, *, capped: bool = True) -> CertifiedReal:
    """Entropy bound ``exp(log M/(n+1) + H(1/(n+1)))``, optionally capped at the generalized golden ratio."""
    if M < 1 or n < 1:
        raise DomainError("M and n must be positive")
    t = Fraction(1, n + 1)
    rate = t * _log(M) + binary_entropy(t)
    value = rate.exp()
    return _min(value, generalized_golden(M)) if capped else value


def count_bound(M: int, n: int, N: int, epsilon=0) -> CertifiedReal:
    """Hoeffding-type bound on the number of length-``N`` words whose top digit has frequency at least ``n/(n+1) - epsilon``."""
    eps = parse_rational(epsilon) if isinstance(epsilon, str) else Fraction(epsilon)
    heavy = Fraction(n, n + 1)
    if not 0 <= eps < heavy:
        raise DomainError(f"epsilon must lie in [0, {heavy})")
    light = Fraction(1, n + 1) + eps
    rate = light * _log(M) - (heavy - eps) * _log(heavy - eps) - light * _log(light)
    return (N * rate).exp()


# --------------------------------------------------------------------------- local dimension


def _vector(entries: Sequence) -> tuple[Fraction, ...]:
    return tuple(parse_rational(e) if isinstance(e, str) else Fraction(e) for e in entries)


@dataclass(frozen=True)
class BernoulliParams:
    """Digit weights of a Bernoulli convolution; all entries positive, summing to one."""

    q: tuple

    def __post_init__(self):
        q = _vector(self.q)
        if len(q) < 2:
            raise ValidationError("need at least two weights")
        if sum(q) != 1:
            raise ValidationError(f"weights must sum to 1, got {sum(q)}")
        if any(x < 0 for x in q):
            raise ValidationError("weights must be non-negative")
        object.__setattr__(self, "q", q)

    @property
    def M(self) -> int:
        return len(self.q) - 1

    @property
    def q_star(self) -> Fraction:
        return max(self.q)

    @property
    def q_star2(self) -> Fraction:
        """Largest weight strictly below the maximum; equals the maximum when all weights tie."""
        rest = [x for x in self.q if x != self.q_star]
        return max(rest) if rest else self.q_star


def local_dim_bound(p: Sequence, q, beta) -> CertifiedReal:
    """``-sum p_k log q_k / log beta``."""
    params = q if isinstance(q, BernoulliParams) else BernoulliParams(tuple(q))
    p = _vector(p)
    if len(p) != len(params.q):
        raise ValidationError("p and q must have the same length")
    beta = CertifiedReal.coerce(beta)
    if decide(beta, 1) is not Ordering.GREATER:
        raise DomainError("beta must exceed 1")
    total = CertifiedReal.from_rational(0)
    for pk, qk in zip(p, params.q):
        if pk == 0:
            continue
        if qk == 0:
            raise DomainError("zero weight paired with a positive frequency")
        total = total - pk * _log(qk)
    return total / beta.log()


def corollary_dim_bound(n: int, q, beta) -> CertifiedReal:
    """``-(n log q* + log q**)/((n+1) log beta)``, valid for ``beta < beta_n``."""
    params = q if isinstance(q, BernoulliParams) else BernoulliParams(tuple(q))
    beta = CertifiedReal.coerce(beta)
    if decide(beta, 1) is not Ordering.GREATER:
        raise DomainError("beta must exceed 1")
    if decide(beta, beta_n(n)) is not Ordering.LESS:
        raise HypothesisViolated(f"beta must be below beta_{n}")
    if params.q_star2 == 0:
        raise DomainError("second largest weight is zero")
    num = n * _log(params.q_star) + _log(params.q_star2)
    return -num / ((n + 1) * beta.log())


def asymptotic_ratio(n: int) -> CertifiedReal:
    """``(beta_n - 1) * n / log n``."""
    return (beta_n(n) - 1) * n / _log(n)


def beta_table(M: int = 2, ns: Sequence[int] = DEFAULT_TABLE_NS, decimals: int = 3) -> list[dict]:
    """Rows ``(n, beta_n, capped upper bound)`` with unreproduced rows flagged."""
    ns = list(ns)
    if not ns:
        raise ValidationError("empty n list")
    rows = []
    for n in ns:
        rows.append(
            {
                "n": n,
                "beta_n": beta_n(n).format(decimals),
                "upper_bound": upper_envelope(M, n).format(decimals),
                "flag": "not_reproduced" if M == 2 and n in UNREPRODUCED_ROWS else "",
            }
        )
    return rows
