"""Dense univariate polynomial helpers.

Coefficient lists are stored lowest degree first (index ``i`` holds the
coefficient of ``x**i``). The public API of the package uses the opposite
convention, highest degree first; conversion happens at the boundary.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import gmpy2


def trim(c: Sequence) -> list:
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


def degree(c: Sequence) -> int:
    c = trim(c)
    if len(c) == 1 and c[0] == 0:
        return -1
    return len(c) - 1


def from_highest(coeffs: Sequence[int]) -> list[int]:
    return trim(list(reversed([int(a) for a in coeffs])))


def to_highest(c: Sequence) -> tuple:
    return tuple(reversed(trim(c)))


def primitive(c: Sequence) -> list[int]:
    """Clear denominators and content; keeps the sign pattern of ``c``."""
    den = 1
    for a in c:
        den = den * Fraction(a).denominator // gmpy2.gcd(den, Fraction(a).denominator)
    ints = [int(Fraction(a) * den) for a in c]
    g = 0
    for a in ints:
        g = gmpy2.gcd(g, a)
    if g > 1:
        ints = [a // int(g) for a in ints]
    return trim(ints)


def evaluate(c: Sequence, x) -> Fraction:
    acc = Fraction(0)
    for a in reversed(c):
        acc = acc * x + a
    return acc


def sign_at(c: Sequence[int], x: Fraction) -> int:
    """Exact sign of an integer polynomial at a rational point."""
    x = Fraction(x)
    u, v = gmpy2.mpz(x.numerator), gmpy2.mpz(x.denominator)
    d = len(c) - 1
    nonzero = [i for i, a in enumerate(c) if a]
    if len(nonzero) * 4 < len(c):
        total = gmpy2.mpz(0)
        for i in nonzero:
            total += c[i] * u**i * v ** (d - i)
    else:
        # homogeneous Horner: sum c_i u^i v^(d-i)
        total = gmpy2.mpz(c[d])
        vpow = gmpy2.mpz(1)
        for i in range(d - 1, -1, -1):
            vpow *= v
            total = total * u + c[i] * vpow
    return (total > 0) - (total < 0)


def derivative(c: Sequence) -> list:
    if len(c) <= 1:
        return [0]
    return trim([i * c[i] for i in range(1, len(c))])


def reverse(c: Sequence) -> list:
    return list(reversed(trim(c)))


def sign_variations(c: Sequence) -> int:
    count = 0
    last = 0
    for a in c:
        if a:
            s = 1 if a > 0 else -1
            if last and s != last:
                count += 1
            last = s
    return count


def taylor_shift(c: Sequence[int], a: Fraction) -> list[int]:
    """Integer coefficients of ``v**d * p(x + u/v)`` for ``a = u/v``."""
    a = Fraction(a)
    u, v = a.numerator, a.denominator
    d = len(c) - 1
    out = [gmpy2.mpz(0)] * (d + 1)
    nonzero = [i for i, ci in enumerate(c) if ci]
    if u == 0:
        return [int(ci) * v**d for ci in c]
    upow = [gmpy2.mpz(1)]
    vpow = [gmpy2.mpz(1)]
    for _ in range(d):
        upow.append(upow[-1] * u)
        vpow.append(vpow[-1] * v)
    if len(nonzero) * 4 < len(c):
        for i in nonzero:
            ci = c[i]
            binom = gmpy2.mpz(1)
            for j in range(i + 1):
                out[j] += ci * binom * upow[i - j] * vpow[d - i + j]
                binom = binom * (i - j) // (j + 1)
        return [int(t) for t in out]
    # dense: scale, shift by one, unscale (classical O(d^2) Horner shift)
    scaled = [gmpy2.mpz(c[i]) * upow[i] * vpow[d - i] for i in range(d + 1)]
    for k in range(d):
        for j in range(d - 1, k - 1, -1):
            scaled[j] += scaled[j + 1]
    # scaled holds coefficients of v^d p(u(y+1)/v) in y; substitute y = v x / u
    out = []
    for j in range(d + 1):
        q, r = divmod(scaled[j] * vpow[j], upow[j])
        if r:
            raise ArithmeticError("non-exact Taylor shift")
        out.append(int(q))
    return out


def scale_variable(c: Sequence[int], s: Fraction) -> list[int]:
    """Integer coefficients of ``den**d * p(s*x)``."""
    s = Fraction(s)
    u, v = s.numerator, s.denominator
    d = len(c) - 1
    return [int(c[i]) * u**i * v ** (d - i) for i in range(d + 1)]


def descartes_interval(c: Sequence[int], a: Fraction, b: Fraction) -> int:
    """Descartes bound on the number of roots in the open interval (a, b)."""
    scaled = scale_variable(taylor_shift(c, a), Fraction(b) - Fraction(a))
    return sign_variations(taylor_shift(scaled[::-1], Fraction(1)))


def descartes_halfline(c: Sequence[int], a: Fraction) -> int:
    """Descartes bound on the number of roots in (a, infinity)."""
    return sign_variations(taylor_shift(c, a))


# --- exact arithmetic over the rationals -------------------------------------------------


def pmul(a: Sequence, b: Sequence) -> list:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    return trim(out)


def padd(a: Sequence, b: Sequence) -> list:
    n = max(len(a), len(b))
    return trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def pscale(a: Sequence, s) -> list:
    return trim([x * s for x in a])


def pdivmod(a: Sequence, b: Sequence) -> tuple[list, list]:
    a = [Fraction(x) for x in trim(a)]
    b = [Fraction(x) for x in trim(b)]
    db = len(b) - 1
    if db < 0 or (db == 0 and b[0] == 0):
        raise ZeroDivisionError("polynomial division by zero")
    if len(a) - 1 < db:
        return [Fraction(0)], a
    q = [Fraction(0)] * (len(a) - db)
    lead = b[-1]
    for k in range(len(a) - 1 - db, -1, -1):
        coef = a[k + db] / lead
        q[k] = coef
        if coef:
            for j in range(db + 1):
                a[k + j] -= coef * b[j]
    return trim(q), trim(a[:db] if db else [Fraction(0)])


def prem(a: Sequence, b: Sequence) -> list:
    return pdivmod(a, b)[1]


def pgcd(a: Sequence, b: Sequence) -> list:
    a = trim([Fraction(x) for x in a])
    b = trim([Fraction(x) for x in b])
    while degree(b) >= 0:
        a, b = b, prem(a, b)
    if degree(a) < 0:
        return [Fraction(0)]
    lead = a[-1]
    return [x / lead for x in a]


def squarefree(c: Sequence[int]) -> list[int]:
    g = pgcd(c, derivative(c))
    if degree(g) <= 0:
        return trim(list(c))
    q, r = pdivmod(c, g)
    return primitive(q)
