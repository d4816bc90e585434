"""Dense polynomials over a prime field, coefficients low -> high.

Products, remainders, powers, division and gcd go through the kernel
backend; the rest are short Python loops.
"""
import numpy as np

from .. import _backend


def trim(a):
    a = [int(c) for c in a]
    while a and a[-1] == 0:
        a.pop()
    return a


def deg(a):
    return len(trim(a)) - 1


def monic(a, q):
    a = trim(a)
    if not a:
        return a
    inv = pow(a[-1], q - 2, q)
    return [c * inv % q for c in a]


def add(a, b, q):
    n = max(len(a), len(b))
    out = [0] * n
    for i, c in enumerate(a):
        out[i] = c
    for i, c in enumerate(b):
        out[i] = (out[i] + c) % q
    return trim(out)


def sub(a, b, q):
    return add(a, [(-c) % q for c in b], q)


def mul(a, b, q):
    a, b = trim(a), trim(b)
    if not a or not b:
        return []
    out = np.zeros(len(a) + len(b) - 1, dtype=object)
    for i, c in enumerate(a):
        if c:
            out[i:i + len(b)] += c * np.asarray(b, dtype=object)
    return trim(int(v) % q for v in out)


def divmod_(a, b, q):
    if not trim(b):
        raise ZeroDivisionError("polynomial division by zero")
    return _backend.poly_divmod(a, b, q)


def rem(a, b, q):
    b = monic(b, q)
    return _backend.poly_rem(a, b, q)


def gcd(a, b, q):
    """Monic greatest common divisor (empty when both are zero)."""
    return _backend.poly_gcd(a, b, q)


def powmod(base, e, m, q):
    return _backend.poly_powmod(base, e, monic(m, q), q)


def evaluate(a, x, q):
    acc = 0
    for c in reversed(a):
        acc = (acc * x + c) % q
    return acc


def derivative(a, q):
    return trim(i * c % q for i, c in enumerate(a) if i > 0)


def reverse(c, t):
    """x**t * C(1/x) for a polynomial C of degree <= t."""
    c = list(c) + [0] * (t + 1 - len(c))
    return trim(reversed(c[: t + 1]))


def from_roots(roots, q):
    p = [1]
    for r in roots:
        p = mul(p, [(-r) % q, 1], q)
    return p
