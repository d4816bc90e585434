"""Primality and field-size selection."""
import sympy

# deterministic Miller-Rabin witnesses, valid for n < 3.3e24
_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_LIMIT = 3317044064679887385961981


def is_prime(n: int) -> bool:
    n = int(n)
    if n < 2:
        return False
    for p in _WITNESSES:
        if n % p == 0:
            return n == p
    if n >= _MR_LIMIT:
        return bool(sympy.isprime(n))
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    n = max(2, int(n))
    while not is_prime(n):
        n += 1
    return n


def prime_power(n: int):
    """Return (p, e) if n = p**e with p prime, else None."""
    n = int(n)
    if n < 2:
        return None
    f = sympy.factorint(n)
    if len(f) != 1:
        return None
    (p, e), = f.items()
    return int(p), int(e)


def next_prime_power(n: int) -> int:
    n = max(2, int(n))
    while prime_power(n) is None:
        n += 1
    return n


def field_size(L, h, B, labels=()):
    """Smallest prime q with q > B, q >= (L+1)**h and q > sum(labels).

    The last bound keeps every aggregated bin value an exact integer even
    when more than h labels collide, so an overfull bin is reported rather
    than silently wrapped.
    """
    need = max((int(L) + 1) ** int(h), int(B) + 1, sum(int(a) for a in labels) + 1)
    return next_prime(need)
