"""B_h sequences: construction, exhaustive checks and decomposition of sums."""
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement
import math

import numpy as np
import sympy

from ..errors import DomainError, SizeCapError, UnresolvableLabelError
from .gf import extension_field
from .primes import next_prime, next_prime_power, prime_power

IS_BH_MAX_LEN = 12
IS_BH_MAX_H = 4
# discrete logs stay cheap when the largest prime factor of P**h - 1 is small
SMOOTH_LIMIT = 10**6
SMOOTH_CANDIDATES = 12
# above this field size the default construction switches to powers of h+1
BOSE_CHOWLA_LIMIT = 2**58
# meet-in-the-middle tables up to this many half-sums
MITM_TABLE_CAP = 2_000_000


@dataclass(frozen=True)
class BhSequence:
    h: int
    elements: tuple

    def __post_init__(self):
        if self.h < 1:
            raise DomainError("h must be positive")
        el = tuple(int(a) for a in self.elements)
        if any(a <= 0 for a in el) or any(b <= a for a, b in zip(el, el[1:])):
            raise DomainError("B_h elements must be strictly increasing positive integers")
        object.__setattr__(self, "elements", el)

    def __len__(self):
        return len(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def __iter__(self):
        return iter(self.elements)


def _check_caps(seq, h):
    if len(seq) > IS_BH_MAX_LEN or h > IS_BH_MAX_H:
        raise SizeCapError(f"exhaustive check limited to {IS_BH_MAX_LEN} elements and h <= {IS_BH_MAX_H}")


def is_bh(seq, h):
    """True iff all sums of exactly h elements (repetition allowed) differ."""
    seq = [int(a) for a in seq]
    _check_caps(seq, h)
    seen = set()
    for c in combinations_with_replacement(seq, h):
        s = sum(c)
        if s in seen:
            return False
        seen.add(s)
    return True


def is_bh_upto(seq, h):
    """True iff all sums of between 1 and h elements differ.

    This is the property decoding relies on; it equals ``is_bh`` of the
    sequence with a 0 prepended.
    """
    seq = [int(a) for a in seq]
    _check_caps(seq, h)
    return is_bh([0] + seq, h) if 0 not in seq else False


@lru_cache(maxsize=64)
def _bose_chowla(P, h):
    p, ell = prime_power(P)
    F = extension_field(p, ell * h)
    Q = F.order
    beta = F.gen
    # GF(P) sits inside GF(Q) as 0 and the powers of beta**((Q-1)/(P-1))
    gamma = F.pow(beta, (Q - 1) // (P - 1))
    sub = [F.zero]
    cur = F.one
    for _ in range(P - 1):
        sub.append(cur)
        cur = F.mul(cur, gamma)
    logs = sorted(F.log(F.add(beta, a)) for a in sub)
    lo = logs[0]
    return tuple(a - lo for a in logs[1:])


def _smooth_power(m, h):
    """First prime P >= m+1 whose P**h - 1 has no prime factor above
    SMOOTH_LIMIT, else the smoothest of the first few candidates.

    Primes keep the field degree at h; a prime power p**e would make it e*h.
    """
    P = next_prime(m + 1)
    best = None
    for _ in range(SMOOTH_CANDIDATES):
        top = max(sympy.factorint(P**h - 1))
        if top <= SMOOTH_LIMIT:
            return P
        if best is None or top < best[0]:
            best = (top, P)
        P = next_prime(P + 1)
    return best[1]


def digit_sequence(m, h):
    """1, h+1, (h+1)**2, ...: a sum of at most h terms is read off its
    base-(h+1) digits, so all such sums differ."""
    return BhSequence(int(h), tuple((int(h) + 1) ** i for i in range(int(m))))


def _superincreasing(el, h):
    total = 0
    for a in el:
        if a <= h * total:
            return False
        total += a
    return True


def _greedy(H, el, h):
    """Decomposition for superincreasing sequences: take each element, from
    the largest, as often as it fits."""
    out = []
    for a in reversed(el):
        c = min(H // a, h - len(out))
        out.extend([a] * c)
        H -= c * a
    return [tuple(sorted(out))] if H == 0 and out else []


def construct_bh(m, h, p_power=None):
    """m-element sequence whose sums of at most h terms are all distinct.

    Built from discrete logs in GF(P**h) where P = p_power >= m + 1 is a
    prime power. The default is the smallest admissible P for which the
    logs are cheap (see ``_smooth_power``); when P**h would pass
    BOSE_CHOWLA_LIMIT the powers of h+1 are used instead.
    """
    m, h = int(m), int(h)
    if m < 1 or h < 1:
        raise DomainError("m and h must be positive")
    if m == 1:
        return BhSequence(h, (1,))
    if h == 1:
        return BhSequence(1, tuple(range(1, m + 1)))
    if p_power is None:
        P = _smooth_power(m, h)
        if P**h >= BOSE_CHOWLA_LIMIT:
            return digit_sequence(m, h)
    else:
        P = int(p_power)
    if prime_power(P) is None or P < m + 1:
        raise DomainError(f"p_power must be a prime power >= m+1, got {P}")
    return BhSequence(h, _bose_chowla(P, h)[:m])


def _backtrack(H, seq, h, limit):
    el = sorted(int(a) for a in seq)
    out = []

    def rec(target, start, left, acc):
        if len(out) >= limit:
            return
        if target == 0:
            if acc:
                out.append(tuple(sorted(acc)))
            return
        if left == 0:
            return
        for i in range(start, -1, -1):
            a = el[i]
            if a > target:
                continue
            if a * left < target:
                break
            acc.append(a)
            rec(target - a, i, left - 1, acc)
            acc.pop()

    rec(int(H), len(el) - 1, int(h), [])
    return out


@lru_cache(maxsize=16)
def _half_table(seq, half):
    """Multisets of at most ``half`` elements, sorted by their sums."""
    combos = [c for r in range(half + 1) for c in combinations_with_replacement(seq, r)]
    sums = np.array([sum(c) for c in combos], dtype=np.int64)
    order = np.argsort(sums, kind="stable")
    return sums[order], [combos[i] for i in order]


def _table_size(m, half):
    return sum(math.comb(m + r - 1, r) for r in range(half + 1))


def decompositions(H, seq, h, limit=2):
    """Multisets of at most h sequence elements summing to H (at most ``limit``).

    Large h uses a meet-in-the-middle table of sums of at most ceil(h/2)
    elements; small cases and huge values fall back to backtracking.
    """
    el = tuple(sorted(int(a) for a in seq))
    H, h = int(H), int(h)
    if _superincreasing(el, h):
        return _greedy(H, el, h)
    half = (h + 1) // 2
    if (h <= 3 or not el or h * el[-1] >= 2**62
            or _table_size(len(el), half) > MITM_TABLE_CAP):
        return _backtrack(H, el, h, limit)
    sums, combos = _half_table(el, half)
    need = H - sums
    lo = np.searchsorted(sums, need, side="left")
    hi = np.searchsorted(sums, need, side="right")
    found = set()
    for i in np.flatnonzero(hi > lo):
        for j in range(lo[i], hi[i]):
            c = combos[i] + combos[j]
            if 0 < len(c) <= h:
                found.add(tuple(sorted(c)))
    return sorted(found)[:limit]


def bh_decompose(H, seq, h):
    """The unique multiset of at most h elements of ``seq`` summing to H."""
    found = decompositions(H, seq, h, limit=2)
    if not found:
        raise UnresolvableLabelError(f"value {H} is not a sum of at most {h} labels", value=H)
    if len(found) > 1:
        raise UnresolvableLabelError(f"value {H} has several decompositions: {found}", value=H)
    return found[0]
