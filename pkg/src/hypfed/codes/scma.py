"""Masked power-sum encoding of sparse label vectors (SCMA).

A client holding the sparse vector v sends S_l = sum_j v_j * j**(l-1) + z_l
(mod q) for l = 1..n_sums, where the masks z of all clients cancel. The
server sums the shares, finds the support with Berlekamp-Massey and a root
search, and recovers the aggregated values with a Vandermonde solve.
"""
from dataclasses import dataclass
import struct

import numpy as np

from .. import _backend
from ..errors import DecodeError, DomainError, FieldOverflowError
from . import poly
from .primes import is_prime

# supports up to this many candidate bins are searched exhaustively; larger
# ones use equal-degree splitting
EXHAUSTIVE_ROOT_LIMIT = 50_000
HEADER = struct.Struct("<QQ")


@dataclass(frozen=True)
class PrimeField:
    q: int

    def __post_init__(self):
        if not is_prime(self.q):
            raise DomainError(f"{self.q} is not prime")

    @property
    def bits(self):
        return (self.q - 1).bit_length()


def _q(field):
    return field.q if isinstance(field, PrimeField) else int(field)


def _uniform_below(rng, q, n):
    """n uniform integers in [0, q) for moduli beyond numpy's 64-bit range."""
    nbits = (q - 1).bit_length()
    nbytes = (nbits + 7) // 8
    out = []
    while len(out) < n:
        v = int.from_bytes(rng.bytes(nbytes), "little") >> (8 * nbytes - nbits)
        if v < q:
            out.append(v)
    return out


def generate_masks(L, n_sums, field, seed=None):
    """(L, n_sums) table of field elements whose columns sum to 0 mod q."""
    q = _q(field)
    if L < 1:
        raise DomainError("need at least one client")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if q <= 2**63:
        rows = [[int(v) for v in rng.integers(0, q, size=n_sums, dtype=np.uint64)] for _ in range(L - 1)]
    else:
        rows = [_uniform_below(rng, q, n_sums) for _ in range(L - 1)]
    last = [(-sum(col)) % q for col in zip(*rows)] if rows else [0] * n_sums
    return rows + [last]


def scma_encode(v, masks, field, n_sums):
    """Share of one client: power sums of the sparse map ``v`` plus masks."""
    q = _q(field)
    idx = sorted(v)
    for j in idx:
        if not 1 <= j < q:
            raise FieldOverflowError(f"bin index {j} does not fit in GF({q})")
        if not 0 <= v[j] < q:
            raise FieldOverflowError(f"label value {v[j]} does not fit in GF({q})")
    S = _backend.power_sums(idx, [v[j] for j in idx], n_sums, q) if idx else [0] * n_sums
    if masks is None:
        return S
    if len(masks) != n_sums:
        raise DomainError(f"mask length {len(masks)} != n_sums {n_sums}")
    return [(s + int(z)) % q for s, z in zip(S, masks)]


def aggregate(shares, field):
    q = _q(field)
    shares = list(shares)
    if not shares:
        return []
    n = len(shares[0])
    if any(len(s) != n for s in shares):
        raise DecodeError("shares have different lengths")
    return [sum(int(s[l]) for s in shares) % q for l in range(n)]


def _split(f, q, rng, out):
    """Append the roots of a monic squarefree f that splits into linear factors."""
    d = len(f) - 1
    if d == 0:
        return
    if d == 1:
        out.append((-f[0]) % q)
        return
    if q == 2:
        for x in (0, 1):
            if poly.evaluate(f, x, q) == 0:
                out.append(x)
        return
    while True:
        delta = int(rng.integers(0, q)) if q <= 2**63 else _uniform_below(rng, q, 1)[0]
        g = poly.powmod([delta, 1], (q - 1) // 2, f, q)
        g = poly.gcd(f, poly.sub(g, [1], q), q)
        if 0 < len(g) - 1 < d:
            break
    _split(g, q, rng, out)
    _split(poly.divmod_(f, g, q)[0], q, rng, out)


def find_roots(f, q, upto):
    """Distinct roots of f in [1, upto] (f given low -> high)."""
    f = poly.trim(f)
    if len(f) <= 1:
        return []
    if upto <= EXHAUSTIVE_ROOT_LIMIT:
        return _backend.chien_search(f, q, upto)
    f = poly.monic(f, q)
    # keep only the part that splits over GF(q) with simple roots
    xq = poly.powmod([0, 1], q, f, q)
    g = poly.gcd(f, poly.sub(xq, [0, 1], q), q)
    roots = []
    _split(g, q, np.random.default_rng(len(f)), roots)
    return sorted(r for r in roots if 1 <= r <= upto)


def scma_decode(aggregate_share, field, B, max_support):
    """Recover {bin: H_b} from summed shares."""
    q = _q(field)
    S = [int(s) % q for s in aggregate_share]
    n = len(S)
    if not any(S):
        return {}
    C, t = _backend.berlekamp_massey(S, q)
    if t > max_support or 2 * t > n:
        raise DecodeError(f"locator degree {t} exceeds the decodable support ({min(max_support, n // 2)})")
    P = poly.reverse(C, t)
    if len(P) - 1 != t:
        raise DecodeError("error locator has a root at zero")
    roots = find_roots(P, q, B)
    if len(roots) != t:
        raise DecodeError(f"found {len(roots)} support bins in [1, {B}] for a locator of degree {t}")
    try:
        H = _backend.tvand_solve(roots, S[:t], q)
    except ZeroDivisionError as exc:  # pragma: no cover - roots are distinct
        raise DecodeError("singular Vandermonde system") from exc
    if any(h == 0 for h in H):
        raise DecodeError("zero coefficient at a located bin")
    if _backend.power_sums(roots, H, n, q) != S:
        raise DecodeError("decoded support does not reproduce the syndromes")
    return {int(b): int(h) for b, h in zip(roots, H)}


# ---------------------------------------------------------------------------
# wire format: 16-byte little-endian header {q, n_sums} then n_sums u64 values


def share_to_bytes(share, q):
    if q >= 2**64:
        raise FieldOverflowError("modulus does not fit the 64-bit wire format")
    return HEADER.pack(int(q), len(share)) + struct.pack(f"<{len(share)}Q", *map(int, share))


def share_from_bytes(buf):
    if len(buf) < HEADER.size:
        raise DecodeError("share shorter than its header")
    q, n = HEADER.unpack_from(buf)
    body = buf[HEADER.size:]
    if len(body) != 8 * n:
        raise DecodeError(f"share declares {n} elements but carries {len(body) // 8}")
    vals = list(struct.unpack(f"<{n}Q", body))
    if any(v >= q for v in vals):
        raise DecodeError("share element outside the field")
    return int(q), vals
