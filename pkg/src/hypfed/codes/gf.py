"""Small extension fields GF(p**n) for building B_h sequences.

Elements are coefficient tuples (low -> high) of length n. The modulus is the
first monic polynomial, in lexicographic order, that is irreducible and has x
as a primitive element, so ``x`` doubles as the generator used for logs.
"""
from functools import lru_cache
from itertools import product
import math

import sympy
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_irreducible_p


class ExtensionField:
    def __init__(self, p, n):
        self.p = int(p)
        self.n = int(n)
        self.order = self.p ** self.n
        self._baby = {}
        self._group_factors = sorted(sympy.factorint(self.order - 1).items())
        self.modulus = self._find_modulus()

    # ---- arithmetic
    def mul(self, a, b):
        p, n, f = self.p, self.n, self.modulus
        prod = [0] * (2 * n - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    prod[i + j] += ai * bj
        for i in range(2 * n - 2, n - 1, -1):
            c = prod[i] % p
            if c:
                for j in range(n):
                    prod[i - n + j] -= c * f[j]
        return tuple(c % p for c in prod[:n])

    def add(self, a, b):
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def pow(self, a, e):
        r = self.one
        e = int(e)
        while e:
            if e & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            e >>= 1
        return r

    @property
    def one(self):
        return (1,) + (0,) * (self.n - 1)

    @property
    def zero(self):
        return (0,) * self.n

    @property
    def gen(self):
        if self.n == 1:
            return (self._prime_root,)
        return (0, 1) + (0,) * (self.n - 2)

    # ---- construction
    def _is_primitive(self, g):
        N = self.order - 1
        return all(self.pow(g, N // r) != self.one for r, _ in self._group_factors)

    def _find_modulus(self):
        p, n = self.p, self.n
        if n == 1:
            self.modulus = (0, 1)
            self._prime_root = int(sympy.primitive_root(p))
            return self.modulus
        for tail in product(range(p), repeat=n):
            low = tail[::-1]
            if low[0] == 0:
                continue
            # galoistools wants high -> low
            if not gf_irreducible_p([1] + list(tail), p, ZZ):
                continue
            self.modulus = low + (1,)
            if self._is_primitive(self.gen):
                return self.modulus
        raise RuntimeError(f"no primitive modulus found for GF({p}^{n})")

    # ---- logarithms
    def log(self, y):
        """Discrete log of y to base ``gen`` (Pohlig-Hellman with BSGS)."""
        y = tuple(y)
        if y == self.zero:
            raise ValueError("log of zero")
        N = self.order - 1
        g = self.gen
        residues, moduli = [], []
        for r, e in self._group_factors:
            re = r ** e
            g0 = self.pow(g, N // r)
            x = 0
            for i in range(e):
                # strip the digits found so far, project onto the order-r subgroup
                t = self.mul(y, self.pow(g, (N - x) % N)) if x else y
                hi = self.pow(t, N // r ** (i + 1))
                d = self._bsgs(g0, hi, r)
                x += d * r ** i
            residues.append(x)
            moduli.append(re)
        return int(sympy.ntheory.modular.crt(moduli, residues)[0]) % N

    def _bsgs(self, g, y, order):
        m = math.isqrt(order - 1) + 1
        key = (g, order)
        if key not in self._baby:
            table = {}
            cur = self.one
            for j in range(m):
                table.setdefault(cur, j)
                cur = self.mul(cur, g)
            self._baby[key] = (table, self.pow(g, (order - m) % order))
        table, giant = self._baby[key]
        cur = y
        for i in range(m + 1):
            j = table.get(cur)
            if j is not None:
                return (i * m + j) % order
            cur = self.mul(cur, giant)
        raise RuntimeError("discrete log not found")


@lru_cache(maxsize=32)
def extension_field(p, n):
    return ExtensionField(p, n)
