"""Pure-Python versions of the routines in ``_kernels.pyx``.

Same signatures as the compiled module. The geometry and field routines keep
its arithmetic order exactly; smooth_hinge is vectorized with numpy and
agrees to rounding. The field routines work on Python integers, so they also
cover moduli too large for the 64-bit kernels.
"""
import math

import numpy as np


def _neg_mobius(ax, ay, bx, by, k):
    x0 = -ax
    x1 = -ay
    xy = x0 * bx + x1 * by
    xx = x0 * x0 + x1 * x1
    yy = bx * bx + by * by
    c1 = 1.0 + 2.0 * k * xy + k * yy
    c2 = 1.0 - k * xx
    den = 1.0 + 2.0 * k * xy + k * k * xx * yy
    return (c1 * x0 + c2 * bx) / den, (c1 * x1 + c2 * by) / den


def ccw(ax, ay, bx, by, cx, cy, k):
    ux, uy = _neg_mobius(ax, ay, bx, by, k)
    vx, vy = _neg_mobius(ax, ay, cx, cy, k)
    nu = math.sqrt(ux * ux + uy * uy)
    nv = math.sqrt(vx * vx + vy * vy)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return (ux / nu) * (vy / nv) - (uy / nu) * (vx / nv)


def graham_stack(pts, k, band):
    rows = [(float(p[0]), float(p[1])) for p in pts]
    stack = [0]
    for j in range(1, len(rows)):
        cx, cy = rows[j]
        while len(stack) > 1:
            ax, ay = rows[stack[-2]]
            bx, by = rows[stack[-1]]
            if ccw(ax, ay, bx, by, cx, cy, k) <= band:
                stack.pop()
            else:
                break
        stack.append(j)
    return np.asarray(stack, dtype=np.int64)


def smooth_hinge(V, w, lam, tau):
    V = np.asarray(V, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    z = (1.0 - V @ w) / tau
    e = np.exp(-np.abs(z))
    loss = float(np.sum(np.maximum(z, 0.0) + np.log1p(e)))
    s = np.where(z > 0, 1.0 / (1.0 + e), e / (1.0 + e))
    c2 = e / ((1.0 + e) * (1.0 + e))
    g = w - lam * (s @ V)
    H = (lam / tau) * ((V.T * c2) @ V) + np.eye(len(w))
    return 0.5 * float(w @ w) + lam * tau * loss, g, H


# ---------------------------------------------------------------------------
# prime field, coefficients low -> high, Python ints


def _trim(a):
    n = len(a)
    while n and a[n - 1] == 0:
        n -= 1
    return a[:n]


def power_sums(idx, vals, n_sums, q):
    idx = [int(i) % q for i in idx]
    cur = [int(v) % q for v in vals]
    out = []
    for _ in range(n_sums):
        out.append(sum(cur) % q)
        cur = [(c * b) % q for c, b in zip(cur, idx)]
    return out


def berlekamp_massey(s, q):
    s = [int(v) % q for v in s]
    n = len(s)
    C = [1] + [0] * n
    B = [1] + [0] * n
    L, m, b = 0, 1, 1
    for N in range(n):
        d = s[N]
        for i in range(1, L + 1):
            d = (d + C[i] * s[N - i]) % q
        if d == 0:
            m += 1
            continue
        coef = d * pow(b, q - 2, q) % q
        if 2 * L <= N:
            T = C[:]
            for i in range(n + 1 - m):
                C[i + m] = (C[i + m] - coef * B[i]) % q
            L = N + 1 - L
            B = T
            b = d
            m = 1
        else:
            for i in range(n + 1 - m):
                C[i + m] = (C[i + m] - coef * B[i]) % q
            m += 1
    return C[: L + 1], L


def chien_search(poly, q, upto):
    poly = [int(c) % q for c in poly]
    roots = []
    for x in range(1, upto + 1):
        acc = 0
        for c in reversed(poly):
            acc = (acc * x + c) % q
        if acc == 0:
            roots.append(x)
    return roots


def poly_rem(a, m, q):
    p = [int(c) % q for c in a]
    m = [int(c) % q for c in m]
    dm = len(m) - 1
    for i in range(len(p) - 1, dm - 1, -1):
        c = p[i]
        if c == 0:
            continue
        p[i] = 0
        base = i - dm
        for j in range(dm):
            p[base + j] = (p[base + j] - c * m[j]) % q
    return _trim(p[:dm])


def poly_mulmod(a, b, m, q):
    a = [int(c) % q for c in a]
    b = [int(c) % q for c in b]
    if not a or not b:
        return []
    p = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            p[i + j] = (p[i + j] + ai * bj) % q
    return poly_rem(p, m, q)


def poly_powmod(base, e, m, q):
    if len(m) <= 1:
        return []
    r = [1]
    b = poly_rem(base, m, q)
    for ch in bin(int(e))[2:]:
        r = poly_mulmod(r, r, m, q)
        if ch == "1":
            r = poly_mulmod(r, b, m, q)
    return r


def poly_divmod(a, b, q):
    a = _trim([int(c) % q for c in a])
    b = _trim([int(c) % q for c in b])
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    inv = pow(b[-1], q - 2, q)
    r = list(a)
    db = len(b) - 1
    quo = [0] * max(len(a) - db, 0)
    for i in range(len(r) - 1, db - 1, -1):
        c = r[i] * inv % q
        quo[i - db] = c
        if c == 0:
            continue
        for j in range(db):
            r[i - db + j] = (r[i - db + j] - c * b[j]) % q
    return _trim(quo), _trim(r[:db])


def _monic(a, q):
    a = _trim(a)
    if not a:
        return a
    inv = pow(a[-1], q - 2, q)
    return [c * inv % q for c in a]


def poly_gcd(a, b, q):
    a = _monic([int(c) % q for c in a], q)
    b = _monic([int(c) % q for c in b], q)
    while b:
        a, b = b, _monic(poly_rem(a, b, q), q)
    return a


def tvand_solve(nodes, s, q):
    nodes = [int(b) % q for b in nodes]
    s = [int(v) % q for v in s]
    t = len(nodes)
    P = [1]
    for b in nodes:
        nxt = [0] * (len(P) + 1)
        for j, c in enumerate(P):
            nxt[j + 1] = (nxt[j + 1] + c) % q
            nxt[j] = (nxt[j] - b * c) % q
        P = nxt
    out = []
    for b in nodes:
        quo = [0] * t
        c = P[t]
        quo[t - 1] = c
        for j in range(t - 1, 0, -1):
            c = (P[j] + b * c) % q
            quo[j - 1] = c
        den = 0
        for j in range(t - 1, -1, -1):
            den = (den * b + quo[j]) % q
        if den == 0:
            raise ZeroDivisionError("repeated node in Vandermonde system")
        acc = sum(quo[j] * s[j] for j in range(t)) % q
        out.append(acc * pow(den, q - 2, q) % q)
    return out
