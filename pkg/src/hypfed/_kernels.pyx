# Compiled hot loops. Pure-Python twins live in _fallback.py and must stay
# result-identical; tests/test_backends.py runs both side by side.
#
# Field kernels hold residues in signed 64-bit integers and form products in
# 128 bits; they require q < 2**62 so that a sum of two residues fits.

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs, log1p, sqrt
from libc.stdlib cimport free, malloc

cnp.import_array()

ctypedef cnp.int64_t i64

cdef extern from *:
    ctypedef long long i128 "__int128"


# --------------------------------------------------------------------------
# geometry

cdef inline void _neg_mobius(double ax, double ay, double bx, double by,
                             double k, double* ox, double* oy) noexcept nogil:
    # (-a) (+)_k b
    cdef double x0 = -ax
    cdef double x1 = -ay
    cdef double xy = x0 * bx + x1 * by
    cdef double xx = x0 * x0 + x1 * x1
    cdef double yy = bx * bx + by * by
    cdef double c1 = 1.0 + 2.0 * k * xy + k * yy
    cdef double c2 = 1.0 - k * xx
    cdef double den = 1.0 + 2.0 * k * xy + k * k * xx * yy
    ox[0] = (c1 * x0 + c2 * bx) / den
    oy[0] = (c1 * x1 + c2 * by) / den


cdef inline double _ccw(double ax, double ay, double bx, double by,
                        double cx, double cy, double k) noexcept nogil:
    cdef double ux, uy, vx, vy, nu, nv
    _neg_mobius(ax, ay, bx, by, k, &ux, &uy)
    _neg_mobius(ax, ay, cx, cy, k, &vx, &vy)
    nu = sqrt(ux * ux + uy * uy)
    nv = sqrt(vx * vx + vy * vy)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return (ux / nu) * (vy / nv) - (uy / nu) * (vx / nv)


def ccw(double ax, double ay, double bx, double by, double cx, double cy, double k):
    return _ccw(ax, ay, bx, by, cx, cy, k)


def graham_stack(const double[:, ::1] pts, double k, double band):
    """Run the stack phase over ``pts`` (row 0 is the anchor, rest sorted).

    Returns the row indices kept on the stack, in order.
    """
    cdef Py_ssize_t n = pts.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] stack = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t top = 0
    cdef Py_ssize_t j
    cdef i64 a, b
    stack[0] = 0
    top = 1
    for j in range(1, n):
        while top > 1:
            a = stack[top - 2]
            b = stack[top - 1]
            if _ccw(pts[a, 0], pts[a, 1], pts[b, 0], pts[b, 1],
                    pts[j, 0], pts[j, 1], k) <= band:
                top -= 1
            else:
                break
        stack[top] = j
        top += 1
    return stack[:top].copy()


# --------------------------------------------------------------------------
# smoothed hinge loss for the SVM solver

def smooth_hinge(const double[:, ::1] V, const double[::1] w, double lam, double tau):
    """Smoothed hinge objective lam * sum tau*softplus((1 - <v_i, w>)/tau)
    plus 0.5*|w|^2, with its gradient and Hessian, in one pass over V.

    Returns ``(f, g, H)``.
    """
    cdef Py_ssize_t n = V.shape[0]
    cdef Py_ssize_t d = V.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g = np.zeros(d)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] H = np.zeros((d, d))
    cdef double[:, ::1] Hv = H
    cdef double loss = 0.0, z, e, s, c2, m
    cdef double gs[8]
    cdef Py_ssize_t i, a, b
    if d > 8:
        raise ValueError("smooth_hinge supports at most 8 features")
    for a in range(d):
        gs[a] = 0.0
    for i in range(n):
        m = 0.0
        for a in range(d):
            m += V[i, a] * w[a]
        z = (1.0 - m) / tau
        e = exp(-fabs(z))
        if z > 0.0:
            loss += z + log1p(e)
            s = 1.0 / (1.0 + e)
        else:
            loss += log1p(e)
            s = e / (1.0 + e)
        c2 = e / ((1.0 + e) * (1.0 + e))
        for a in range(d):
            gs[a] += s * V[i, a]
            for b in range(a + 1):
                Hv[a, b] += c2 * V[i, a] * V[i, b]
    m = 0.0
    for a in range(d):
        m += w[a] * w[a]
        g[a] = w[a] - lam * gs[a]
        for b in range(a + 1):
            Hv[a, b] *= lam / tau
            Hv[b, a] = Hv[a, b]
        Hv[a, a] += 1.0
    return 0.5 * m + lam * tau * loss, g, H


# --------------------------------------------------------------------------
# prime-field helpers (q < 2**62, residues in [0, q))

cdef inline i64 _mulmod(i64 a, i64 b, i64 q) noexcept nogil:
    return <i64>((<i128>a * b) % q)


cdef i64 _powmod(i64 a, i64 e, i64 q) noexcept nogil:
    cdef i64 r = 1
    a %= q
    if a < 0:
        a += q
    while e > 0:
        if e & 1:
            r = _mulmod(r, a, q)
        a = _mulmod(a, a, q)
        e >>= 1
    return r


cdef inline i64 _inv(i64 a, i64 q) noexcept nogil:
    return _powmod(a, q - 2, q)


def power_sums(const cnp.int64_t[::1] idx, const cnp.int64_t[::1] vals,
               long n_sums, i64 q):
    """S[l] = sum_j vals[j] * idx[j]**l mod q for l = 0 .. n_sums-1."""
    cdef Py_ssize_t m = idx.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.zeros(n_sums, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cur = np.empty(m, dtype=np.int64)
    cdef Py_ssize_t j
    cdef long l
    cdef i64 acc
    for j in range(m):
        cur[j] = vals[j] % q
    for l in range(n_sums):
        acc = 0
        for j in range(m):
            acc += cur[j]
            if acc >= q:
                acc -= q
        out[l] = acc
        for j in range(m):
            cur[j] = _mulmod(cur[j], idx[j], q)
    return out


def berlekamp_massey(const cnp.int64_t[::1] s, i64 q):
    """Shortest LFSR for ``s`` over F_q. Returns (connection poly, length)."""
    cdef Py_ssize_t n = s.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] C = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] Bp = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] T = np.zeros(n + 1, dtype=np.int64)
    cdef Py_ssize_t N, i
    cdef long L = 0, m = 1
    cdef i64 b = 1, d, coef
    C[0] = 1
    Bp[0] = 1
    for N in range(n):
        d = s[N] % q
        for i in range(1, L + 1):
            d = <i64>((d + <i128>C[i] * s[N - i]) % q)
        if d == 0:
            m += 1
            continue
        coef = _mulmod(d, _inv(b, q), q)
        if 2 * L <= N:
            for i in range(n + 1):
                T[i] = C[i]
            for i in range(n + 1 - m):
                C[i + m] = <i64>((C[i + m] - <i128>coef * Bp[i]) % q)
                if C[i + m] < 0:
                    C[i + m] += q
            L = N + 1 - L
            for i in range(n + 1):
                Bp[i] = T[i]
            b = d
            m = 1
        else:
            for i in range(n + 1 - m):
                C[i + m] = <i64>((C[i + m] - <i128>coef * Bp[i]) % q)
                if C[i + m] < 0:
                    C[i + m] += q
            m += 1
    return C[:L + 1].copy(), L


def chien_search(const cnp.int64_t[::1] poly, i64 q, i64 upto):
    """All x in [1, upto] with poly(x) == 0 mod q (coefficients low->high)."""
    cdef Py_ssize_t deg = poly.shape[0] - 1
    cdef Py_ssize_t i
    cdef i64 x, acc
    roots = []
    for x in range(1, upto + 1):
        acc = 0
        for i in range(deg, -1, -1):
            acc = <i64>((<i128>acc * x + poly[i]) % q)
        if acc == 0:
            roots.append(x)
    return np.asarray(roots, dtype=np.int64)


# Polynomial products and remainders accumulate in 128-bit integers. For
# q < 2**31 a product of residues is below 2**62, so they reduce only once
# per coefficient; larger moduli reduce after every term.

cdef i64 LAZY_Q = 2147483648

cdef inline i64 _red(i128 v, i64 q) noexcept nogil:
    cdef i64 r = <i64>(v % q)
    if r < 0:
        r += q
    return r


cdef Py_ssize_t _mul_full(const i64* a, Py_ssize_t na, const i64* b, Py_ssize_t nb,
                          i128* acc, i64 q) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef i64 ai
    if na == 0 or nb == 0:
        return 0
    for i in range(na + nb - 1):
        acc[i] = 0
    for i in range(na):
        ai = a[i]
        if ai == 0:
            continue
        if q < LAZY_Q:
            for j in range(nb):
                acc[i + j] += <i128>ai * b[j]
        else:
            for j in range(nb):
                acc[i + j] = (acc[i + j] + <i128>ai * b[j]) % q
    return na + nb - 1


cdef Py_ssize_t _sqr_full(const i64* a, Py_ssize_t na, i128* acc, i64 q) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef i64 ai
    if na == 0:
        return 0
    for i in range(2 * na - 1):
        acc[i] = 0
    for i in range(na):
        ai = a[i]
        if ai == 0:
            continue
        if q < LAZY_Q:
            acc[2 * i] += <i128>ai * ai
            for j in range(i + 1, na):
                acc[i + j] += 2 * (<i128>ai * a[j])
        else:
            acc[2 * i] = (acc[2 * i] + <i128>ai * ai) % q
            for j in range(i + 1, na):
                acc[i + j] = (acc[i + j] + 2 * (<i128>ai * a[j])) % q
    return 2 * na - 1


cdef Py_ssize_t _rem_monic(i128* p, Py_ssize_t n, const i64* m, Py_ssize_t dm, i64 q,
                           i64* out) noexcept nogil:
    """out = p mod m (m monic of degree dm); returns the trimmed length."""
    cdef Py_ssize_t i, j, r
    cdef i64 c
    for i in range(n - 1, dm - 1, -1):
        c = _red(p[i], q)
        if c == 0:
            continue
        if q < LAZY_Q:
            for j in range(dm):
                p[i - dm + j] -= <i128>c * m[j]
        else:
            for j in range(dm):
                p[i - dm + j] = (p[i - dm + j] - <i128>c * m[j]) % q
    r = n if n < dm else dm
    for i in range(r):
        out[i] = _red(p[i], q)
    while r > 0 and out[r - 1] == 0:
        r -= 1
    return r


cdef i128* _buf128(Py_ssize_t n) except NULL:
    cdef i128* p = <i128*>malloc((n if n > 0 else 1) * sizeof(i128))
    if p == NULL:
        raise MemoryError()
    return p


def poly_mulmod(const cnp.int64_t[::1] a, const cnp.int64_t[::1] b,
                const cnp.int64_t[::1] m, i64 q):
    """(a * b) mod m over F_q; m monic, inputs reduced. Low->high coefficients."""
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0], dm = m.shape[0] - 1, n, r
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.zeros(max(dm, 1), dtype=np.int64)
    cdef i64[::1] o = out
    cdef i128* acc = _buf128(na + nb)
    try:
        n = _mul_full(&a[0] if na else NULL, na, &b[0] if nb else NULL, nb, acc, q)
        r = _rem_monic(acc, n, &m[0], dm, q, &o[0])
    finally:
        free(acc)
    return out[:r].copy()


def poly_rem(const cnp.int64_t[::1] a, const cnp.int64_t[::1] m, i64 q):
    """a mod m over F_q for monic m."""
    cdef Py_ssize_t n = a.shape[0], dm = m.shape[0] - 1, i, r
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.zeros(max(min(n, dm), 1), dtype=np.int64)
    cdef i64[::1] o = out
    cdef i128* p = _buf128(n)
    try:
        for i in range(n):
            p[i] = a[i]
        r = _rem_monic(p, n, &m[0], dm, q, &o[0])
    finally:
        free(p)
    return out[:r].copy()


def poly_powmod(const cnp.int64_t[::1] base, object e, const cnp.int64_t[::1] m, i64 q):
    """base**e mod m over F_q (m monic) by left-to-right square and multiply."""
    cdef Py_ssize_t dm = m.shape[0] - 1, nr, nb, n
    if dm <= 0:
        return np.zeros(0, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] bb = np.zeros(dm, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] rr = np.zeros(dm, dtype=np.int64)
    cdef i64[::1] Bv = bb
    cdef i64[::1] R = rr
    red = poly_rem(base, m, q)
    nb = red.shape[0]
    for n in range(nb):
        Bv[n] = red[n]
    R[0] = 1
    nr = 1
    cdef i128* acc = _buf128(2 * dm + 1)
    try:
        for ch in bin(int(e))[2:]:
            n = _sqr_full(&R[0], nr, acc, q)
            nr = _rem_monic(acc, n, &m[0], dm, q, &R[0])
            if ch == '1':
                n = _mul_full(&R[0], nr, &Bv[0], nb, acc, q)
                nr = _rem_monic(acc, n, &m[0], dm, q, &R[0])
    finally:
        free(acc)
    return rr[:nr].copy()


def poly_divmod(const cnp.int64_t[::1] a, const cnp.int64_t[::1] b, i64 q):
    """(quotient, remainder) of a / b over F_q; inputs reduced and trimmed."""
    cdef Py_ssize_t n = a.shape[0], db = b.shape[0] - 1, i, j, r
    if db < 0:
        raise ZeroDivisionError("polynomial division by zero")
    cdef i64 inv = _inv(b[db], q), c
    cdef cnp.ndarray[cnp.int64_t, ndim=1] quo = np.zeros(max(n - db, 1), dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] rem = np.zeros(max(db, 1), dtype=np.int64)
    cdef i64[::1] Q = quo
    cdef i64[::1] Rm = rem
    cdef i128* p = _buf128(n)
    try:
        for i in range(n):
            p[i] = a[i]
        for i in range(n - 1, db - 1, -1):
            c = _mulmod(_red(p[i], q), inv, q)
            Q[i - db] = c
            if c == 0:
                continue
            if q < LAZY_Q:
                for j in range(db):
                    p[i - db + j] -= <i128>c * b[j]
            else:
                for j in range(db):
                    p[i - db + j] = (p[i - db + j] - <i128>c * b[j]) % q
        r = n if n < db else db
        for i in range(r):
            Rm[i] = _red(p[i], q)
    finally:
        free(p)
    while r > 0 and Rm[r - 1] == 0:
        r -= 1
    i = n - db if n > db else 0
    while i > 0 and Q[i - 1] == 0:
        i -= 1
    return quo[:i].copy(), rem[:r].copy()


cdef Py_ssize_t _make_monic(i64* a, Py_ssize_t n, i64 q) noexcept nogil:
    cdef i64 inv
    cdef Py_ssize_t i
    if n == 0:
        return 0
    inv = _inv(a[n - 1], q)
    for i in range(n):
        a[i] = _mulmod(a[i], inv, q)
    return n


def poly_gcd(const cnp.int64_t[::1] a, const cnp.int64_t[::1] b, i64 q):
    """Monic gcd over F_q; inputs reduced and trimmed."""
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0], n = max(na, nb), i, nr
    cdef cnp.ndarray[cnp.int64_t, ndim=1] A = np.zeros(max(n, 1), dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] Bq = np.zeros(max(n, 1), dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] T
    cdef i64[::1] Av = A
    cdef i64[::1] Bv = Bq
    for i in range(na):
        Av[i] = a[i]
    for i in range(nb):
        Bv[i] = b[i]
    na = _make_monic(&Av[0], na, q)
    nb = _make_monic(&Bv[0], nb, q)
    cdef i128* p = _buf128(n)
    try:
        while nb > 0:
            for i in range(na):
                p[i] = Av[i]
            nr = _rem_monic(p, na, &Bv[0], nb - 1, q, &Av[0])
            nr = _make_monic(&Av[0], nr, q)
            T = A
            A = Bq
            Bq = T
            Av = A
            Bv = Bq
            na, nb = nb, nr
    finally:
        free(p)
    return A[:na].copy()


def tvand_solve(const cnp.int64_t[::1] nodes, const cnp.int64_t[::1] s, i64 q):
    """Solve sum_b H_b * nodes_b**l = s[l], l < len(nodes), for H over F_q."""
    cdef Py_ssize_t t = nodes.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] P = np.zeros(t + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] quo = np.zeros(t, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.zeros(t, dtype=np.int64)
    cdef Py_ssize_t i, j
    cdef i64 b, acc, den, c
    # P(x) = prod (x - b)
    P[0] = 1
    for i in range(t):
        b = nodes[i] % q
        for j in range(i + 1, 0, -1):
            P[j] = <i64>((P[j - 1] - <i128>b * P[j]) % q)
            if P[j] < 0:
                P[j] += q
        P[0] = <i64>((-(<i128>b) * P[0]) % q)
        if P[0] < 0:
            P[0] += q
    for i in range(t):
        b = nodes[i] % q
        # synthetic division P(x) / (x - b)
        c = P[t]
        quo[t - 1] = c
        for j in range(t - 1, 0, -1):
            c = <i64>((P[j] + <i128>b * c) % q)
            quo[j - 1] = c
        acc = 0
        den = 0
        for j in range(t - 1, -1, -1):
            den = <i64>((<i128>den * b + quo[j]) % q)
        for j in range(t):
            acc = <i64>((acc + <i128>quo[j] * s[j]) % q)
        if den == 0:
            raise ZeroDivisionError("repeated node in Vandermonde system")
        out[i] = _mulmod(acc, _inv(den, q), q)
    return out
