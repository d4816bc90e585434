"""Kernel selection.

The compiled module ``hypfed._kernels`` is used when it imports; otherwise
(or when ``HYPFED_PURE_PYTHON=1``) everything routes to ``_fallback``. Field
routines additionally drop to the fallback whenever the modulus is too large
for 64-bit products.
"""
from contextlib import contextmanager
import os

import numpy as np

from . import _fallback

try:
    from . import _kernels
except ImportError:  # pragma: no cover - exercised when the build is skipped
    _kernels = None

KERNEL_Q_LIMIT = 2**62

_compiled_available = _kernels is not None
_active = _kernels if _compiled_available and os.environ.get("HYPFED_PURE_PYTHON") != "1" else None


def name():
    return "cython" if _active is not None else "python"


def compiled_available():
    return _compiled_available


def set_backend(which):
    global _active
    if which == "python":
        _active = None
    elif which == "cython":
        if not _compiled_available:
            raise RuntimeError("compiled kernels are not built")
        _active = _kernels
    else:
        raise ValueError(f"unknown backend {which!r}")


@contextmanager
def using(which):
    saved = _active
    set_backend(which)
    try:
        yield
    finally:
        globals()["_active"] = saved


def _geo():
    return _active if _active is not None else _fallback


def graham_stack(pts, k, band):
    pts = np.ascontiguousarray(pts, dtype=np.float64)
    return _geo().graham_stack(pts, float(k), float(band))


def ccw(a, b, c, k):
    return _geo().ccw(float(a[0]), float(a[1]), float(b[0]), float(b[1]),
                      float(c[0]), float(c[1]), float(k))


def smooth_hinge(V, w, lam, tau):
    V = np.ascontiguousarray(V, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    return _geo().smooth_hinge(V, w, float(lam), float(tau))


# ---------------------------------------------------------------------------
# field routines; all return lists of Python ints


def _fast(q):
    return _active is not None and q < KERNEL_Q_LIMIT


def _arr(v):
    return np.ascontiguousarray(np.asarray(list(v), dtype=np.int64))


def _trim(a):
    a = [int(c) for c in a]
    while a and a[-1] == 0:
        a.pop()
    return a


def power_sums(idx, vals, n_sums, q):
    if _fast(q):
        return [int(v) for v in _active.power_sums(_arr(int(i) % q for i in idx), _arr(int(v) % q for v in vals), int(n_sums), q)]
    return _fallback.power_sums(idx, vals, n_sums, q)


def berlekamp_massey(s, q):
    if _fast(q):
        C, L = _active.berlekamp_massey(_arr(int(v) % q for v in s), q)
        return [int(c) for c in C], int(L)
    return _fallback.berlekamp_massey(s, q)


def chien_search(poly, q, upto):
    if _fast(q):
        return [int(r) for r in _active.chien_search(_arr(int(c) % q for c in poly), q, int(upto))]
    return _fallback.chien_search(poly, q, upto)


def poly_rem(a, m, q):
    if _fast(q):
        return _trim(_active.poly_rem(_arr(int(c) % q for c in a), _arr(m), q))
    return _fallback.poly_rem(a, m, q)


def poly_mulmod(a, b, m, q):
    if _fast(q):
        a = [int(c) % q for c in a]
        b = [int(c) % q for c in b]
        if not a or not b:
            return []
        return _trim(_active.poly_mulmod(_arr(a), _arr(b), _arr(m), q))
    return _fallback.poly_mulmod(a, b, m, q)


def poly_powmod(base, e, m, q):
    if _fast(q):
        return _trim(_active.poly_powmod(_arr(int(c) % q for c in base), int(e), _arr(m), q))
    return _fallback.poly_powmod(base, e, m, q)


def poly_divmod(a, b, q):
    if _fast(q):
        qu, r = _active.poly_divmod(_arr(_trim(int(c) % q for c in a)), _arr(_trim(int(c) % q for c in b)), q)
        return [int(c) for c in qu], [int(c) for c in r]
    return _fallback.poly_divmod(a, b, q)


def poly_gcd(a, b, q):
    if _fast(q):
        return [int(c) for c in _active.poly_gcd(_arr(_trim(int(c) % q for c in a)), _arr(_trim(int(c) % q for c in b)), q)]
    return _fallback.poly_gcd(a, b, q)


def tvand_solve(nodes, s, q):
    if _fast(q):
        return [int(v) for v in _active.tvand_solve(_arr(int(b) % q for b in nodes), _arr(int(v) % q for v in s), q)]
    return _fallback.tvand_solve(nodes, s, q)
