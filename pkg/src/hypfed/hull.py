"""Minimal convex hulls in the Poincare disc.

``graham_scan`` sorts points around the point farthest from the origin and
runs the usual stack sweep with a hyperbolic orientation test. The sweep is
done by the compiled kernel when available. ``brute_force_hull`` is the
cubic reference used in tests.
"""
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import _backend
from .errors import DegenerateInputError, EmptyInputError, SizeCapError
from .geometry import _k, _log, _mobius, as_points, principal_angle

CCW_BAND = 1e-12
ANGLE_TIE = 1e-12
BRUTE_FORCE_CAP = 60


@dataclass(frozen=True, eq=False)
class ConvexHull:
    """Extreme points in counter-clockwise order, starting from the one
    farthest from the origin."""

    points: np.ndarray
    k: float = 1.0

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def as_set(self, decimals=None):
        pts = self.points if decimals is None else np.round(self.points, decimals)
        return {tuple(map(float, p)) for p in pts}

    def contains(self, x, band=CCW_BAND):
        """True for points inside or on the hull (Lemma-3 style edge test)."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        n = len(self.points)
        if n == 0:
            return np.zeros(len(x), dtype=bool)
        if n == 1:
            return np.all(x == self.points[0], axis=1)
        if n == 2:
            a, b = self.points
            on_line = np.abs(_ccw_many(a, b, x, self.k)) <= 1e-9
            da = _unit(_mobius(-x, a[None, :], self.k))
            db = _unit(_mobius(-x, b[None, :], self.k))
            between = np.sum(da * db, axis=1) <= 0
            return on_line & between
        ok = np.ones(len(x), dtype=bool)
        for i in range(n):
            a = self.points[i]
            b = self.points[(i + 1) % n]
            ok &= _ccw_many(a, b, x, self.k) >= -band
        return ok


def _unit(v, tiny=0.0):
    n = np.sqrt(np.sum(v * v, axis=-1, keepdims=True))
    return np.divide(v, n, out=np.zeros_like(v), where=n > tiny)


def _ccw_many(a, b, X, k):
    u = _unit(_mobius(-a, b, k))
    # x == a leaves rounding noise in (-a) (+) x; call that direction zero
    V = _unit(_mobius(np.broadcast_to(-a, X.shape), X, k), 1e-14)
    return u[0] * V[:, 1] - u[1] * V[:, 0]


def ccw(a, b, c, k=1.0):
    """Cross product of the unit directions from a toward b and toward c.

    Positive when c lies counter-clockwise of the geodesic a -> b.
    """
    k = _k(k)
    a, b, c = (as_points(v, k, n) for v, n in ((a, "a"), (b, "b"), (c, "c")))
    if np.array_equal(a, b) or np.array_equal(a, c):
        raise DegenerateInputError("ccw needs b and c distinct from a")
    return float(_backend.ccw(a, b, c, k))


def dedupe(points):
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(pts) < 2:
        return pts.copy()
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    srt = pts[order]
    keep = np.ones(len(srt), dtype=bool)
    keep[1:] = np.any(srt[1:] != srt[:-1], axis=1)
    # restore input order among survivors for reproducibility
    return pts[np.sort(order[keep])]


def _anchor(pts):
    """Index of the farthest point from the origin with deterministic ties."""
    sq = np.sum(pts * pts, axis=1)
    cand = np.flatnonzero(sq == sq.max())
    if len(cand) == 1:
        return int(cand[0])
    ang = principal_angle(pts[cand])
    j = np.lexsort((pts[cand, 0], ang))[0]
    return int(cand[j])


def _angular_order(pts, bi, k):
    """Anchor index followed by the remaining indices sorted by angle around
    the anchor, keeping only the farthest point along each direction."""
    b = pts[bi]
    rest = np.delete(np.arange(len(pts)), bi)
    if len(rest) == 0:
        return np.array([bi])
    nrm = -_log(b, np.zeros(2), k)
    nn = np.sqrt(nrm @ nrm)
    if nn == 0:
        # anchor at the origin means every other point is the origin too
        nrm = np.array([1.0, 0.0])
    else:
        nrm = nrm / nn
    t = np.array([-nrm[1], nrm[0]])
    v = _log(b, pts[rest], k)
    ang = np.arctan2(t[0] * v[:, 1] - t[1] * v[:, 0], v @ t)
    ang = np.where(ang < -np.pi / 2, ang + 2 * np.pi, ang)
    lens = np.sqrt(np.sum(v * v, axis=1))
    o = np.lexsort((-lens, ang))
    a_s = ang[o]
    gid = np.concatenate([[0], np.cumsum(np.diff(a_s) > ANGLE_TIE)])
    o2 = np.lexsort((-lens[o], gid))
    first = np.concatenate([[True], gid[o2][1:] != gid[o2][:-1]])
    picked = o[o2[first]]
    picked = picked[np.argsort(ang[picked], kind="stable")]
    return np.concatenate([[bi], rest[picked]])


def graham_scan(points, k=1.0, band=CCW_BAND):
    """Minimal convex hull of a finite point set."""
    k = _k(k)
    pts = as_points(np.asarray(points, dtype=np.float64).reshape(-1, 2), k, "points")
    if len(pts) == 0:
        raise EmptyInputError("graham_scan needs at least one point")
    pts = dedupe(pts)
    bi = _anchor(pts)
    if len(pts) <= 2:
        idx = [bi] + [i for i in range(len(pts)) if i != bi]
        return ConvexHull(pts[idx], k)
    order = _angular_order(pts, bi, k)
    stack = _backend.graham_stack(pts[order], k, band)
    return ConvexHull(pts[order][stack], k)


def _ccw_tensor(pts, k):
    # D[a, x] = unit direction of x seen from a; C[a, b, c] = ccw(a, b, c)
    D = _unit(_mobius(-pts[:, None, :], pts[None, :, :], k))
    return D[:, :, None, 0] * D[:, None, :, 1] - D[:, :, None, 1] * D[:, None, :, 0], D


def brute_force_hull(points, k=1.0, band=CCW_BAND):
    """Extreme points by exhaustive triangle and segment membership tests."""
    k = _k(k)
    pts = as_points(np.asarray(points, dtype=np.float64).reshape(-1, 2), k, "points")
    if len(pts) == 0:
        raise EmptyInputError("brute_force_hull needs at least one point")
    pts = dedupe(pts)
    n = len(pts)
    if n > BRUTE_FORCE_CAP:
        raise SizeCapError(f"brute_force_hull is capped at {BRUTE_FORCE_CAP} points, got {n}")
    if n <= 2:
        return graham_scan(pts, k)
    C, D = _ccw_tensor(pts, k)
    extreme = np.ones(n, dtype=bool)

    # q strictly between a and b on one geodesic
    pa, pb = np.array(list(combinations(range(n), 2))).T
    for q in range(n):
        m = (pa != q) & (pb != q)
        a, b = pa[m], pb[m]
        coll = np.abs(C[a, b, q]) <= band
        opposite = np.sum(D[q, a] * D[q, b], axis=1) < 0
        if np.any(coll & opposite):
            extreme[q] = False

    ta, tb, tc = np.array(list(combinations(range(n), 3))).T
    orient = np.sign(C[ta, tb, tc])
    good = np.abs(C[ta, tb, tc]) > band
    ta, tb, tc, orient = ta[good], tb[good], tc[good], orient[good]
    for q in np.flatnonzero(extreme):
        m = (ta != q) & (tb != q) & (tc != q)
        a, b, c, o = ta[m], tb[m], tc[m], orient[m]
        inside = ((o * C[a, b, q] >= -band) & (o * C[b, c, q] >= -band)
                  & (o * C[c, a, q] >= -band))
        if np.any(inside):
            extreme[q] = False
    ext = pts[extreme]
    if len(ext) <= 2:
        return graham_scan(ext, k)
    order = _angular_order(ext, _anchor(ext), k)
    return ConvexHull(ext[order], k)
