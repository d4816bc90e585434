"""Poincare disc of curvature -k.

Every function works on arrays whose last axis has length 2 and broadcasts
over the leading axes, so a single point is shape (2,) and a batch is (n, 2).
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError

# points with k|x|^2 above this are treated as being on the boundary
BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class Curvature:
    k: float = 1.0

    def __post_init__(self):
        if not (self.k > 0 and math.isfinite(self.k)):
            raise DomainError(f"curvature magnitude must be positive, got {self.k}")

    @property
    def s(self) -> float:
        return 1.0 / math.sqrt(self.k)


def _k(k):
    k = k.k if isinstance(k, Curvature) else float(k)
    if not k > 0:
        raise DomainError(f"curvature magnitude must be positive, got {k}")
    return k


def as_points(x, k=1.0, name="x"):
    """Validate and return ``x`` as a float array with last axis 2."""
    k = _k(k)
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1:] != (2,):
        raise DomainError(f"{name} must have a trailing axis of length 2, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} has non-finite coordinates")
    sq = k * np.sum(x * x, axis=-1)
    if np.any(sq > 1.0 - BOUNDARY_TOL):
        raise DomainError(f"{name} is not strictly inside the disc (k|x|^2 = {np.max(sq):.17g})")
    return x


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def _mobius(x, y, k):
    xy = _dot(x, y)[..., None]
    xx = _dot(x, x)[..., None]
    yy = _dot(y, y)[..., None]
    num = (1.0 + 2.0 * k * xy + k * yy) * x + (1.0 - k * xx) * y
    den = 1.0 + 2.0 * k * xy + k * k * xx * yy
    return num / den


def mobius_add(x, y, k=1.0):
    """x (+)_k y."""
    k = _k(k)
    return _mobius(as_points(x, k, "x"), as_points(y, k, "y"), k)


def _log(p, x, k):
    u = _mobius(-p, x, k)
    # x == p gives rounding noise in u; the limit is exactly zero
    u = np.where(np.all(x == p, axis=-1, keepdims=True), 0.0, u)
    n = np.sqrt(_dot(u, u))[..., None]
    sk = math.sqrt(k)
    lam = (1.0 - k * _dot(p, p))[..., None]
    arg = np.minimum(sk * n, 1.0 - 1e-16)
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(n > 0, lam / sk * np.arctanh(arg) / np.where(n > 0, n, 1.0), 0.0)
    return scale * u


def log_map(p, x, k=1.0):
    """Tangent vector at p pointing to x; zero when x == p."""
    k = _k(k)
    return _log(as_points(p, k, "p"), as_points(x, k, "x"), k)


def _exp(p, v, k):
    n = np.sqrt(_dot(v, v))[..., None]
    sk = math.sqrt(k)
    lam = (1.0 - k * _dot(p, p))[..., None]
    safe = np.where(n > 0, n, 1.0)
    step = np.where(n > 0, np.tanh(sk * n / lam) / (sk * safe), 0.0) * v
    return _mobius(p, step, k)


def exp_map(p, v, k=1.0):
    """Point reached from p along tangent vector v."""
    k = _k(k)
    p = as_points(p, k, "p")
    v = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise DomainError("tangent vector has non-finite components")
    return _exp(p, v, k)


def _dist(x, y, k):
    # |(-x) (+) y| written symmetrically in x and y
    d = x - y
    num = np.sqrt(_dot(d, d))
    den = np.sqrt(np.maximum(1.0 - 2.0 * k * _dot(x, y) + k * k * _dot(x, x) * _dot(y, y), 0.0))
    sk = math.sqrt(k)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(num > 0, sk * num / np.where(den > 0, den, 1.0), 0.0)
    return 2.0 / sk * np.arctanh(np.minimum(r, 1.0 - 1e-16))


def dist(x, y, k=1.0):
    """Hyperbolic distance d_k(x, y)."""
    k = _k(k)
    return _dist(as_points(x, k, "x"), as_points(y, k, "y"), k)


def pairwise_dist(X, Y, k=1.0):
    """Matrix of d_k(X[i], Y[j])."""
    k = _k(k)
    X = as_points(X, k, "X").reshape(-1, 2)
    Y = as_points(Y, k, "Y").reshape(-1, 2)
    return _dist(X[:, None, :], Y[None, :, :], k)


def geodesic_midpoint(x, y, k=1.0):
    k = _k(k)
    x = as_points(x, k, "x")
    y = as_points(y, k, "y")
    return _exp(x, 0.5 * _log(x, y, k), k)


def hyp_radius(R, s=1.0):
    """Hyperbolic distance from the origin of a point at Euclidean radius R."""
    R = np.asarray(R, dtype=np.float64)
    if np.any(R < 0) or np.any(R >= s):
        raise DomainError(f"Euclidean radius must lie in [0, s={s})")
    out = 2.0 * s * np.arctanh(R / s)
    return float(out) if out.ndim == 0 else out


def euc_radius(R_H, s=1.0):
    R_H = np.asarray(R_H, dtype=np.float64)
    if np.any(R_H < 0):
        raise DomainError("hyperbolic radius must be nonnegative")
    out = s * np.tanh(R_H / (2.0 * s))
    return float(out) if out.ndim == 0 else out


def circumference(r_H, s=1.0):
    out = 2.0 * np.pi * s * np.sinh(np.asarray(r_H, dtype=np.float64) / s)
    return float(out) if np.ndim(out) == 0 else out


def disc_area(r_H, s=1.0):
    """Area of a hyperbolic disc of radius r_H."""
    out = 4.0 * np.pi * s * s * np.sinh(np.asarray(r_H, dtype=np.float64) / (2.0 * s)) ** 2
    return float(out) if np.ndim(out) == 0 else out


def principal_angle(x):
    """Angle in [0, 2*pi); the origin gets 0."""
    x = np.asarray(x, dtype=np.float64)
    a = np.arctan2(x[..., 1], x[..., 0])
    a = np.where(a < 0, a + 2.0 * np.pi, a)
    # -tiny + 2*pi rounds to 2*pi
    return np.where(a >= 2.0 * np.pi, 0.0, a)


def from_polar(theta, r):
    theta = np.asarray(theta, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)
