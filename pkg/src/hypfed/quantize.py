"""Polar quantization of the Poincare disc.

Two grids are supported. The distance-margin grid picks the number of
angular and radial bins so that two points in one bin are never more than
epsilon apart. The equal-area grid spaces the radial boundaries so every bin
has the same hyperbolic area. Bins are numbered innermost ring first,
counter-clockwise from angle 0, starting at 1.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError
from .geometry import _k, as_points, circumference, from_polar, hyp_radius, principal_angle
from .hull import ConvexHull, graham_scan

DISTANCE_MARGIN = "distance_margin"
EQUAL_AREA = "equal_area"

# continuous bin coordinates this close to an integer snap onto it, so a point
# built exactly on a boundary lands in the upper bin despite rounding
_SNAP = 1e-9


@dataclass(frozen=True)
class QuantGrid:
    N_theta: int
    N_rh: int
    R: float
    k: float = 1.0
    epsilon: float | None = None
    mode: str = DISTANCE_MARGIN

    def __post_init__(self):
        if self.N_theta < 1 or self.N_rh < 1:
            raise DomainError("bin counts must be positive")
        if not 0 < self.R < self.s:
            raise DomainError(f"R must lie in (0, s={self.s})")
        if self.mode not in (DISTANCE_MARGIN, EQUAL_AREA):
            raise DomainError(f"unknown grid mode {self.mode!r}")

    @property
    def s(self):
        return 1.0 / math.sqrt(self.k)

    @property
    def R_H(self):
        return hyp_radius(self.R, self.s)

    @property
    def B(self):
        return self.N_theta * self.N_rh

    def radial_edges(self):
        """Hyperbolic radii h_0 = 0 < h_1 < ... < h_{N_rh} = R_H."""
        n = np.arange(self.N_rh + 1)
        if self.mode == DISTANCE_MARGIN:
            h = n * (self.R_H / self.N_rh)
        else:
            h = 2 * self.s * np.arcsinh(np.sqrt(n / self.N_rh) * math.sinh(self.R_H / (2 * self.s)))
        h[-1] = self.R_H
        return h

    def angular_edges(self):
        return np.arange(self.N_theta + 1) * (2 * np.pi / self.N_theta)

    def to_dict(self):
        return {"N_theta": self.N_theta, "N_rh": self.N_rh, "R": self.R, "k": self.k,
                "epsilon": self.epsilon, "mode": self.mode}


def build_grid(epsilon, R, k=1.0):
    """Distance-margin grid: any two points sharing a bin are within epsilon."""
    k = _k(k)
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    s = 1.0 / math.sqrt(k)
    R_H = hyp_radius(R, s)
    n_theta = max(1, math.ceil(2 * circumference(R_H, s) / epsilon))
    n_rh = max(1, math.ceil(2 * R_H / epsilon))
    return QuantGrid(n_theta, n_rh, float(R), k, float(epsilon), DISTANCE_MARGIN)


def build_equal_area_grid(N_theta, N_rh, R, k=1.0):
    return QuantGrid(int(N_theta), int(N_rh), float(R), _k(k), None, EQUAL_AREA)


def _snap_floor(t):
    r = np.round(t)
    t = np.where(np.abs(t - r) <= _SNAP * np.maximum(1.0, np.abs(t)), r, t)
    return np.floor(t).astype(np.int64)


def _radial_coord(r_H, grid):
    if grid.mode == DISTANCE_MARGIN:
        return r_H * (grid.N_rh / grid.R_H)
    s = grid.s
    return grid.N_rh * (np.sinh(r_H / (2 * s)) / math.sinh(grid.R_H / (2 * s))) ** 2


def bin_of(x, grid):
    """Return (n1, n2, linear) for one point or arrays of them for a batch."""
    x = as_points(x, grid.k, "x")
    r = np.sqrt(np.sum(x * x, axis=-1))
    if np.any(r > grid.R * (1 + 1e-12)):
        raise DomainError(f"point outside the quantized radius R={grid.R} (|x| = {np.max(r):.17g})")
    r = np.minimum(r, grid.R)
    s = grid.s
    r_H = np.minimum(2 * s * np.arctanh(r / s), grid.R_H)
    n1 = _snap_floor(principal_angle(x) * (grid.N_theta / (2 * np.pi))) % grid.N_theta + 1
    n2 = np.minimum(_snap_floor(_radial_coord(r_H, grid)), grid.N_rh - 1) + 1
    lin = (n2 - 1) * grid.N_theta + n1
    if np.ndim(lin) == 0:
        return int(n1), int(n2), int(lin)
    return n1, n2, lin


def linear_index(n1, n2, grid):
    return (np.asarray(n2) - 1) * grid.N_theta + np.asarray(n1)


def split_index(linear, grid):
    linear = np.asarray(linear, dtype=np.int64)
    if np.any(linear < 1) or np.any(linear > grid.B):
        raise DomainError(f"bin index outside [1, {grid.B}]")
    n1 = (linear - 1) % grid.N_theta + 1
    n2 = (linear - 1) // grid.N_theta + 1
    return n1, n2


def bin_center(linear, grid):
    """Disc point at the middle angle and middle radius of a bin."""
    n1, n2 = split_index(linear, grid)
    theta = (n1 - 0.5) * (2 * np.pi / grid.N_theta)
    s = grid.s
    if grid.mode == DISTANCE_MARGIN:
        h = (n2 - 0.5) * (grid.R_H / grid.N_rh)
    else:
        h = 2 * s * np.arcsinh(np.sqrt((n2 - 0.5) / grid.N_rh) * math.sinh(grid.R_H / (2 * s)))
    return from_polar(theta, s * np.tanh(h / (2 * s)))


def quantize_point(x, grid):
    return bin_center(bin_of(x, grid)[2], grid)


def epsilon_minimal_hull(points, grid, k=None):
    """Hull of the quantized extreme points of ``points``."""
    k = grid.k if k is None else _k(k)
    h = graham_scan(points, k)
    return graham_scan(quantize_point(h.points, grid), k)


def hull_bins(hull, grid):
    """Sorted linear bin indices of the vertices of a quantized hull."""
    pts = hull.points if isinstance(hull, ConvexHull) else np.asarray(hull)
    if len(pts) == 0:
        return []
    return sorted({int(v) for v in np.atleast_1d(bin_of(pts, grid)[2])})


def uniform_sample(N, R, k=1.0, seed=None):
    """N points distributed uniformly (hyperbolic area) in the disc of radius R."""
    k = _k(k)
    s = 1.0 / math.sqrt(k)
    R_H = hyp_radius(R, s)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    eta = 1.0 - rng.random(N)
    zeta = 2 * np.pi * (1.0 - rng.random(N))
    tau = 2 * s * np.arcsinh(np.sqrt(eta) * math.sinh(R_H / (2 * s)))
    alpha = s * np.tanh(tau / (2 * s))
    return from_polar(zeta, np.minimum(alpha, R))
