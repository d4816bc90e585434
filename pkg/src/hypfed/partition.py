"""Grouping of hulls by balanced minimum cut.

Hulls become nodes of a complete graph whose edge weight is the inverse of
the mean hyperbolic distance between their vertices. Two groups are found
with Kernighan-Lin; more than two with normalized spectral clustering
followed by an exact balanced assignment.
"""
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.cluster.vq import kmeans2
from scipy.optimize import Bounds, LinearConstraint, milp

from .errors import DomainError, EmptyInputError, InfeasibleGroupingError
from .geometry import _k, pairwise_dist

DIST_FLOOR = 1e-9
SAME_CLIENT_WEIGHT = 1e-12
KL_MAX_PASSES = 100
KL_RESTARTS = 4


@dataclass
class HullGraph:
    weights: np.ndarray
    client_of: np.ndarray | None = None

    @property
    def n(self):
        return len(self.weights)


@dataclass
class Grouping:
    """assignment[i] is the 0-based group of node i."""

    assignment: np.ndarray
    J: int
    history: list = field(default_factory=list)

    def groups(self):
        return [np.flatnonzero(self.assignment == j) for j in range(self.J)]


def mean_hull_distance(A, B, k=1.0):
    return float(np.mean(pairwise_dist(np.asarray(A), np.asarray(B), k)))


def build_hull_graph(hulls, k=1.0, client_of=None):
    k = _k(k)
    pts = [np.asarray(getattr(h, "points", h), dtype=np.float64).reshape(-1, 2) for h in hulls]
    if len(pts) < 2:
        raise DomainError("a hull graph needs at least two hulls")
    if any(len(p) == 0 for p in pts):
        raise EmptyInputError("every hull must have at least one vertex")
    n = len(pts)
    W = np.zeros((n, n))
    for u, v in combinations(range(n), 2):
        d = mean_hull_distance(pts[u], pts[v], k)
        W[u, v] = W[v, u] = 1.0 / max(d, DIST_FLOOR)
    co = None if client_of is None else np.asarray(client_of)
    return HullGraph(W, co)


def cut_weight(W, assignment):
    a = np.asarray(assignment)
    cross = a[:, None] != a[None, :]
    return float(np.sum(W[cross]) / 2.0)


def _weights(g):
    return g.weights if isinstance(g, HullGraph) else np.asarray(g, dtype=np.float64)


def kernighan_lin_bisect(g, max_passes=KL_MAX_PASSES, init=None):
    """Balanced bisection by Kernighan-Lin passes.

    The default start puts even-indexed nodes in group 0 and odd ones in
    group 1. ``history`` records the cut weight before the first pass and
    after every pass.
    """
    W = _weights(g)
    n = len(W)
    if n % 2:
        raise DomainError(f"balanced bisection needs an even node count, got {n}")
    side = (np.arange(n) % 2) if init is None else np.asarray(init, dtype=np.int64).copy()
    if np.sum(side == 0) != n // 2:
        raise DomainError("initial split is not balanced")
    history = [cut_weight(W, side)]
    for _ in range(max_passes):
        # D = external - internal cost
        same = side[:, None] == side[None, :]
        D = np.where(same, -W, W).sum(axis=1) + np.diag(W)
        locked = np.zeros(n, dtype=bool)
        gains, swaps = [], []
        cur = side.copy()
        for _ in range(n // 2):
            A = np.flatnonzero((cur == 0) & ~locked)
            Bn = np.flatnonzero((cur == 1) & ~locked)
            G = D[A][:, None] + D[Bn][None, :] - 2 * W[np.ix_(A, Bn)]
            i, j = np.unravel_index(np.argmax(G), G.shape)
            a, b = A[i], Bn[j]
            gains.append(G[i, j])
            swaps.append((a, b))
            locked[a] = locked[b] = True
            # move a to side 1 and b to side 0, then refresh D
            for x in np.flatnonzero(~locked):
                sa = 1 if cur[x] == cur[a] else -1
                sb = 1 if cur[x] == cur[b] else -1
                D[x] += 2 * sa * W[x, a] + 2 * sb * W[x, b]
            cur[a], cur[b] = 1, 0
        cum = np.cumsum(gains)
        best = int(np.argmax(cum))
        if cum[best] <= 1e-12 * max(1.0, history[-1]):
            break
        new = side.copy()
        for a, b in swaps[: best + 1]:
            new[a], new[b] = 1, 0
        new_cut = cut_weight(W, new)
        if new_cut >= history[-1]:
            break
        side = new
        history.append(new_cut)
    return Grouping(side, 2, history)


def kl_best_of(g, restarts=KL_RESTARTS, seed=0):
    """KL from the alternating split plus ``restarts`` seeded random splits;
    the lowest cut wins (ties keep the earlier start)."""
    W = _weights(g)
    best = kernighan_lin_bisect(W)
    rng = np.random.default_rng(seed)
    base = np.arange(len(W)) % 2
    for _ in range(restarts):
        cand = kernighan_lin_bisect(W, init=rng.permutation(base))
        if cand.history[-1] < best.history[-1] - 1e-12 * max(1.0, best.history[-1]):
            best = cand
    return best


def exhaustive_bisect(g):
    """Optimal balanced bisection by enumeration (small n only)."""
    W = _weights(g)
    n = len(W)
    if n % 2 or n > 20:
        raise DomainError("exhaustive bisection needs an even n <= 20")
    best, arg = np.inf, None
    for S in combinations(range(1, n), n // 2 - 1):
        a = np.ones(n, dtype=np.int64)
        a[[0, *S]] = 0
        c = cut_weight(W, a)
        if c < best:
            best, arg = c, a
    return Grouping(arg, 2, [best])


def _spectral_embedding(W, J):
    d = W.sum(axis=1)
    inv = np.where(d > 0, 1.0 / np.sqrt(np.where(d > 0, d, 1.0)), 0.0)
    Lap = np.eye(len(W)) - inv[:, None] * W * inv[None, :]
    _, vec = np.linalg.eigh(Lap)
    U = vec[:, :J]
    nrm = np.linalg.norm(U, axis=1, keepdims=True)
    return U / np.where(nrm > 0, nrm, 1.0)


def _balanced_assign(cost, size, client_of=None):
    """Min-cost assignment of n nodes to J groups of ``size`` nodes, with at
    most one node per (client, group) when ``client_of`` is given."""
    n, J = cost.shape
    c = cost.ravel()
    rows, lo, hi = [], [], []
    for i in range(n):
        r = np.zeros(n * J)
        r[i * J:(i + 1) * J] = 1
        rows.append(r), lo.append(1), hi.append(1)
    for j in range(J):
        r = np.zeros(n * J)
        r[j::J] = 1
        rows.append(r), lo.append(size), hi.append(size)
    if client_of is not None:
        for cl in np.unique(client_of):
            members = np.flatnonzero(client_of == cl)
            for j in range(J):
                r = np.zeros(n * J)
                r[members * J + j] = 1
                rows.append(r), lo.append(0), hi.append(1)
    res = milp(c, constraints=LinearConstraint(np.array(rows), lo, hi),
               integrality=np.ones(n * J), bounds=Bounds(0, 1))
    if res.status != 0 or res.x is None:
        raise InfeasibleGroupingError("no balanced grouping satisfies the constraints")
    return np.argmax(res.x.reshape(n, J), axis=1)


def _client_weights(g, J, same_client):
    """Weights with same-client edges pushed down to SAME_CLIENT_WEIGHT."""
    W = _weights(g).copy()
    client_of = getattr(g, "client_of", None) if same_client else None
    if client_of is not None:
        client_of = np.asarray(client_of)
        counts = np.unique(client_of, return_counts=True)[1]
        if counts.max() > J:
            raise InfeasibleGroupingError(
                f"a client owns {counts.max()} hulls but only {J} groups exist")
        W[client_of[:, None] == client_of[None, :]] = SAME_CLIENT_WEIGHT
    np.fill_diagonal(W, 0.0)
    return W, client_of


def spectral_group(g, J, same_client=True, seed=0, restarts=10):
    """J balanced groups from normalized spectral clustering."""
    n = len(_weights(g))
    if J < 2 or n % J:
        raise DomainError(f"{n} nodes cannot be split into {J} equal groups")
    W, client_of = _client_weights(g, J, same_client)
    X = _spectral_embedding(W, J)
    best = None
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        cent, lab = kmeans2(X, J, minit="++", seed=rng)
        inertia = float(np.sum((X - cent[lab]) ** 2))
        if best is None or inertia < best[0] - 1e-12:
            best = (inertia, cent)
    cent = best[1]
    cost = np.sum((X[:, None, :] - cent[None, :, :]) ** 2, axis=2)
    assignment = _balanced_assign(cost, n // J, client_of)
    return Grouping(assignment, J, [cut_weight(_weights(g), assignment)])


def group_hulls(g, J, same_client=True, seed=0):
    if J == 2:
        W, _ = _client_weights(g, J, same_client)
        if len(W) % 2:
            raise DomainError(f"{len(W)} nodes cannot be split into 2 equal groups")
        return kl_best_of(W, seed=seed)
    return spectral_group(g, J, same_client=same_client, seed=seed)
