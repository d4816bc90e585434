"""Linear SVMs in the tangent plane of a reference point, plus the Euclidean
baseline, Platt calibration and one-vs-rest multiclass.

Training minimizes 0.5*|w|^2 + lam * sum_j hinge(1 - y_j <u_j, w>) where u_j
is log_p(x_j) (hyperbolic) or (x_j, 1) (Euclidean). Separable problems are
solved exactly through the min-norm point of the signed features. Otherwise
the hinge is replaced by tau*softplus(./tau), minimized by Newton's method
while tau shrinks, and the margin pattern of each iterate is re-solved
exactly; the lowest primal objective wins.
"""
from dataclasses import dataclass, field
import math
import warnings

import numpy as np
from scipy.spatial import ConvexHull as QhullHull

from . import _backend
from .errors import DomainError, EmptyInputError, NotSeparableError
from .geometry import _k, _log, as_points, geodesic_midpoint, pairwise_dist
from .hull import ConvexHull, graham_scan

HARD_LAMBDA = 2e4
HARD_TOL = 1e-6
WORKING_SET_MIN = 200
TAU_START = 1.0
TAU_END = 1e-13
NEWTON_MAX_ITER = 100
POLISH_BANDS = (1e-9, 1e-7, 1e-5, 1e-3)


@dataclass
class HyperbolicSvmModel:
    p: np.ndarray
    w: np.ndarray
    k: float = 1.0
    lam: float = 1.0
    objective: float = float("nan")
    history: list = field(default_factory=list)
    platt: "PlattCalibration | None" = None

    def score(self, x):
        x = as_points(x, self.k, "x")
        return _log(self.p, x, self.k) @ self.w

    def predict(self, x):
        return np.where(self.score(x) >= 0, 1, -1)

    def to_dict(self):
        d = {"k": self.k, "p": [float(v) for v in self.p], "w": [float(v) for v in self.w],
             "lambda": self.lam}
        if self.platt is not None:
            d["platt"] = {"A": self.platt.A, "B": self.platt.B}
        return d

    @classmethod
    def from_dict(cls, d):
        m = cls(np.asarray(d["p"], dtype=np.float64), np.asarray(d["w"], dtype=np.float64),
                float(d["k"]), float(d["lambda"]))
        if d.get("platt") is not None:
            m.platt = PlattCalibration(float(d["platt"]["A"]), float(d["platt"]["B"]))
        return m


@dataclass
class EuclideanSvmModel:
    w: np.ndarray
    b: float
    lam: float = 1.0
    objective: float = float("nan")
    platt: "PlattCalibration | None" = None

    def score(self, x):
        return np.asarray(x, dtype=np.float64) @ self.w + self.b

    def predict(self, x):
        return np.where(self.score(x) >= 0, 1, -1)


# ---------------------------------------------------------------------------
# solver


def primal_objective(U, y, w, lam):
    margins = y * (U @ w)
    return 0.5 * float(w @ w) + lam * float(np.sum(np.maximum(0.0, 1.0 - margins)))


def _solve_partition(U, y, lam, free, bound):
    """w that puts every ``free`` point exactly on the margin, with the
    ``bound`` points carrying the full weight lam."""
    w_b = (lam * y[bound]) @ U[bound] if np.any(bound) else np.zeros(U.shape[1])
    if not np.any(free):
        return w_b
    A = y[free, None] * U[free]
    rhs = 1.0 - A @ w_b
    return w_b + np.linalg.lstsq(A, rhs, rcond=None)[0]


def _refine(U, y, w, lam, rounds=20, band=1e-7):
    """Re-solve using the margin pattern of w until it stops improving."""
    best_w, best = w, primal_objective(U, y, w, lam)
    for _ in range(rounds):
        m = y * (U @ best_w)
        cand = _solve_partition(U, y, lam, np.abs(m - 1) <= band, m < 1 - band)
        f = primal_objective(U, y, cand, lam)
        if not f < best:
            break
        best_w, best = cand, f
    return best_w, best


def min_norm_point(P, tol=1e-15, max_iter=1000):
    """Wolfe's algorithm: point of conv(P) nearest the origin.

    Returns (x, weights) with x = weights @ P, weights on the simplex.
    """
    P = np.asarray(P, dtype=np.float64)
    n = len(P)
    scale = float(np.max(np.sum(P * P, axis=1)))
    S = [int(np.argmin(np.sum(P * P, axis=1)))]
    lam = np.array([1.0])
    x = P[S[0]].copy()
    for _ in range(max_iter):
        dots = P @ x
        j = int(np.argmin(dots))
        if x @ x - dots[j] <= tol * scale or j in S:
            break
        S.append(j)
        lam = np.append(lam, 0.0)
        while True:
            Q = P[S]
            G = Q @ Q.T
            m = len(S)
            K = np.zeros((m + 1, m + 1))
            K[:m, :m] = G
            K[:m, m] = K[m, :m] = 1.0
            rhs = np.zeros(m + 1)
            rhs[m] = 1.0
            mu = np.linalg.lstsq(K, rhs, rcond=None)[0][:m]
            if np.all(mu > 1e-14):
                lam = mu
                break
            neg = mu <= 1e-14
            theta = np.min(lam[neg] / (lam[neg] - mu[neg]))
            lam = lam + theta * (mu - lam)
            keep = lam > 1e-14
            S = [s for s, kp in zip(S, keep) if kp]
            lam = lam[keep]
            lam = lam / lam.sum()
        x = lam @ P[S]
    weights = np.zeros(n)
    weights[S] = lam
    return x, weights


def _hard_margin(U, y, lam):
    """Exact solution when the data are separable through the origin of the
    feature space and no dual weight exceeds lam; otherwise None."""
    V = y[:, None] * U
    W = _initial_working_set(V) if len(V) > WORKING_SET_MIN else np.arange(len(V))
    x, wts = min_norm_point(V[W])
    nx = float(x @ x)
    if nx <= 1e-20:
        return None
    w = x / nx
    alpha = wts / nx
    if np.max(alpha) > lam or np.min(V @ w) < 1 - 1e-9:
        return None
    return w


def _initial_working_set(V):
    """Vertices of the Euclidean hull of the signed features y*u.

    Without slack the optimal w is determined by the point of this hull
    nearest the origin, so the support vectors are among its vertices.
    """
    n = len(V)
    if n <= WORKING_SET_MIN:
        return np.arange(n)
    try:
        idx = np.unique(QhullHull(V).vertices)
    except Exception:  # flat or degenerate feature cloud
        idx = np.array([], dtype=np.int64)
    if len(idx) < WORKING_SET_MIN:
        extra = np.argsort(np.sum(V * V, axis=1), kind="stable")[:WORKING_SET_MIN]
        idx = np.union1d(idx, extra)
    return idx


def _newton(V, w, lam, tau, max_iter=NEWTON_MAX_ITER):
    f, g, H = _backend.smooth_hinge(V, w, lam, tau)
    for _ in range(max_iter):
        # the identity part of H is negligible once lam/tau is large
        step = np.linalg.lstsq(H, g, rcond=None)[0]
        dec = float(g @ step)
        if not dec > 1e-15 * max(1.0, abs(f)):
            break
        t = 1.0
        while True:
            nw = w - t * step
            nf, ng, nH = _backend.smooth_hinge(V, nw, lam, tau)
            if nf <= f - 1e-4 * t * dec or t < 1e-12:
                break
            t *= 0.5
        if not nf < f:
            break
        w, f, g, H = nw, nf, ng, nH
    return w


def solve_svm(U, y, lam, tau_start=TAU_START, tau_end=TAU_END, newton_max_iter=NEWTON_MAX_ITER):
    """Return (w, objective, history) for the soft-margin problem.

    ``history`` holds the best primal objective after each stage, starting
    from w = 0.
    """
    U = np.ascontiguousarray(U, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(U) == 0:
        raise EmptyInputError("no training points")
    if not lam > 0:
        raise DomainError("lambda must be positive")
    best_w = np.zeros(U.shape[1])
    best = primal_objective(U, y, best_w, lam)
    history = [best]
    wh = _hard_margin(U, y, lam)
    if wh is not None:
        f = primal_objective(U, y, wh, lam)
        if f < best:
            history.append(f)
            return wh, f, history
    V = y[:, None] * U
    w = np.zeros(U.shape[1])
    tau = tau_start
    while tau >= tau_end:
        w = _newton(V, w, lam, tau, newton_max_iter)
        cands = [w] + [_refine(U, y, w, lam, band=b)[0] for b in POLISH_BANDS]
        for c in cands:
            if np.all(np.isfinite(c)):
                f = primal_objective(U, y, c, lam)
                if f < best:
                    best, best_w = f, c
        history.append(best)
        tau *= 0.1
    return best_w, best, history


# ---------------------------------------------------------------------------
# hyperbolic models


def _labels(y):
    y = np.asarray(y)
    if not np.all(np.isin(y, (-1, 1))):
        raise DomainError("binary labels must be -1 or +1")
    return y.astype(np.float64)


def fit_soft(X, y, p, k=1.0, lam=1.0, **solver):
    k = _k(k)
    X = as_points(np.asarray(X, dtype=np.float64).reshape(-1, 2), k, "X")
    p = as_points(p, k, "p")
    U = _log(p, X, k)
    w, obj, hist = solve_svm(U, _labels(y), lam, **solver)
    return HyperbolicSvmModel(p.copy(), w, k, float(lam), obj, hist)


def fit_hard(X, y, p, k=1.0, tol=HARD_TOL):
    m = fit_soft(X, y, p, k, HARD_LAMBDA)
    margins = _labels(y) * m.score(X)
    if np.min(margins) < 1 - tol:
        raise NotSeparableError(
            f"hard-margin constraints violated (min margin {np.min(margins):.3g}); use fit_soft")
    return m


@dataclass
class RefCandidate:
    point: np.ndarray
    pair_distance: float
    inside_hull: bool


def select_reference_point(hull_plus, hull_minus, k=1.0, n_candidates=3):
    """Geodesic midpoints of the closest cross-hull vertex pairs."""
    k = _k(k)
    A = np.asarray(getattr(hull_plus, "points", hull_plus), dtype=np.float64).reshape(-1, 2)
    Bm = np.asarray(getattr(hull_minus, "points", hull_minus), dtype=np.float64).reshape(-1, 2)
    if len(A) == 0 or len(Bm) == 0:
        raise EmptyInputError("both hulls need at least one vertex")
    D = pairwise_dist(A, Bm, k)
    flat = np.argsort(D, axis=None, kind="stable")[: max(1, int(n_candidates))]
    hp = hull_plus if isinstance(hull_plus, ConvexHull) else graham_scan(A, k)
    hm = hull_minus if isinstance(hull_minus, ConvexHull) else graham_scan(Bm, k)
    out = []
    for f in flat:
        i, j = np.unravel_index(f, D.shape)
        m = geodesic_midpoint(A[i], Bm[j], k)
        inside = bool(hp.contains(m)[0] or hm.contains(m)[0]) if len(hp) > 2 or len(hm) > 2 else False
        out.append(RefCandidate(m, float(D[i, j]), inside))
    return out


def training_accuracy(model, X, y):
    return float(np.mean(model.predict(X) == np.asarray(y)))


def fit_with_reference(X, y, k=1.0, lam=HARD_LAMBDA, hull_plus=None, hull_minus=None,
                       n_candidates=3, solver=None):
    """Fit with each reference candidate and keep the best training accuracy."""
    k = _k(k)
    X = np.asarray(X, dtype=np.float64).reshape(-1, 2)
    y = np.asarray(y)
    if hull_plus is None:
        hull_plus = graham_scan(X[y == 1], k)
    if hull_minus is None:
        hull_minus = graham_scan(X[y == -1], k)
    best = None
    for c in select_reference_point(hull_plus, hull_minus, k, n_candidates):
        m = fit_soft(X, y, c.point, k, lam, **(solver or {}))
        if not np.any(m.w != 0):
            warnings.warn("degenerate fit for a reference candidate; trying the next one")
            continue
        acc = training_accuracy(m, X, y)
        if best is None or acc > best[0]:
            best = (acc, m)
    if best is None:
        return fit_soft(X, y, np.zeros(2), k, lam, **(solver or {}))
    return best[1]


# ---------------------------------------------------------------------------
# Euclidean baseline


def fit_euclidean(X, y, lam=1.0, **solver):
    X = np.asarray(X, dtype=np.float64).reshape(-1, 2)
    U = np.hstack([X, np.ones((len(X), 1))])
    w, obj, _ = solve_svm(U, _labels(y), lam, **solver)
    return EuclideanSvmModel(w[:2].copy(), float(w[2]), float(lam), obj)


# ---------------------------------------------------------------------------
# Platt scaling


@dataclass(frozen=True)
class PlattCalibration:
    A: float
    B: float

    @property
    def crossover(self):
        return -self.B / self.A if self.A != 0 else float("nan")


def platt_fit(scores, labels, max_iter=100):
    """Sigmoid 1/(1+exp(A*s+B)) fitted by damped Newton on smoothed targets."""
    f = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    n_pos = int(np.sum(y == 1))
    n_neg = int(np.sum(y != 1))
    if n_pos == 0 or n_neg == 0:
        raise DomainError("Platt scaling needs both classes")
    t = np.where(y == 1, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))
    A, B = 0.0, math.log((n_neg + 1.0) / (n_pos + 1.0))

    def loss(A, B):
        z = A * f + B
        return float(np.sum(np.where(z >= 0, t * z + np.log1p(np.exp(-z)),
                                     (t - 1) * z + np.log1p(np.exp(z)))))

    fval = loss(A, B)
    for _ in range(max_iter):
        z = A * f + B
        p = np.where(z >= 0, np.exp(-z) / (1 + np.exp(-z)), 1 / (1 + np.exp(z)))
        q = 1 - p
        d2 = p * q
        h11 = 1e-12 + float(np.sum(f * f * d2))
        h22 = 1e-12 + float(np.sum(d2))
        h21 = float(np.sum(f * d2))
        d1 = t - p
        g1 = float(np.sum(f * d1))
        g2 = float(np.sum(d1))
        if abs(g1) < 1e-5 and abs(g2) < 1e-5:
            break
        det = h11 * h22 - h21 * h21
        dA = -(h22 * g1 - h21 * g2) / det
        dB = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * dA + g2 * dB
        step = 1.0
        while step >= 1e-10:
            nA, nB = A + step * dA, B + step * dB
            nf = loss(nA, nB)
            if nf < fval + 1e-4 * step * gd:
                A, B, fval = nA, nB, nf
                break
            step /= 2
        else:
            break
    return PlattCalibration(float(A), float(B))


def platt_apply(cal, score):
    z = cal.A * np.asarray(score, dtype=np.float64) + cal.B
    out = np.where(z >= 0, np.exp(-z) / (1 + np.exp(-z)), 1 / (1 + np.exp(z)))
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# one-vs-rest


@dataclass
class MulticlassModel:
    classes: np.ndarray
    models: list

    def probabilities(self, X):
        return np.column_stack([platt_apply(m.platt, m.score(X)) for m in self.models])

    def predict(self, X):
        return self.classes[np.argmax(self.probabilities(X), axis=1)]


def fit_multiclass(X, labels, k=1.0, lam=HARD_LAMBDA, euclidean=False, solver=None):
    X = np.asarray(X, dtype=np.float64).reshape(-1, 2)
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if len(classes) < 2:
        raise DomainError("need at least two classes")
    models = []
    for c in classes:
        y = np.where(labels == c, 1, -1)
        if euclidean:
            m = fit_euclidean(X, y, lam, **(solver or {}))
        else:
            m = fit_with_reference(X, y, k, lam, solver=solver)
        m.platt = platt_fit(m.score(X), y)
        models.append(m)
    return MulticlassModel(classes, models)


def predict_multiclass(model, X):
    return model.predict(X)
