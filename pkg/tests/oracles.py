"""Reference computations shared by the unit and acceptance tests."""
import numpy as np
from scipy.optimize import minimize_scalar

from hypfed.geometry import dist, exp_map


def geodesic_point(p, w, s, k=1.0):
    """Point at signed distance s from p along the geodesic {<log_p z, w> = 0}."""
    u = np.array([-w[1], w[0]]) / np.hypot(*w)
    lam = 1 - k * (p @ p)
    return exp_map(p, np.multiply.outer(np.atleast_1d(s) * lam / 2, u), k)


def plane_distance_numeric(x, p, w, k=1.0, span=15.0, n=6001):
    """min over the geodesic of d_k(x, z): dense scan, then bounded refinement."""
    s = np.linspace(-span, span, n)
    Z = geodesic_point(p, w, s, k)
    d = dist(np.broadcast_to(x, Z.shape), Z, k)
    i = int(np.argmin(d))
    lo, hi = s[max(i - 1, 0)], s[min(i + 1, n - 1)]
    r = minimize_scalar(lambda t: float(dist(x, geodesic_point(p, w, t, k)[0], k)),
                        bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    return min(float(r.fun), float(d[i]))
