"""Compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--quick]

Each case is timed under both backends (best of ``--repeat``) and the
outputs are compared: integers exactly, floats to 1e-9 relative.
"""
import argparse
import time

import numpy as np

from hypfed import _backend
from hypfed.codes import PrimeField, aggregate, generate_masks, next_prime, scma_decode, scma_encode
from hypfed.hull import graham_scan
from hypfed.quantize import uniform_sample
from hypfed.svm import fit_soft


def cases(quick):
    n_hull = 20_000 if quick else 200_000
    X = uniform_sample(n_hull, 0.95, seed=0)
    rng = np.random.default_rng(1)
    Xs = uniform_sample(2000 if quick else 20_000, 0.95, seed=2)
    ys = np.where(Xs[:, 0] + rng.normal(0, 0.05, len(Xs)) > 0, 1, -1)

    B = 100_000
    q = next_prime(10**12)
    support = 50 if quick else 200
    L = 10
    vs = [{int(b): int(rng.integers(1, 1000)) for b in rng.choice(np.arange(1, B + 1), support // L, replace=False)}
          for _ in range(L)]
    n = 2 * support
    masks = generate_masks(L, n, q, 3)
    shares = [scma_encode(v, z, q, n) for v, z in zip(vs, masks)]
    agg = aggregate(shares, q)

    V = rng.normal(size=(50_000, 3))
    w = rng.normal(size=3)
    return {
        f"graham_scan N={n_hull}": lambda: graham_scan(X).points,
        f"fit_soft N={len(Xs)}": lambda: fit_soft(Xs, ys, [0.0, 0.0], lam=100.0).objective,
        "smooth_hinge 50k x 3": lambda: _backend.smooth_hinge(V, w, 10.0, 1e-4),
        f"scma_encode support={support // L}": lambda: scma_encode(vs[0], masks[0], q, n),
        f"scma_decode support={support} B={B}": lambda: sorted(scma_decode(agg, PrimeField(q), B, n // 2).items()),
    }


def same(a, b):
    if isinstance(a, (list, tuple)):
        return len(a) == len(b) and all(map(same, a, b))
    if isinstance(a, (float, np.ndarray, np.floating)):
        return np.allclose(a, b, rtol=1e-9, atol=1e-12)
    return a == b


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller inputs")
    args = ap.parse_args(argv)
    if not _backend.compiled_available():
        raise SystemExit("compiled kernels are not built; run pip install -e . first")
    print(f"{'case':<36} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    for name, fn in cases(args.quick).items():
        with _backend.using("python"):
            tp, op = best_of(fn, args.repeat)
        with _backend.using("cython"):
            tc, oc = best_of(fn, args.repeat)
        mark = "" if same(op, oc) else "  (outputs differ)"
        print(f"{name:<36} {tp:>10.4f} {tc:>10.4f} {tp / tc:>7.1f}x{mark}")


if __name__ == "__main__":
    main()
