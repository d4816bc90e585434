"""Synthetic datasets and dataset files.

A dataset file is a CSV with header ``x1,x2,label`` next to a JSON sidecar
``{"k": ..., "R": ...}`` that shares its stem (``train.csv`` / ``train.json``).
"""
import csv
from dataclasses import dataclass
import json
import math
from pathlib import Path

import numpy as np

from .errors import DatasetError, DomainError
from .geometry import _k, _log, _mobius, as_points, from_polar
from .quantize import uniform_sample


@dataclass(frozen=True)
class SynthSpec:
    N: int = 20000
    R: float = 0.95
    k: float = 1.0
    mu: float = 0.4
    gamma: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.mu < 1:
            raise DomainError("mu must lie in (0, 1)")
        if self.gamma < 0:
            raise DomainError("gamma must be nonnegative")
        if self.N < 1:
            raise DomainError("N must be positive")


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    k: float = 1.0
    R: float = 0.95
    p: np.ndarray | None = None
    w: np.ndarray | None = None

    def __len__(self):
        return len(self.X)

    def class_counts(self):
        labels, counts = np.unique(self.y, return_counts=True)
        return {int(a): int(c) for a, c in zip(labels, counts)}


def point_to_plane_distance(x, p, w, k=1.0):
    """Hyperbolic distance from x to the geodesic {z : <log_p z, w> = 0}."""
    k = _k(k)
    x = as_points(x, k, "x")
    p = as_points(p, k, "p")
    w = np.asarray(w, dtype=np.float64)
    nw = float(np.sqrt(w @ w))
    if nw == 0:
        raise DomainError("normal vector must be nonzero")
    u = _mobius(-p, x, k)
    sk = math.sqrt(k)
    num = 2 * sk * np.abs(u @ w)
    den = (1 - k * np.sum(u * u, axis=-1)) * nw
    return np.arcsinh(num / den) / sk


def synth_generate(spec: SynthSpec) -> Dataset:
    """Uniform points split by a random geodesic, with a margin band removed."""
    k = _k(spec.k)
    rng = np.random.default_rng(spec.seed)
    X = uniform_sample(spec.N, spec.R, k, rng)
    p = from_polar(rng.uniform(0, 2 * np.pi), spec.mu * spec.R)
    w = from_polar(rng.uniform(0, 2 * np.pi), 1.0)
    if spec.gamma > 0:
        X = X[point_to_plane_distance(X, p, w, k) >= spec.gamma]
    if len(X) == 0:
        raise DomainError("all points removed by the margin band")
    y = np.where(_log(p, X, k) @ w >= 0, 1, -1)
    return Dataset(X, y, k, spec.R, p, w)


# ---------------------------------------------------------------------------
# splitting


def train_test_split(n, train_frac=0.9, rng=None):
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    perm = rng.permutation(n)
    cut = int(round(train_frac * n))
    return np.sort(perm[:cut]), np.sort(perm[cut:])


def partition_clients(n, L, rng=None):
    """Uniform partition of n indices into L near-equal client shards."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    return [np.sort(s) for s in np.array_split(rng.permutation(n), L)]


# ---------------------------------------------------------------------------
# files


def sidecar_path(path):
    return Path(path).with_suffix(".json")


def save_dataset(path, ds: Dataset):
    path = Path(path)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["x1", "x2", "label"])
        for (a, b), lab in zip(np.asarray(ds.X).reshape(-1, 2), ds.y):
            wr.writerow([repr(float(a)), repr(float(b)), int(lab)])
    with open(sidecar_path(path), "w") as fh:
        json.dump({"k": float(ds.k), "R": float(ds.R)}, fh)
    return path


def load_dataset(path) -> Dataset:
    path = Path(path)
    meta = {"k": 1.0, "R": 0.95}
    side = sidecar_path(path)
    if side.exists():
        try:
            meta.update(json.loads(side.read_text()))
        except json.JSONDecodeError as exc:
            raise DatasetError(f"sidecar {side} is not valid JSON: {exc}") from exc
    k = float(meta["k"])
    rows, labels = [], []
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd, None)
        if header is not None and [h.strip() for h in header] != ["x1", "x2", "label"]:
            raise DatasetError(f"expected header x1,x2,label, got {header}", row=0)
        for i, rec in enumerate(rd, start=1):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != 3:
                raise DatasetError(f"expected 3 fields, got {len(rec)}", row=i)
            try:
                a, b, lab = float(rec[0]), float(rec[1]), int(rec[2])
            except ValueError as exc:
                raise DatasetError(str(exc), row=i) from exc
            if not (math.isfinite(a) and math.isfinite(b)) or k * (a * a + b * b) >= 1.0:
                raise DatasetError(f"point ({a}, {b}) is not inside the disc", row=i)
            rows.append((a, b))
            labels.append(lab)
    X = np.asarray(rows, dtype=np.float64).reshape(-1, 2)
    return Dataset(X, np.asarray(labels, dtype=np.int64), k, float(meta["R"]))
