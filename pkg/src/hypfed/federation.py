"""One-round federated protocol and the experiment driver.

Clients compute quantized hulls of their classes, tag the bins with B_h
labels and send masked power sums. The server sums the shares, decodes the
bin labels, splits every bin value back into labels, groups the anonymous
hulls by balanced min-cut and trains on the grouped vertices.

Seeds: every trial t draws its randomness from
``SeedSequence(cfg.seed, spawn_key=(t, stream))`` with one stream per
purpose (see ``STREAMS``), so a trial is reproducible on its own and
independent of the trial count or of which baselines run.
"""
from collections import Counter
from dataclasses import asdict, dataclass, field, fields
import json
import math
from pathlib import Path
import warnings

import numpy as np
from scipy import stats
from scipy.optimize import linear_sum_assignment

from .codes import (PrimeField, aggregate, bh_decompose, construct_bh, field_size,
                    generate_masks, order_agreement, scma_decode, scma_encode, share_to_bytes)
from .data import Dataset, SynthSpec, load_dataset, partition_clients, synth_generate, train_test_split
from .errors import DomainError, EmptyInputError, HypfedError, ProtocolError, UnresolvableLabelError
from .hull import ConvexHull, graham_scan
from .partition import build_hull_graph, group_hulls
from .quantize import (DISTANCE_MARGIN, EQUAL_AREA, QuantGrid, bin_center, build_equal_area_grid,
                       build_grid, epsilon_minimal_hull, hull_bins)
from .svm import fit_euclidean, fit_multiclass, fit_with_reference

BASELINES = ("CP", "CE", "CH-CP", "CH-CE", "FLP", "FLE")
FEDERATED = ("FLP", "FLE")
STREAMS = {"data": 0, "split": 1, "clients": 2, "switch": 3, "agreement": 4, "masks": 5,
           "grouping": 6}


@dataclass
class RunConfig:
    L: int = 10
    J: int = 2
    epsilon: float = 0.01
    lam: float = 2e4
    h: int | str = "auto"
    seed: int = 0
    grid_mode: str = DISTANCE_MARGIN
    grid_shape: list | None = None  # [N_theta, N_rh] for the equal-area grid
    baselines: list = field(default_factory=lambda: ["CP", "CE", "FLP", "FLE"])
    trials: int = 10
    train_frac: float = 0.9
    data: str | None = None
    N: int = 20000
    R: float = 0.95
    k: float = 1.0
    mu: float = 0.4
    gamma: float = 0.2
    n_candidates: int = 3
    label_switch: bool = True
    tau_end: float = 1e-13
    newton_max_iter: int = 100

    def __post_init__(self):
        self.baselines = list(self.baselines)
        bad = [b for b in self.baselines if b not in BASELINES]
        if bad:
            raise DomainError(f"unknown baselines {bad}; choose from {list(BASELINES)}")
        if self.L < 1 or self.J < 2:
            raise DomainError("need L >= 1 and J >= 2")
        if self.h != "auto" and (not isinstance(self.h, int) or self.h < 2):
            raise DomainError("h must be an integer >= 2 or 'auto'")
        if self.grid_mode not in (DISTANCE_MARGIN, EQUAL_AREA):
            raise DomainError(f"unknown grid mode {self.grid_mode!r}")
        if self.grid_mode == EQUAL_AREA and (self.grid_shape is None or len(self.grid_shape) != 2):
            raise DomainError("the equal-area grid needs grid_shape = [N_theta, N_rh]")
        if not 0 < self.train_frac <= 1:
            raise DomainError("train_frac must lie in (0, 1]")
        if self.trials < 1:
            raise DomainError("need at least one trial")
        if not self.lam > 0 or not self.epsilon > 0:
            raise DomainError("lambda and epsilon must be positive")

    @property
    def solver(self):
        return {"tau_end": self.tau_end, "newton_max_iter": self.newton_max_iter}

    def to_dict(self):
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise DomainError(f"unknown config keys {unknown}")
        return cls(**d)

    @classmethod
    def load(cls, path):
        try:
            d = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise DomainError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise DomainError(f"config {path} must hold a JSON object")
        return cls.from_dict(d)

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def make_grid(cfg, R=None, k=None):
    R = cfg.R if R is None else R
    k = cfg.k if k is None else k
    if cfg.grid_mode == EQUAL_AREA:
        return build_equal_area_grid(*cfg.grid_shape, R, k)
    return build_grid(cfg.epsilon, R, k)


def trial_rng(seed, trial, stream):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(trial), STREAMS[stream])))


def _int_seed(rng):
    return int(rng.integers(0, 2**63 - 1))


# ---------------------------------------------------------------------------
# protocol


@dataclass
class Protocol:
    """Public constants every party knows before the round."""

    grid: QuantGrid
    sequence: tuple
    h: int
    field: PrimeField
    n_sums: int
    J: int = 2

    @property
    def max_support(self):
        return self.n_sums // 2

    def labels_of(self, rank):
        """B_h elements of the client with this 1-based rank, one per local class."""
        return self.sequence[self.J * (rank - 1): self.J * rank]

    @property
    def bits(self):
        return self.n_sums * math.ceil(math.log2(self.field.q))


@dataclass
class ClientState:
    id: int
    X: np.ndarray
    y: np.ndarray  # local class ids 0..J-1
    grid: QuantGrid
    labels: tuple  # B_h element of each local class
    mask: list | None = None
    field: PrimeField | None = None
    n_sums: int = 0
    hulls: list | None = None


@dataclass
class ServerState:
    aggregate: list
    decoded: dict
    hulls: list  # AnonHull per B_h element
    grouping: object = None
    models: dict = field(default_factory=dict)


@dataclass
class AnonHull:
    element: int
    rank: int
    bins: tuple
    points: np.ndarray


def client_hulls(X, y, grid, J=2):
    """epsilon-minimal hull of every local class."""
    X = np.asarray(X, dtype=np.float64).reshape(-1, 2)
    out = []
    for c in range(J):
        pts = X[np.asarray(y) == c]
        if len(pts) == 0:
            raise EmptyInputError(f"client holds no points of local class {c}")
        out.append(epsilon_minimal_hull(pts, grid))
    return out


def label_vector(hulls, labels, grid):
    v = {}
    for hull, a in zip(hulls, labels):
        for b in hull_bins(hull, grid):
            v[b] = v.get(b, 0) + int(a)
    return v


def client_round(state: ClientState):
    if state.hulls is None:
        state.hulls = client_hulls(state.X, state.y, state.grid, len(state.labels))
    v = label_vector(state.hulls, state.labels, state.grid)
    return scma_encode(v, state.mask, state.field, state.n_sums)


def decode_hulls(agg, proto: Protocol):
    """Aggregate share -> (bin values, one AnonHull per label present)."""
    decoded = scma_decode(agg, proto.field, proto.grid.B, proto.max_support)
    members = {}
    for b, H in sorted(decoded.items()):
        try:
            parts = bh_decompose(H, proto.sequence, proto.h)
        except UnresolvableLabelError as exc:
            raise UnresolvableLabelError(f"bin {b}: {exc}", bin_index=b, value=H) from exc
        for a in parts:
            members.setdefault(a, []).append(b)
    rank_of = {a: i // proto.J + 1 for i, a in enumerate(proto.sequence)}
    hulls = []
    for a, bins in members.items():
        bins = tuple(sorted(set(bins)))
        hulls.append(AnonHull(a, rank_of[a], bins, bin_center(np.asarray(bins), proto.grid)))
    return decoded, hulls


def _canonical(hulls):
    """Order hulls by geometry only, so the result does not depend on which
    label a client gave which class."""
    by_rank = {}
    for hl in hulls:
        by_rank.setdefault(hl.rank, []).append(hl.bins)
    key = lambda hl: (hl.bins, tuple(sorted(b for b in by_rank[hl.rank] if b != hl.bins)))
    return sorted(hulls, key=key)


def server_round(shares, proto: Protocol, cfg: RunConfig, classifiers=("FLP",), seed=0):
    agg = aggregate(shares, proto.field)
    decoded, hulls = decode_hulls(agg, proto)
    hulls = _canonical(hulls)
    if len(hulls) % proto.J:
        raise ProtocolError(f"decoded {len(hulls)} hulls, not a multiple of J={proto.J}")
    ranks = np.array([hl.rank for hl in hulls])
    g = build_hull_graph([hl.points for hl in hulls], proto.grid.k, client_of=ranks)
    grouping = group_hulls(g, proto.J, seed=seed)
    state = ServerState(agg, decoded, hulls, grouping)
    X = np.vstack([hl.points for hl in hulls])
    grp = np.concatenate([np.full(len(hl.points), grouping.assignment[i]) for i, hl in enumerate(hulls)])
    for name in classifiers:
        state.models[name] = _train(X, grp, proto.J, name in ("FLE", "CE", "CH-CE"), cfg)
    return state


def _train(X, cls, J, euclidean, cfg):
    """Model on class ids 0..J-1; binary models use class 1 as +1."""
    if J == 2:
        y = np.where(cls == 1, 1, -1)
        if euclidean:
            return fit_euclidean(X, y, cfg.lam, **cfg.solver)
        return fit_with_reference(X, y, cfg.k, cfg.lam, n_candidates=cfg.n_candidates,
                                  solver=cfg.solver)
    return fit_multiclass(X, cls, cfg.k, cfg.lam, euclidean=euclidean, solver=cfg.solver)


def _predict(model, X, J):
    if J == 2:
        return (model.predict(X) == 1).astype(np.int64)
    return np.asarray(model.predict(X), dtype=np.int64)


# ---------------------------------------------------------------------------
# one trial


@dataclass
class Simulation:
    """Everything one federated round produced, including simulator-side truth."""

    proto: Protocol
    clients: list
    shares: list
    truth: dict  # B_h element -> (client id, global class, bins)
    server: ServerState | None = None
    collisions: int = 0


def _class_ids(labels):
    classes = np.unique(labels)
    return classes, np.searchsorted(classes, labels)


def max_collisions(hull_bin_sets):
    cnt = Counter(b for bins in hull_bin_sets for b in bins)
    return max(cnt.values()) if cnt else 0


def simulate_round(X, cls, cfg: RunConfig, grid, trial=0, classifiers=("FLP",), switch=None):
    """Run clients and server on training data with class ids ``cls``."""
    J = cfg.J
    shards = partition_clients(len(X), cfg.L, trial_rng(cfg.seed, trial, "clients"))
    if switch is None:
        srng = trial_rng(cfg.seed, trial, "switch")
        switch = [srng.permutation(J) if cfg.label_switch else np.arange(J) for _ in range(cfg.L)]
    ranks = order_agreement(cfg.L, _int_seed(trial_rng(cfg.seed, trial, "agreement")))
    hulls = []
    for i, idx in enumerate(shards):
        local = np.asarray(switch[i])[cls[idx]]
        hulls.append(client_hulls(X[idx], local, grid, J))
    bin_sets = [hull_bins(hl, grid) for ch in hulls for hl in ch]
    collisions = max_collisions(bin_sets)
    h = max(2, collisions) if cfg.h == "auto" else int(cfg.h)
    seq = construct_bh(J * cfg.L, h).elements
    K_max = max(sum(len(hl) for hl in ch) for ch in hulls)
    n_sums = 2 * cfg.L * K_max
    fld = PrimeField(field_size(cfg.L, h, grid.B, seq))
    proto = Protocol(grid, tuple(seq), h, fld, n_sums, J)
    masks = generate_masks(cfg.L, n_sums, fld, trial_rng(cfg.seed, trial, "masks"))
    clients, shares, truth = [], [], {}
    for i, idx in enumerate(shards):
        labels = proto.labels_of(ranks[i])
        st = ClientState(i + 1, X[idx], np.asarray(switch[i])[cls[idx]], grid, labels,
                         masks[i], fld, n_sums, hulls[i])
        clients.append(st)
        shares.append(client_round(st))
        for c_local, a in enumerate(labels):
            c_global = int(np.flatnonzero(np.asarray(switch[i]) == c_local)[0])
            truth[a] = (i + 1, c_global, tuple(hull_bins(hulls[i][c_local], grid)))
    sim = Simulation(proto, clients, shares, truth, collisions=collisions)
    gseed = _int_seed(trial_rng(cfg.seed, trial, "grouping"))
    sim.server = server_round(shares, proto, cfg, classifiers, seed=gseed)
    return sim


def align_groups(server, truth, J):
    """Bijection group -> global class that agrees with the most hulls.

    Uses simulator-side truth and serves accuracy reporting only.
    """
    counts = np.zeros((J, J))
    for i, hl in enumerate(server.hulls):
        counts[server.grouping.assignment[i], truth[hl.element][1]] += 1
    rows, cols = linear_sum_assignment(-counts)
    out = np.empty(J, dtype=np.int64)
    out[rows] = cols
    return out


def hull_stats(sizes):
    sizes = list(sizes)
    return float(np.mean(sizes)), int(np.max(sizes))


def load_data(cfg: RunConfig, trial):
    if cfg.data is not None:
        return load_dataset(cfg.data)
    spec = SynthSpec(cfg.N, cfg.R, cfg.k, cfg.mu, cfg.gamma, _int_seed(trial_rng(cfg.seed, trial, "data")))
    return synth_generate(spec)


def run_trial(cfg: RunConfig, trial, data: Dataset | None = None):
    """One record: accuracy and hull/communication figures per baseline."""
    ds = load_data(cfg, trial) if data is None else data
    classes, cls = _class_ids(ds.y)
    if len(classes) != cfg.J:
        raise DomainError(f"data has {len(classes)} classes but J = {cfg.J}")
    tr, te = train_test_split(len(ds.X), cfg.train_frac, trial_rng(cfg.seed, trial, "split"))
    if len(te) == 0:
        te = tr
    Xtr, ctr, Xte, cte = ds.X[tr], cls[tr], ds.X[te], cls[te]
    run_cfg = cfg if (cfg.k == ds.k and cfg.R == ds.R) else RunConfig.from_dict({**cfg.to_dict(), "k": ds.k, "R": ds.R})
    res = {}
    for name in cfg.baselines:
        if name in FEDERATED:
            continue
        try:
            res[name] = _centralized(Xtr, ctr, Xte, cte, run_cfg, name)
        except HypfedError as exc:
            res[name] = _failed(exc)
    fed = [b for b in cfg.baselines if b in FEDERATED]
    if fed:
        try:
            grid = make_grid(run_cfg)
            sim = simulate_round(Xtr, ctr, run_cfg, grid, trial, fed)
            to_global = align_groups(sim.server, sim.truth, cfg.J)
            avg_h, max_h = hull_stats(len(hl) for c in sim.clients for hl in c.hulls)
            for name in fed:
                pred = to_global[_predict(sim.server.models[name], Xte, cfg.J)]
                res[name] = {"status": "ok", "accuracy": float(np.mean(pred == cte)),
                             "avg_hull": avg_h, "max_hull": max_h, "bits": sim.proto.bits,
                             "h": sim.proto.h, "q": sim.proto.field.q}
        except HypfedError as exc:
            for name in fed:
                res[name] = _failed(exc)
    return {"record": "trial", "trial": int(trial),
            "baselines": {b: res[b] for b in cfg.baselines}, "config": cfg.to_dict()}


def _failed(exc):
    return {"status": "error", "error": f"{type(exc).__name__}: {exc}", "accuracy": None,
            "avg_hull": None, "max_hull": None, "bits": None}


def _centralized(Xtr, ctr, Xte, cte, cfg, variant):
    euclidean = variant in ("CE", "CH-CE")
    avg_h = max_h = None
    if variant.startswith("CH-"):
        hulls = [graham_scan(Xtr[ctr == c], cfg.k) for c in range(cfg.J)]
        Xtr = np.vstack([hl.points for hl in hulls])
        ctr = np.concatenate([np.full(len(hl), c) for c, hl in enumerate(hulls)])
        avg_h, max_h = hull_stats(len(hl) for hl in hulls)
    model = _train(Xtr, ctr, cfg.J, euclidean, cfg)
    acc = float(np.mean(_predict(model, Xte, cfg.J) == cte))
    return {"status": "ok", "accuracy": acc, "avg_hull": avg_h, "max_hull": max_h, "bits": None}


def run_centralized(data: Dataset, cfg: RunConfig, variant, trial=0):
    """Train one centralized baseline; returns (model, test accuracy)."""
    if variant not in ("CP", "CE", "CH-CP", "CH-CE"):
        raise DomainError(f"{variant} is not a centralized baseline")
    classes, cls = _class_ids(data.y)
    tr, te = train_test_split(len(data.X), cfg.train_frac, trial_rng(cfg.seed, trial, "split"))
    if len(te) == 0:
        te = tr
    X = data.X[tr]
    c = cls[tr]
    if variant.startswith("CH-"):
        hulls = [graham_scan(X[c == j], cfg.k) for j in range(len(classes))]
        X = np.vstack([hl.points for hl in hulls])
        c = np.concatenate([np.full(len(hl), j) for j, hl in enumerate(hulls)])
    model = _train(X, c, len(classes), variant.endswith("CE"), cfg)
    acc = float(np.mean(_predict(model, data.X[te], len(classes)) == cls[te]))
    return model, acc


# ---------------------------------------------------------------------------
# experiments


def summarize(records, baselines):
    out = {}
    for b in baselines:
        acc = [r["baselines"][b]["accuracy"] for r in records
               if r["baselines"][b]["status"] == "ok"]
        n = len(acc)
        entry = {"n": n, "failed": len(records) - n, "mean": None, "ci95": None}
        if n:
            entry["mean"] = float(np.mean(acc))
        if n > 1:
            sd = float(np.std(acc, ddof=1))
            entry["ci95"] = float(stats.t.ppf(0.975, n - 1) * sd / math.sqrt(n))
        for key in ("avg_hull", "max_hull", "bits"):
            vals = [r["baselines"][b][key] for r in records
                    if r["baselines"][b].get(key) is not None]
            entry[key] = float(np.mean(vals)) if vals else None
        out[b] = entry
    return out


def _run_one(args):
    cfg, t, data = args
    return run_trial(cfg, t, data)


def run_experiment(cfg: RunConfig, data: Dataset | None = None, jobs=1):
    """Trial records in trial order followed by one summary record."""
    if data is None and cfg.data is not None:
        data = load_dataset(cfg.data)
    tasks = [(cfg, t, data) for t in range(cfg.trials)]
    if jobs > 1 and cfg.trials > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            records = list(ex.map(_run_one, tasks))
    else:
        records = [_run_one(a) for a in tasks]
    summary = {"record": "summary", "trials": cfg.trials,
               "baselines": summarize(records, cfg.baselines), "config": cfg.to_dict()}
    return records + [summary]


# ---------------------------------------------------------------------------
# transcripts


def transcript_of(sim: Simulation):
    """JSON-ready log of one round: public constants, wire shares and truth."""
    q = sim.proto.field.q
    H = {}
    for a, (_, _, bins) in sim.truth.items():
        for b in bins:
            H[b] = H.get(b, 0) + a
    return {
        "q": q, "n_sums": sim.proto.n_sums, "B": sim.proto.grid.B, "h": sim.proto.h,
        "sequence": list(sim.proto.sequence), "J": sim.proto.J,
        "shares": [share_to_bytes(s, q).hex() for s in sim.shares],
        "truth": {"bins": {str(b): H[b] for b in sorted(H)},
                  "hulls": {str(a): list(t[2]) for a, t in sorted(sim.truth.items())}},
    }


def record_transcript(cfg: RunConfig, path, trial=0, data=None):
    ds = load_data(cfg, trial) if data is None else data
    _, cls = _class_ids(ds.y)
    tr, _ = train_test_split(len(ds.X), cfg.train_frac, trial_rng(cfg.seed, trial, "split"))
    rc = RunConfig.from_dict({**cfg.to_dict(), "k": ds.k, "R": ds.R})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sim = simulate_round(ds.X[tr], cls[tr], rc, make_grid(rc), trial, ())
    Path(path).write_text(json.dumps(transcript_of(sim)) + "\n")
    return sim
