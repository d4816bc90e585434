import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from hypfed.codes import PrimeField, aggregate, field_size, generate_masks, scma_decode
from hypfed.data import Dataset, SynthSpec, synth_generate
from hypfed.errors import DomainError
from hypfed.federation import (ClientState, Protocol, RunConfig, align_groups, client_round, run_experiment,
                               run_trial, server_round, simulate_round, summarize)
from hypfed.hull import graham_scan
from hypfed.quantize import QuantGrid, bin_center, build_grid, hull_bins

SEQ = (1, 3, 7, 12)
GRID = QuantGrid(16, 4, 0.95)
# bins of each hull in the two-client example; client 2 overlaps client 1 in bins 18 and 27
CLIENT1 = {1: (18, 21, 51, 53), 3: (27, 31, 44, 46, 59)}
CLIENT2 = {7: (1, 4, 7, 18), 12: (2, 5, 8, 27)}


def _client(cid, hulls, mask, fld, n_sums):
    labels = tuple(hulls)
    X = np.vstack([bin_center(np.array(hulls[a]), GRID) for a in labels])
    y = np.concatenate([np.full(len(hulls[a]), c) for c, a in enumerate(labels)])
    return ClientState(cid, X, y, GRID, labels, mask, fld, n_sums)


@pytest.fixture
def example():
    fld = PrimeField(field_size(2, 2, GRID.B, SEQ))
    n_sums = 2 * 2 * 9
    proto = Protocol(GRID, SEQ, 2, fld, n_sums)
    masks = generate_masks(2, n_sums, fld, 7)
    clients = [_client(1, CLIENT1, masks[0], fld, n_sums), _client(2, CLIENT2, masks[1], fld, n_sums)]
    return proto, clients


def _small_cfg(**kw):
    base = dict(L=3, N=3000, epsilon=0.1, trials=1, baselines=["FLP"], seed=4)
    base.update(kw)
    return RunConfig(**base)


class TestTwoClientExample:
    def test_client_label_vector(self, example):
        proto, (c1, _) = example
        c1.mask = [0] * proto.n_sums
        v = scma_decode(client_round(c1), proto.field, GRID.B, proto.max_support)
        assert v == {**{b: 1 for b in CLIENT1[1]}, **{b: 3 for b in CLIENT1[3]}}

    def test_share_length(self, example):
        proto, clients = example
        assert all(len(client_round(c)) == proto.n_sums == 36 for c in clients)

    def test_server_recovers_hulls(self, example):
        proto, clients = example
        shares = [client_round(c) for c in clients]
        cfg = RunConfig(L=2, epsilon=1.0)
        srv = server_round(shares, proto, cfg, classifiers=())
        assert srv.decoded[18] == 8 and srv.decoded[27] == 15
        assert srv.decoded[21] == 1 and srv.decoded[2] == 12
        got = {hl.element: hl.bins for hl in srv.hulls}
        assert got == {**CLIENT1, **CLIENT2}
        assert {hl.element: hl.rank for hl in srv.hulls} == {1: 1, 3: 1, 7: 2, 12: 2}
        # same-client hulls never share a group
        a = dict(zip((hl.element for hl in srv.hulls), srv.grouping.assignment))
        assert a[1] != a[3] and a[7] != a[12]

    def test_share_order_irrelevant(self, example):
        proto, clients = example
        shares = [client_round(c) for c in clients]
        cfg = RunConfig(L=2, epsilon=1.0)
        a = server_round(shares, proto, cfg, classifiers=())
        b = server_round(shares[::-1], proto, cfg, classifiers=())
        assert a.aggregate == b.aggregate
        assert [h.bins for h in a.hulls] == [h.bins for h in b.hulls]
        assert list(a.grouping.assignment) == list(b.grouping.assignment)

    def test_single_share_hides_values(self, example):
        proto, (c1, _) = example
        share = client_round(c1)
        # with a uniform mask the share does not decode to the client's vector
        with pytest.raises(Exception):
            v = scma_decode(share, proto.field, GRID.B, proto.max_support)
            assert v == {**{b: 1 for b in CLIENT1[1]}, **{b: 3 for b in CLIENT1[3]}}


class TestRound:
    def _data(self, seed, gamma=0.2, N=2000):
        ds = synth_generate(SynthSpec(N=N, gamma=gamma, seed=seed))
        return ds.X, (ds.y == 1).astype(np.int64)

    @settings(max_examples=100, deadline=None)
    @given(st.sampled_from([2, 3, 5, 10]), st.sampled_from([0.02, 0.05, 0.1, 0.3]), st.integers(0, 10**6))
    def test_lossless_transport(self, L, eps, seed):
        X, cls = self._data(seed % 50)
        cfg = RunConfig(L=L, epsilon=eps, seed=seed)
        sim = simulate_round(X, cls, cfg, build_grid(eps, cfg.R), classifiers=())
        got = {hl.element: hl.bins for hl in sim.server.hulls}
        assert got == {a: t[2] for a, t in sim.truth.items()}
        K_max = max(sum(len(hl) for hl in c.hulls) for c in sim.clients)
        assert sim.proto.n_sums == 2 * L * K_max
        assert all(len(s) == sim.proto.n_sums for s in sim.shares)

    def test_planted_grouping(self):
        X, cls = self._data(1, gamma=0.3, N=4000)
        cfg = RunConfig(L=10, epsilon=0.05)
        sim = simulate_round(X, cls, cfg, build_grid(0.05, cfg.R), classifiers=())
        to_global = align_groups(sim.server, sim.truth, 2)
        for i, hl in enumerate(sim.server.hulls):
            assert to_global[sim.server.grouping.assignment[i]] == sim.truth[hl.element][1]

    def test_label_switch_immunity(self):
        X, cls = self._data(2, N=1500)
        cfg = RunConfig(L=4, epsilon=0.1)
        grid = build_grid(0.1, cfg.R)
        a = simulate_round(X, cls, cfg, grid, switch=[[0, 1]] * 4)
        b = simulate_round(X, cls, cfg, grid, switch=[[1, 0], [0, 1], [1, 0], [1, 0]])
        assert [h.bins for h in a.server.hulls] == [h.bins for h in b.server.hulls]
        assert list(a.server.grouping.assignment) == list(b.server.grouping.assignment)
        assert np.array_equal(a.server.models["FLP"].w, b.server.models["FLP"].w)

    def test_label_switch_metrics(self):
        on = run_trial(_small_cfg(label_switch=True), 0)["baselines"]["FLP"]
        off = run_trial(_small_cfg(label_switch=False), 0)["baselines"]["FLP"]
        assert on == off

    def test_bits(self):
        r = run_trial(_small_cfg(), 0)["baselines"]["FLP"]
        assert r["status"] == "ok"
        assert r["bits"] % math.ceil(math.log2(r["q"])) == 0
        sim = simulate_round(*self._data(3), _small_cfg(), build_grid(0.1, 0.95), classifiers=())
        assert sim.proto.bits == sim.proto.n_sums * math.ceil(math.log2(sim.proto.field.q))

    def test_reported_hull_sizes(self):
        r = run_trial(_small_cfg(), 0)["baselines"]["FLP"]
        assert 3 <= r["avg_hull"] <= r["max_hull"]


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10**6))
def test_hull_of_hulls(L, seed):
    rng = np.random.default_rng(seed)
    parts = [synth_generate(SynthSpec(N=50, gamma=0.0, seed=int(s))).X for s in rng.integers(0, 10**6, L)]
    direct = graham_scan(np.vstack(parts))
    staged = graham_scan(np.vstack([graham_scan(P).points for P in parts]))
    key = lambda H: sorted(map(tuple, np.round(H.points, 15)))
    assert key(direct) == key(staged)


class TestBaselines:
    def test_hull_training_close_to_full(self):
        cfg = RunConfig(N=4000, trials=3, baselines=["CP", "CH-CP"], seed=1)
        recs = run_experiment(cfg)[:-1]
        for r in recs:
            b = r["baselines"]
            assert b["CH-CP"]["accuracy"] >= b["CP"]["accuracy"] - 0.05

    def test_federated_accuracy(self):
        r = run_trial(RunConfig(N=4000, L=5, epsilon=0.02, baselines=["CP", "FLP", "FLE"], seed=3), 0)
        b = r["baselines"]
        assert b["FLP"]["accuracy"] >= 0.95 and b["CP"]["accuracy"] >= 0.95
        assert b["FLE"]["status"] == "ok"

    def test_three_classes(self, tmp_path):
        rng = np.random.default_rng(0)
        centers = 0.5 * np.array([[np.cos(t), np.sin(t)] for t in (0.3, 2.4, 4.5)])
        X = np.vstack([c + 0.08 * rng.normal(size=(300, 2)) for c in centers])
        y = np.repeat([0, 1, 2], 300)
        r = run_trial(RunConfig(J=3, L=3, epsilon=0.05, baselines=["CP", "FLP"], seed=0), 0,
                      data=Dataset(X, y))
        assert r["baselines"]["FLP"]["status"] == "ok"
        assert r["baselines"]["FLP"]["accuracy"] >= 0.9

    def test_class_count_mismatch(self):
        ds = Dataset(np.array([[0.1, 0.0], [0.2, 0.0]]), np.array([1, 1]))
        with pytest.raises(DomainError):
            run_trial(RunConfig(), 0, data=ds)


class TestExperiment:
    def test_deterministic_and_parallel(self):
        cfg = _small_cfg(trials=3, baselines=["CP", "FLP"])
        a = run_experiment(cfg)
        b = run_experiment(cfg, jobs=2)
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)

    def test_trials_independent_of_count(self):
        a = run_experiment(_small_cfg(trials=1, baselines=["CP"]))
        b = run_experiment(_small_cfg(trials=2, baselines=["CP"]))
        assert a[0]["baselines"] == b[0]["baselines"]

    def test_records_carry_config(self):
        cfg = _small_cfg(trials=2, baselines=["CP"])
        out = run_experiment(cfg)
        assert [r["record"] for r in out] == ["trial", "trial", "summary"]
        assert all(r["config"] == cfg.to_dict() for r in out)

    def test_summary_interval(self):
        acc = [0.91, 0.95, 0.93, 0.97, 0.90]
        recs = [{"baselines": {"CP": {"status": "ok", "accuracy": a, "bits": None}}} for a in acc]
        recs.append({"baselines": {"CP": {"status": "error", "accuracy": None}}})
        s = summarize(recs, ["CP"])["CP"]
        lo, hi = stats.t.interval(0.95, len(acc) - 1, loc=np.mean(acc), scale=stats.sem(acc))
        assert s["mean"] == pytest.approx(np.mean(acc))
        assert s["ci95"] == pytest.approx((hi - lo) / 2)
        assert (s["n"], s["failed"]) == (5, 1)

    def test_summary_single_trial(self):
        s = summarize([{"baselines": {"CP": {"status": "ok", "accuracy": 0.5}}}], ["CP"])["CP"]
        assert s["mean"] == 0.5 and s["ci95"] is None


class TestRunConfig:
    def test_round_trip(self, tmp_path):
        cfg = RunConfig(L=7, lam=10.0, h=3, baselines=["CE"])
        cfg.save(tmp_path / "c.json")
        d = json.loads((tmp_path / "c.json").read_text())
        assert d["lambda"] == 10.0 and "lam" not in d
        assert RunConfig.load(tmp_path / "c.json") == cfg

    @pytest.mark.parametrize("bad", [dict(L=0), dict(J=1), dict(h=1), dict(baselines=["XX"]),
                                     dict(train_frac=0), dict(trials=0), dict(epsilon=0),
                                     dict(grid_mode="equal_area")])
    def test_validation(self, bad):
        with pytest.raises(DomainError):
            RunConfig(**bad)

    def test_unknown_key(self):
        with pytest.raises(DomainError, match="colour"):
            RunConfig.from_dict({"colour": 1})

    def test_bad_json(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text("{nope")
        with pytest.raises(DomainError):
            RunConfig.load(p)
        p.write_text("[1]")
        with pytest.raises(DomainError):
            RunConfig.load(p)
