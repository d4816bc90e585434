import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypfed.data import (Dataset, SynthSpec, load_dataset, partition_clients, point_to_plane_distance,
                         save_dataset, sidecar_path, synth_generate, train_test_split)
from hypfed.errors import DatasetError, DomainError
from hypfed.geometry import log_map, mobius_add
from hypfed.svm import fit_euclidean

from conftest import random_disc
from oracles import plane_distance_numeric


class TestPlaneDistance:
    def test_reference_point(self):
        assert point_to_plane_distance([0.2, 0.3], [0.2, 0.3], [1.0, 0.5]) == 0

    def test_on_plane(self):
        p = np.array([0.2, -0.1])
        w = np.array([0.3, 1.0])
        u = np.array([-w[1], w[0]]) * 0.2
        x = mobius_add(p, u)
        assert abs(float(log_map(p, x) @ w)) < 1e-12
        assert point_to_plane_distance(x, p, w) == pytest.approx(0, abs=1e-12)

    def test_zero_normal(self):
        with pytest.raises(DomainError):
            point_to_plane_distance([0.1, 0], [0, 0], [0, 0])

    def test_through_origin(self):
        # geodesic through 0 along the x-axis: distance of (0, r) is 2 atanh r
        assert point_to_plane_distance([0, 0.5], [0, 0], [0, 1.0]) == pytest.approx(2 * math.atanh(0.5))

    def test_numeric_oracle(self):
        rng = np.random.default_rng(0)
        X, P = random_disc(rng, 200, 0.9), random_disc(rng, 200, 0.9)
        W = rng.normal(size=(200, 2))
        for x, p, w in zip(X, P, W):
            assert abs(point_to_plane_distance(x, p, w) - plane_distance_numeric(x, p, w)) <= 1e-4

    def test_numeric_oracle_curvature(self):
        rng = np.random.default_rng(1)
        k = 2.0
        for x, p, w in zip(random_disc(rng, 30, 0.9, k), random_disc(rng, 30, 0.9, k), rng.normal(size=(30, 2))):
            assert abs(point_to_plane_distance(x, p, w, k) - plane_distance_numeric(x, p, w, k)) <= 1e-4


class TestSynth:
    def test_no_margin_keeps_all(self):
        ds = synth_generate(SynthSpec(N=5000, gamma=0.0, seed=1))
        assert len(ds) == 5000

    def test_default_setting(self):
        spec = SynthSpec(N=20000, R=0.95, k=1.0, mu=0.4, gamma=0.2, seed=0)
        ds = synth_generate(spec)
        assert set(ds.class_counts()) == {-1, 1}
        assert np.all(point_to_plane_distance(ds.X, ds.p, ds.w) >= 0.2)
        assert np.array_equal(np.where(log_map(ds.p, ds.X) @ ds.w >= 0, 1, -1), ds.y)
        assert np.hypot(*ds.p) == pytest.approx(0.4 * 0.95)
        assert np.all(np.hypot(*ds.X.T) <= 0.95)

    @settings(max_examples=15, deadline=None)
    @given(st.floats(0.05, 0.9), st.floats(0, 0.5), st.integers(0, 10**6))
    def test_margin_and_labels(self, mu, gamma, seed):
        ds = synth_generate(SynthSpec(N=1000, mu=mu, gamma=gamma, seed=seed))
        assert np.all(point_to_plane_distance(ds.X, ds.p, ds.w) >= gamma)
        assert np.array_equal(np.where(log_map(ds.p, ds.X) @ ds.w >= 0, 1, -1), ds.y)

    def test_straight_line_limit(self):
        ds = synth_generate(SynthSpec(N=4000, mu=0.001, gamma=0.0, seed=2))
        m = fit_euclidean(ds.X, ds.y, lam=2e4)
        assert np.mean(m.predict(ds.X) == ds.y) >= 0.99

    def test_everything_removed(self):
        with pytest.raises(DomainError, match="all points removed"):
            synth_generate(SynthSpec(N=100, gamma=1e9))

    def test_spec_validation(self):
        for bad in (dict(mu=0.0), dict(mu=1.0), dict(gamma=-1.0), dict(N=0)):
            with pytest.raises(DomainError):
                SynthSpec(**bad)

    def test_deterministic(self):
        a = synth_generate(SynthSpec(N=300, seed=9))
        b = synth_generate(SynthSpec(N=300, seed=9))
        assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y)


class TestFiles:
    def test_round_trip(self, tmp_path):
        ds = synth_generate(SynthSpec(N=500, seed=3))
        path = save_dataset(tmp_path / "d.csv", ds)
        back = load_dataset(path)
        assert np.array_equal(back.X, ds.X) and np.array_equal(back.y, ds.y)
        assert (back.k, back.R) == (ds.k, ds.R)
        assert sidecar_path(path).name == "d.json"

    def test_header_and_sidecar(self, tmp_path):
        ds = Dataset(np.array([[0.1, 0.2]]), np.array([1]), k=2.0, R=0.6)
        path = save_dataset(tmp_path / "x.csv", ds)
        assert path.read_text().splitlines()[0] == "x1,x2,label"
        import json
        assert json.loads(sidecar_path(path).read_text()) == {"k": 2.0, "R": 0.6}

    def test_empty_file(self, tmp_path):
        p = tmp_path / "e.csv"
        p.write_text("")
        ds = load_dataset(p)
        assert len(ds) == 0
        p.write_text("x1,x2,label\n")
        assert len(load_dataset(p)) == 0

    def test_outside_disc_names_row(self, tmp_path):
        p = tmp_path / "b.csv"
        p.write_text("x1,x2,label\n0.1,0.1,1\n0.8,0.8,-1\n")
        with pytest.raises(DatasetError, match="row 2"):
            load_dataset(p)

    def test_malformed_rows(self, tmp_path):
        p = tmp_path / "m.csv"
        p.write_text("x1,x2,label\n0.1,abc,1\n")
        with pytest.raises(DatasetError, match="row 1"):
            load_dataset(p)
        p.write_text("x1,x2,label\n0.1,0.2\n")
        with pytest.raises(DatasetError, match="row 1"):
            load_dataset(p)
        p.write_text("a,b,c\n0.1,0.2,1\n")
        with pytest.raises(DatasetError):
            load_dataset(p)

    def test_curvature_from_sidecar(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("x1,x2,label\n0.6,0.0,1\n")
        (tmp_path / "c.json").write_text('{"k": 4.0, "R": 0.45}')
        with pytest.raises(DatasetError):
            load_dataset(p)


class TestSplits:
    def test_split(self):
        tr, te = train_test_split(100, 0.9, 0)
        assert len(tr) == 90 and len(te) == 10
        assert set(tr) | set(te) == set(range(100)) and not set(tr) & set(te)

    def test_partition(self):
        parts = partition_clients(1003, 10, 1)
        assert sorted(np.concatenate(parts)) == list(range(1003))
        assert max(map(len, parts)) - min(map(len, parts)) <= 1
