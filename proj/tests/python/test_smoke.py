"""Smoke tests for the python bindings."""

import math

import pytest

import specdec as sd


def test_prob_basics():
    d = sd.normalize([2.0, 2.0, 0.0, 0.0])
    assert d.mass == [0.5, 0.5, 0.0, 0.0]
    assert len(d) == 4
    assert d.argmax() == 0

    a = sd.ProbDist([0.7, 0.3])
    b = sd.ProbDist([0.4, 0.6])
    assert sd.tvd(a, b) == pytest.approx(0.3, abs=1e-12)
    assert sd.jsd(a, a) == 0.0

    res = sd.residual_plus(sd.ProbDist([0.6, 0.4]), sd.ProbDist([0.4, 0.6]))
    assert res.mass == [1.0, 0.0]
    assert sd.residual_plus(a, a) is None


def test_errors_surface_as_python_exceptions():
    with pytest.raises(sd.SpecdecError):
        sd.normalize([0.0, 0.0])
    with pytest.raises(sd.SpecdecError):
        sd.DivergenceBound(0.0, sd.DistanceMetricKind.TVD)


def test_sampling_is_deterministic():
    d = sd.ProbDist([0.25, 0.25, 0.5])
    draws_a = [sd.sample(d, r) for r in [sd.Rng(7)] for _ in range(50)]
    draws_b = [sd.sample(d, r) for r in [sd.Rng(7)] for _ in range(50)]
    assert draws_a == draws_b


def test_neighbor_index_matches_manual_distances():
    cb = sd.Codebook.gaussian(32, 4, seed=5)
    idx = sd.build_neighbor_index(cb, 6, sd.ProximityMeasure.l2())
    for t in (0, 13, 31):
        neigh = idx.neighbors(t)
        assert neigh[0] == t
        dists = [
            math.dist(cb.row(t), cb.row(x)) for x in range(32)
        ]
        expected = sorted(range(32), key=lambda x: (x != t, dists[x], x))[:6]
        assert neigh == expected


def test_proximity_set_and_distortion():
    q = sd.ProbDist([0.25, 0.25, 0.25, 0.25])
    cb = sd.Codebook(4, 1, [0.0, 1.0, 3.0, 7.0])
    idx = sd.build_neighbor_index(cb, 4, sd.ProximityMeasure.l2())
    bound = sd.DivergenceBound(0.3, sd.DistanceMetricKind.TVD)
    prox = sd.build_proximity_set(q, 0, idx, bound)
    assert prox.members == [0, 1]
    assert prox.aggregated_mass == pytest.approx(0.5, abs=1e-12)
    distorted = sd.distort_target(q, prox)
    assert distorted.dist.mass == pytest.approx([0.5, 0.0, 0.25, 0.25], abs=1e-12)


def test_decode_and_metrics_roundtrip():
    target, drafter = sd.synthesize_pair(
        32, 1, sd.AmbiguityProfile(concentration=1.0, seed=3), 0.3
    )
    cb = sd.Codebook.gaussian_correlated(32, 2, seed=4)
    idx = sd.build_neighbor_index(cb, 4, sd.ProximityMeasure.l2())
    cfg = sd.DecodeConfig()
    cfg.gamma = 3
    cfg.k = 4
    cfg.mode = sd.DecodeMode.LANTERN
    cfg.bound = sd.DivergenceBound(0.2, sd.DistanceMetricKind.TVD)
    cfg.min_target_len = 24

    traces = [
        sd.decode(target, drafter, [], cfg, idx, seed) for seed in range(4)
    ]
    mal = sd.mean_accepted_length(traces)
    assert 1.0 <= mal <= 4.0
    again = [sd.decode(target, drafter, [], cfg, idx, seed) for seed in range(4)]
    assert [t.output for t in traces] == [t.output for t in again]
    profile = sd.set_size_profile(traces)
    assert all(size >= 1.0 for size in profile)


def test_oracle_losslessness():
    q = sd.normalize([1.0, 2.0, 3.0, 4.0])
    p = sd.normalize([4.0, 3.0, 2.0, 1.0])
    law = sd.enumerate_vanilla_step(q, p)
    assert sd.tvd(law.law, q) < 1e-12


def test_run_config_text_is_deterministic():
    config = """
[model]
vocab = 24

[sweep]
k = 3
delta = 0.2

[run]
trials = 2
min_target_len = 12
"""
    csv_a = sd.run_config_text(config)
    csv_b = sd.run_config_text(config)
    assert csv_a == csv_b
    assert csv_a.startswith(sd.stats_csv_header().split("\n", 1)[0])
