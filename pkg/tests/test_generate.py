import numpy as np
import pytest

from amloc import (DisconnectedError, GenSpec, MissingTruthError, PRESETS,
                   generate_topology, localization_objective, preset,
                   sample_noise)
from amloc.generate import generate_connected, iter_realizations, noise_seed


def test_tiny_box_gives_complete_graph_minus_anchor_pairs():
    spec = GenSpec(K=3, m=2, r=10.0, sigma=0.0, box=(-0.01, 0.01), seed=1)
    net = generate_topology(spec)
    # with 1 sensor and 2 anchors: no E1 edges, both sensor-anchor edges
    assert len(net.edges_e1) == 0
    assert len(net.edges_e2) == 2
    spec2 = GenSpec(K=4, m=1, r=10.0, sigma=0.0, box=(-0.01, 0.01), seed=1)
    net2 = generate_topology(spec2)
    assert len(net2.edges_e1) == 3      # all sensor pairs
    assert len(net2.edges_e2) == 3      # every sensor sees the anchor


def test_radius_below_connectivity_raises():
    spec = GenSpec(K=10, m=2, r=1e-6, sigma=0.0, seed=0)
    with pytest.raises(DisconnectedError):
        generate_topology(spec)


def test_topology_deterministic():
    spec = GenSpec(K=40, m=4, r=0.35, sigma=0.0, seed=123)
    a = generate_topology(spec)
    b = generate_topology(spec)
    assert np.array_equal(a.sensors_truth, b.sensors_truth)
    assert np.array_equal(a.anchors, b.anchors)
    assert np.array_equal(a.edges_e1, b.edges_e1)
    assert np.array_equal(a.edges_e2, b.edges_e2)
    assert np.array_equal(a.dist, b.dist)


def test_distances_match_geometry():
    spec = GenSpec(K=30, m=3, r=0.4, sigma=0.0, seed=5)
    net, _ = generate_connected(spec)
    np.testing.assert_allclose(net.dist, net.true_distances(), atol=1e-15)
    assert np.all(net.dist <= spec.r + 1e-12)


def test_zero_sigma_noise_is_exact():
    spec = GenSpec(K=25, m=3, r=0.5, sigma=0.0, seed=9)
    net, _ = generate_connected(spec)
    real = sample_noise(net, 0.0, noise_seed(spec.seed, 0))
    np.testing.assert_array_equal(real.net.dist, net.dist)
    # ground truth is a global optimum of the noiseless objective
    assert localization_objective(real.net, net.sensors_truth) == 0.0


def test_noise_deterministic_and_unbiased():
    spec = GenSpec(K=200, m=10, r=0.2, sigma=0.01, seed=17)
    net, _ = generate_connected(spec)
    r1 = sample_noise(net, spec.sigma, noise_seed(spec.seed, 0))
    r2 = sample_noise(net, spec.sigma, noise_seed(spec.seed, 0))
    assert np.array_equal(r1.net.dist, r2.net.dist)   # byte-identical
    r3 = sample_noise(net, spec.sigma, noise_seed(spec.seed, 1))
    assert not np.array_equal(r1.net.dist, r3.net.dist)
    # law of large numbers: sample mean of the perturbations near zero
    eps = r1.net.dist - net.true_distances()
    M = net.num_edges
    assert abs(eps.mean()) <= 3 * spec.sigma / np.sqrt(M)


def test_noise_resampled_positive():
    # distances so small that naive draws would often go nonpositive
    spec = GenSpec(K=12, m=2, r=10.0, sigma=0.5, box=(-0.005, 0.005), seed=3)
    net, _ = generate_connected(spec)
    real = sample_noise(net, spec.sigma, noise_seed(spec.seed, 0))
    assert np.all(real.net.dist > 0)


def test_noise_requires_truth():
    spec = GenSpec(K=10, m=2, r=0.9, sigma=0.01, seed=2)
    net, _ = generate_connected(spec)
    stripped = type(net)(net.dim, net.num_sensors, net.anchors, net.edges_e1,
                         net.edges_e2, net.dist, net.radius)
    with pytest.raises(MissingTruthError):
        sample_noise(stripped, 0.01, 0)


def test_realization_topology_fixed():
    spec = GenSpec(K=30, m=3, r=0.45, sigma=0.02, seed=21, realization_count=4)
    net, _ = generate_connected(spec)
    reals = list(iter_realizations(spec, net))
    assert [r.realization_index for r in reals] == [0, 1, 2, 3]
    for real in reals:
        assert np.array_equal(real.net.edges_e1, net.edges_e1)
        assert np.array_equal(real.net.edges_e2, net.edges_e2)
    assert not np.array_equal(reals[0].net.dist, reals[1].net.dist)


def test_presets_cover_published_rows():
    assert preset("rand-1000").K == 1000
    assert preset("rand-1000").m == 20
    assert preset("rand-1000").r == 0.061
    assert preset("rand-1000").sigma == 0.00427
    assert preset("rand-2000", seed=5).seed == 5
    assert PRESETS["rand-10000"].K == 10000
    with pytest.raises(KeyError):
        preset("rand-999")


def test_preset_mean_degree_matches_published_average():
    # published average neighbor count for the 1000-node row: 11.09
    degrees = []
    for seed in range(20):
        spec = preset("rand-1000", seed=seed)
        net, _ = generate_connected(spec)
        degrees.append(net.degrees.mean())
    assert abs(np.mean(degrees) - 11.09) <= 1.0


def test_genspec_validation():
    with pytest.raises(ValueError):
        GenSpec(K=5, m=5, r=0.1, sigma=0.0)
    with pytest.raises(ValueError):
        GenSpec(K=5, m=1, r=-0.1, sigma=0.0)
    with pytest.raises(ValueError):
        GenSpec(K=5, m=1, r=0.1, sigma=-1.0)
    with pytest.raises(ValueError):
        GenSpec(K=5, m=1, r=0.1, sigma=0.0, realization_count=0)
