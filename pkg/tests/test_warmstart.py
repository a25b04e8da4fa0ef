import numpy as np

from amloc import (Network, ag_warmstart, build_matrices, lipschitz_bound,
                   surrogate_objective_matrix)

from conftest import brute_force_net


def gradient(mats, x, rhs):
    return 2.0 * (mats.system_matrix @ x - rhs)


def plain_gradient_descent(mats, x0, rhs, L, iters):
    x = x0.copy()
    for _ in range(iters):
        x = x - gradient(mats, x, rhs) / L
    return x


def test_zero_iterations_returns_start():
    net = brute_force_net(seed=80, K=12, m=3, r=0.7)
    mats = build_matrices(net)
    rng = np.random.default_rng(0)
    x0 = rng.normal(size=(net.num_sensors, net.dim))
    out = ag_warmstart(net, mats, x0, np.zeros((net.num_edges, net.dim)), 0)
    np.testing.assert_array_equal(out, x0)
    assert out is not x0   # private copy


def test_step_bound_formula():
    # star sensor with the published benchmark counts: degree 50, 20 anchors
    hub_edges = [(0, i) for i in range(1, 51)]
    anchor_edges = [(0, 51 + a) for a in range(20)]
    net = Network(2, 51, anchors=np.random.default_rng(1).normal(size=(20, 2)),
                  edges_e1=hub_edges, edges_e2=anchor_edges,
                  dist=[1.0] * 70, radius=99.0)
    assert net.max_e1_degree == 50
    assert lipschitz_bound(net) == 240.0


def test_bound_dominates_spectrum():
    # the step bound is a true Lipschitz constant: L >= 2 lambda_max(P)
    for seed in range(6):
        net = brute_force_net(seed=seed + 800, K=30 + 20 * seed, m=3 + seed,
                              r=0.45)
        assert net.num_sensors <= 200
        mats = build_matrices(net)
        lam_max = float(np.linalg.eigvalsh(mats.system_matrix.toarray()).max())
        assert lipschitz_bound(net) >= 2.0 * lam_max - 1e-9


def test_accelerated_beats_plain_gradient():
    for seed in (0, 1, 2):
        net = brute_force_net(seed=seed + 900, K=40, m=4, r=0.4, sigma=0.005)
        mats = build_matrices(net)
        rng = np.random.default_rng(seed)
        x0 = rng.uniform(-0.01, 0.01, size=(net.num_sensors, net.dim))
        u0 = np.zeros((net.num_edges, net.dim))
        rhs = mats.pull(u0) + mats.anchor_force
        L = lipschitz_bound(net)
        x_ag = ag_warmstart(net, mats, x0, u0, 100)
        x_gd = plain_gradient_descent(mats, x0, rhs, L, 100)
        g_ag = np.linalg.norm(gradient(mats, x_ag, rhs))
        g_gd = np.linalg.norm(gradient(mats, x_gd, rhs))
        assert g_ag <= g_gd + 1e-12


def test_warmstart_descends_frozen_objective():
    net = brute_force_net(seed=82, K=25, m=3, r=0.5, sigma=0.01)
    mats = build_matrices(net)
    rng = np.random.default_rng(7)
    x0 = rng.uniform(-0.01, 0.01, size=(net.num_sensors, net.dim))
    u0 = np.zeros((net.num_edges, net.dim))
    x = ag_warmstart(net, mats, x0, u0, 200)
    assert surrogate_objective_matrix(mats, x, u0) \
        < surrogate_objective_matrix(mats, x0, u0)
    # near the frozen-u minimizer after enough iterations
    x_star = mats.factor.solve(mats.pull(u0) + mats.anchor_force)
    assert np.linalg.norm(x - x_star) <= 1e-2 * (1 + np.linalg.norm(x_star))


def test_record_callback_fires_every_iteration():
    net = brute_force_net(seed=83, K=10, m=2, r=0.8)
    mats = build_matrices(net)
    seen = []
    ag_warmstart(net, mats, np.zeros((net.num_sensors, net.dim)),
                 np.zeros((net.num_edges, net.dim)), 17,
                 record=lambda x: seen.append(x.copy()))
    assert len(seen) == 17
