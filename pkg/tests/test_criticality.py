import numpy as np
import pytest

from amloc import (Network, SolverConfig, criticality_report, run,
                   update_u, whole_cluster)

from conftest import brute_force_net


def two_anchor_net():
    return Network(2, 1, anchors=[[-1.0, 0.0], [1.0, 0.0]], edges_e1=[],
                   edges_e2=[(0, 1), (0, 2)], dist=[1.0, 1.0], radius=3.0)


def test_midpoint_fixed_point_is_critical():
    net = two_anchor_net()
    x = np.array([[0.0, 0.0]])
    u = update_u(net, x)    # unit pulls toward each anchor
    rep = criticality_report(net, x, u)
    assert rep.res_x == 0.0
    assert rep.res_u == 0.0
    assert rep.is_critical(0.0)


def test_anchor_point_zero_u_is_critical():
    a = np.array([0.3, -0.6])
    net = Network(2, 1, anchors=[a], edges_e1=[], edges_e2=[(0, 1)],
                  dist=[0.8], radius=9.0)
    rep = criticality_report(net, a[None, :], np.zeros((1, 2)))
    # interior auxiliary with zero difference: both conditions hold exactly
    assert rep.res_x == 0.0 and rep.res_u == 0.0


def test_perturbation_grows_linearly_with_degree_slope():
    net = brute_force_net(seed=90, K=10, m=3, r=0.8, sigma=0.01)
    config = SolverConfig(clustering=whole_cluster(net), max_iters=3000,
                          tolerance=1e-13)
    state, _ = run(net, config, x0=np.zeros((net.num_sensors, net.dim)))
    rep = criticality_report(net, state.x, state.u)
    assert rep.res_x <= 1e-9
    i = int(np.argmax(net.degrees))
    deg = float(net.degrees[i])
    for delta in (1e-3, 1e-2):
        x2 = state.x.copy()
        x2[i, 0] += delta
        rep2 = criticality_report(net, x2, state.u)
        # stationarity residual at the moved sensor: degree times the shift
        assert rep2.res_x == pytest.approx(deg * delta, rel=1e-3)


def test_infeasible_auxiliary_reports_infinite_residual():
    net = two_anchor_net()
    u = np.array([[2.0, 0.0], [0.0, 0.0]])
    rep = criticality_report(net, np.array([[0.0, 0.0]]), u)
    assert rep.res_u == np.inf


def test_boundary_residual_measures_cone_distance():
    # one sensor, one anchor at origin, u on the sphere but misaligned
    net = Network(2, 1, anchors=[[0.0, 0.0]], edges_e1=[], edges_e2=[(0, 1)],
                  dist=[2.0], radius=9.0)
    x = np.array([[1.0, 0.0]])
    u = np.array([[0.0, 1.0]])       # orthogonal to the true direction
    rep = criticality_report(net, x, u)
    # target 2 d v = (4, 0); projection onto the ray through u is 0
    assert rep.res_u == pytest.approx(4.0)
    u_aligned = np.array([[1.0, 0.0]])
    rep2 = criticality_report(net, x, u_aligned)
    assert rep2.res_u == pytest.approx(0.0, abs=1e-15)


def test_interior_residual_is_pull_magnitude():
    net = Network(2, 1, anchors=[[0.0, 0.0]], edges_e1=[], edges_e2=[(0, 1)],
                  dist=[1.5], radius=9.0)
    x = np.array([[0.6, 0.8]])
    rep = criticality_report(net, x, np.zeros((1, 2)))
    # ||2 d v|| with ||v|| = 1
    assert rep.res_u == pytest.approx(3.0)
