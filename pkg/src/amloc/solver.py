"""Alternating-minimization engine over location clusters and edge auxiliaries.

One sweep minimizes the smooth reformulated objective exactly over each
cluster block in turn (Gauss-Seidel: later clusters see earlier clusters'
fresh values) and then closes with the auxiliary update, which normalizes
every edge difference onto the unit sphere (or to zero for a vanishing
difference).  The whole-set partition gives the centralized method (one SPD
solve per sweep), the singleton partition the fully distributed one
(per-sensor closed form), and independent-set partitions allow the members
of each cluster to update in parallel.

Every block subproblem is a strongly convex quadratic with a unique
minimizer, so the iteration is well-defined for any connected, anchored
instance; the objective value never increases and the iterates converge to a
point whose criticality is certified by ``criticality_report``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .clustering import Clustering
from .errors import FactorizationError, SubFactorizationError
from .matrices import ProblemMatrices, SpdFactor, build_matrices, spd_solve
from .network import Network

__all__ = ["SolverConfig", "SolverState", "RunTrace", "CriticalityReport",
           "localization_objective", "surrogate_objective",
           "surrogate_objective_matrix", "update_u", "update_x_centralized",
           "update_x_sensor", "update_x_cluster", "am_sweep", "ag_warmstart",
           "lipschitz_bound", "run", "criticality_report"]

# Differences with norm at or below this are treated as exactly zero in the
# auxiliary update (the zero branch of the normalization).
_ZERO_NORM = 1e-300

_BOUNDARY_TOL = 1e-9


# --------------------------------------------------------------------------
# Objectives
# --------------------------------------------------------------------------

def localization_objective(net: Network, x: np.ndarray) -> float:
    """Sum of squared range residuals at iterate x (the quantity reported
    as OBV): for every measured edge, (||difference|| - d)^2."""
    norms = np.linalg.norm(net.edge_differences(x), axis=1)
    return float(np.sum((norms - net.dist) ** 2))


def surrogate_objective(net: Network, x: np.ndarray, u: np.ndarray) -> float:
    """Smooth reformulated objective, evaluated edge by edge.

    Per edge: ``||v||^2 - 2 d u' v`` with v the edge difference.  Evaluated
    for any u; feasibility (each u_ij in the closed unit ball) is the
    caller's concern.  Minimizing over feasible u recovers the localization
    objective up to the constant ``sum d^2``.
    """
    v = net.edge_differences(x)
    return float(np.sum(v * v) - 2.0 * np.sum(net.dist * np.sum(u * v, axis=1)))


def surrogate_objective_matrix(mats: ProblemMatrices, x: np.ndarray,
                               u: np.ndarray) -> float:
    """Quadratic-form evaluation of the same objective.

    ``x' P x - 2 (W u + c)' x + 2 s_bar' u + const`` with the anchor-square
    constant retained, so this equals :func:`surrogate_objective` exactly
    (dual evaluation path used by the oracle tests).
    """
    px = mats.system_matrix @ x
    rhs = mats.pull(u) + mats.anchor_force
    return float(np.sum(x * px) - 2.0 * np.sum(rhs * x)
                 + 2.0 * np.sum(mats.anchor_pull * u) + mats.anchor_sq)


# --------------------------------------------------------------------------
# Block updates
# --------------------------------------------------------------------------

def update_u(net: Network, x: np.ndarray) -> np.ndarray:
    """Exact auxiliary update: normalize every edge difference.

    Row l becomes ``v / ||v||`` for a nonzero difference and the zero vector
    otherwise.  The reverse orientation is implied by negation and never
    stored.  The result maximizes ``u' v`` over the unit ball edge-wise.
    """
    v = net.edge_differences(x)
    norms = np.linalg.norm(v, axis=1)
    safe = np.where(norms > _ZERO_NORM, norms, 1.0)
    u = v / safe[:, None]
    u[norms <= _ZERO_NORM] = 0.0
    return u


def update_x_centralized(mats: ProblemMatrices, u: np.ndarray) -> np.ndarray:
    """Exact minimizer over all locations jointly: solve ``P x = W u + c``."""
    return spd_solve(mats, mats.pull(u) + mats.anchor_force)


def update_x_sensor(net: Network, i: int, x: np.ndarray,
                    u: np.ndarray) -> np.ndarray:
    """Exact minimizer over the single location x_i with all else fixed.

    Averages the neighbor positions, the oriented measured pulls
    ``d_ij u_ij`` (stored values are negated when i is the larger endpoint)
    and the anchor neighbor positions, divided by the neighbor count M_i.
    """
    adj = net.adjacency
    acc = adj.anchor_sum[i].copy()
    nbrs = adj.nbr_sensors[i]
    if len(nbrs):
        acc += x[nbrs].sum(axis=0)
        e = adj.nbr_edges[i]
        acc += ((adj.nbr_signs[i] * net.dist[e])[:, None] * u[e]).sum(axis=0)
    ae = adj.anchor_edges[i]
    if len(ae):
        acc += (net.dist[ae][:, None] * u[ae]).sum(axis=0)
    return acc / adj.degrees[i]


def _sensor_adjacency(mats: ProblemMatrices) -> sp.csr_matrix:
    """0/1 sensor-sensor adjacency recovered from the system matrix."""
    sys = mats.system_matrix
    return sp.csr_matrix(sp.diags(sys.diagonal()) - sys)


def update_x_cluster(net: Network, mats: ProblemMatrices, cluster,
                     x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Exact minimizer over one cluster block with the rest fixed.

    Solves the cluster's principal submatrix system with the boundary terms
    (neighbor sensors outside the cluster) moved to the right-hand side.
    Coincides with :func:`update_x_sensor` for singletons and with
    :func:`update_x_centralized` for the whole sensor set.  Returns the
    updated block, shape (len(cluster), dim).
    """
    C = np.asarray(cluster, dtype=np.int64)
    if len(C) == 0:
        raise ValueError("empty cluster")
    if len(C) == net.num_sensors:
        return update_x_centralized(mats, u)
    rhs = (mats.pull(u) + mats.anchor_force)[C]
    adj1 = _sensor_adjacency(mats)
    rows = adj1[C]
    boundary = rows @ x - rows[:, C] @ x[C]
    sub = mats.system_matrix[C][:, C]
    try:
        factor = SpdFactor(sub)
    except FactorizationError as exc:
        raise SubFactorizationError(
            f"cluster of size {len(C)} failed to factorize") from exc
    return factor.solve(rhs + boundary)


# --------------------------------------------------------------------------
# Sweep plan (per-run caches)
# --------------------------------------------------------------------------

class _GatherSum:
    """Segment-summed neighbor gather: row i of the result is the sum of x
    over a fixed neighbor list of member i.  Cumulative-sum segments keep
    the cost at one fancy index per call and tolerate empty segments."""

    def __init__(self, neighbor_lists):
        counts = np.array([len(lst) for lst in neighbor_lists], dtype=np.int64)
        self.flat = (np.concatenate(neighbor_lists).astype(np.int64)
                     if counts.sum() else np.empty(0, dtype=np.int64))
        self.ends = np.cumsum(counts)
        self.starts = self.ends - counts

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if not len(self.flat):
            return np.zeros((len(self.ends), x.shape[1]))
        cs = np.empty((len(self.flat) + 1, x.shape[1]))
        cs[0] = 0.0
        np.cumsum(x[self.flat], axis=0, out=cs[1:])
        return cs[self.ends] - cs[self.starts]


class _SweepPlan:
    """Precomputed per-cluster machinery for repeated sweeps."""

    def __init__(self, net: Network, mats: ProblemMatrices,
                 clustering: Clustering, parallel_within_colors: bool = True):
        if clustering.num_sensors != net.num_sensors:
            raise ValueError("clustering does not match the network")
        self.net = net
        self.mats = mats
        self.clustering = clustering
        self.parallel = parallel_within_colors
        self.kind = clustering.kind
        adj = net.adjacency
        if self.kind == "geographical":
            labels = clustering.labels()
            self._cluster_factors = []
            self._outside = []
            for cid, C in enumerate(clustering.clusters):
                try:
                    factor = SpdFactor(mats.system_matrix[C][:, C])
                except FactorizationError as exc:
                    raise SubFactorizationError(
                        f"cluster of size {len(C)} failed to factorize") from exc
                self._cluster_factors.append(factor)
                # neighbors outside the cluster feed the right-hand side
                self._outside.append(_GatherSum(
                    [adj.nbr_sensors[i][labels[adj.nbr_sensors[i]] != cid]
                     for i in C]))
        elif self.kind == "colored":
            # independence: every sensor neighbor lies outside the class
            self._gather = [_GatherSum([adj.nbr_sensors[i] for i in C])
                            for C in clustering.clusters]
        self._deg = adj.degrees.astype(np.float64)

    def sweep_x(self, x: np.ndarray, rhs_const: np.ndarray) -> None:
        """One Gauss-Seidel pass over the clusters, updating x in place.

        ``rhs_const`` is ``W u + c`` reshaped (N, dim); it does not change
        within a sweep because the auxiliaries update only at sweep end.
        """
        if self.kind == "whole":
            x[:] = self.mats.factor.solve(rhs_const)
            return
        if self.kind == "singleton":
            adj = self.net.adjacency
            for i in range(self.net.num_sensors):
                nbrs = adj.nbr_sensors[i]
                s = x[nbrs].sum(axis=0) if len(nbrs) else 0.0
                x[i] = (s + rhs_const[i]) / self._deg[i]
            return
        if self.kind == "colored":
            if self.parallel:
                for C, gather in zip(self.clustering.clusters, self._gather):
                    x[C] = (gather(x) + rhs_const[C]) / self._deg[C, None]
            else:
                adj = self.net.adjacency
                for C in self.clustering.clusters:
                    for i in C:
                        nbrs = adj.nbr_sensors[i]
                        s = x[nbrs].sum(axis=0) if len(nbrs) else 0.0
                        x[i] = (s + rhs_const[i]) / self._deg[i]
            return
        # geographical: exact joint minimization per cluster
        for C, gather, factor in zip(self.clustering.clusters,
                                     self._outside, self._cluster_factors):
            x[C] = factor.solve(rhs_const[C] + gather(x))


# --------------------------------------------------------------------------
# Solver state, trace, driver
# --------------------------------------------------------------------------

@dataclass
class SolverConfig:
    """Run parameters: partition, budget, warm start, instrumentation."""

    clustering: Clustering
    max_iters: int = 1000
    ag_warmstart_iters: int = 0
    tolerance: float | None = None       # early stop on displacement, off by default
    record_history: bool = True
    parallel_within_colors: bool = True
    record_iterates: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.ag_warmstart_iters < 0:
            raise ValueError("ag_warmstart_iters must be >= 0")


@dataclass
class SolverState:
    """Current iterate pair and iteration counter.

    ``x`` has shape (N, dim); ``u`` has one row per edge in canonical order,
    each either zero or unit-norm after an auxiliary update, with the
    reverse orientation implied by negation.
    """

    x: np.ndarray
    u: np.ndarray
    iters: int = 0


@dataclass
class RunTrace:
    """Per-iteration history of one run.

    ``g_pre_u[k]`` is the reformulated objective right after the k-th
    location pass (auxiliaries still old), ``g_post_u[k]`` after the closing
    auxiliary update; during warm-start rounds both hold the objective at the
    fixed initial auxiliaries.  ``obv[k]`` is the localization objective,
    ``displacement[k]`` the location step norm, ``subgrad_norm[k]`` the norm
    of the explicit subgradient witness (NaN during warm start), ``err_sq``
    the total squared error against ground truth when available.
    """

    ag_iters: int = 0
    g_initial: float = math.nan
    g_pre_u: list[float] = field(default_factory=list)
    g_post_u: list[float] = field(default_factory=list)
    displacement: list[float] = field(default_factory=list)
    obv: list[float] = field(default_factory=list)
    subgrad_norm: list[float] = field(default_factory=list)
    err_sq: list[float] = field(default_factory=list)
    iterates: list[np.ndarray] = field(default_factory=list)

    def arrays(self) -> dict[str, np.ndarray]:
        return {k: np.asarray(getattr(self, k))
                for k in ("g_pre_u", "g_post_u", "displacement", "obv",
                          "subgrad_norm", "err_sq")}


def am_sweep(net: Network, mats: ProblemMatrices, clustering: Clustering,
             state: SolverState, trace: RunTrace | None = None,
             plan: _SweepPlan | None = None,
             parallel_within_colors: bool = True) -> SolverState:
    """One full alternating-minimization sweep, in place.

    Clusters update in fixed order with Gauss-Seidel semantics, then the
    auxiliaries update once.  The reformulated objective cannot increase
    across either phase.
    """
    if plan is None:
        plan = _SweepPlan(net, mats, clustering, parallel_within_colors)
    x_old = state.x.copy() if trace is not None else None
    rhs_const = mats.pull(state.u) + mats.anchor_force
    plan.sweep_x(state.x, rhs_const)

    if trace is not None:
        _record_am_iteration(net, mats, state, trace, x_old, rhs_const)
    state.u = update_u(net, state.x)
    if trace is not None:
        _finish_am_record(net, state, trace)
    state.iters += 1
    return state


def _record_am_iteration(net, mats, state, trace, x_old, rhs_const):
    x = state.x
    px = mats.system_matrix @ x
    g_pre = (float(np.sum(x * px)) - 2.0 * float(np.sum(rhs_const * x))
             + 2.0 * float(np.sum(mats.anchor_pull * state.u)) + mats.anchor_sq)
    dx = x - x_old
    disp = float(np.linalg.norm(dx))
    y_x = 2.0 * (px - rhs_const)
    y_u = -2.0 * mats.pull_t(dx)
    trace.g_pre_u.append(g_pre)
    trace.displacement.append(disp)
    trace.subgrad_norm.append(math.hypot(np.linalg.norm(y_x),
                                         np.linalg.norm(y_u)))


def _finish_am_record(net, state, trace):
    norms = np.linalg.norm(net.edge_differences(state.x), axis=1)
    trace.g_post_u.append(float(np.sum(norms * norms)
                                - 2.0 * float(np.sum(net.dist * norms))))
    trace.obv.append(float(np.sum((norms - net.dist) ** 2)))
    if net.sensors_truth is not None:
        trace.err_sq.append(float(np.sum((state.x - net.sensors_truth) ** 2)))


def lipschitz_bound(net: Network) -> float:
    """Gradient Lipschitz bound for the location block: 2 (2 d_max + m),
    with d_max the largest sensor-sensor degree among non-anchors."""
    return 2.0 * (2.0 * net.max_e1_degree + net.num_anchors)


def ag_warmstart(net: Network, mats: ProblemMatrices, x0: np.ndarray,
                 u0: np.ndarray, iters: int, record=None) -> np.ndarray:
    """Accelerated-gradient warm start on the location block.

    Runs Nesterov's method with constant step 1/L on the strongly convex
    quadratic obtained by freezing the auxiliaries at ``u0``; the gradient is
    ``2 (P x - W u0 - c)``.  ``iters = 0`` returns ``x0`` unchanged.  The
    optional ``record(x)`` callback fires after each iteration.
    """
    x = np.array(x0, dtype=np.float64)
    if iters <= 0:
        return x
    L = lipschitz_bound(net)
    rhs = mats.pull(u0) + mats.anchor_force
    y = x.copy()
    t = 1.0
    for _ in range(iters):
        grad = 2.0 * (mats.system_matrix @ y - rhs)
        x_new = y - grad / L
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        y = x_new + ((t - 1.0) / t_new) * (x_new - x)
        x, t = x_new, t_new
        if record is not None:
            record(x)
    return x


def run(net: Network, config: SolverConfig, x0=None, u0=None,
        mats: ProblemMatrices | None = None) -> tuple[SolverState, RunTrace]:
    """Full solve: optional warm start, then sweeps until the budget.

    Warm-start rounds count against ``max_iters`` so every method in a
    comparison performs the same number of location-update rounds.  With a
    ``tolerance`` set, the loop stops early once the location step norm
    drops to it.  Deterministic: no internal randomness; ``x0`` defaults to
    the origin and ``u0`` to zero auxiliaries.
    """
    if mats is None:
        mats = build_matrices(net)
    N, n = net.num_sensors, net.dim
    x = np.zeros((N, n)) if x0 is None else np.array(x0, dtype=np.float64).reshape(N, n)
    u = np.zeros((net.num_edges, n)) if u0 is None \
        else np.array(u0, dtype=np.float64).reshape(net.num_edges, n)
    plan = _SweepPlan(net, mats, config.clustering, config.parallel_within_colors)
    trace = RunTrace(ag_iters=min(config.ag_warmstart_iters, config.max_iters))
    state = SolverState(x=x, u=u, iters=0)

    if config.record_history:
        trace.g_initial = surrogate_objective_matrix(mats, x, u)

    if trace.ag_iters > 0:
        holder = {"prev": x.copy()}

        def _rec(xk):
            if not config.record_history:
                return
            g = surrogate_objective_matrix(mats, xk, u)
            trace.g_pre_u.append(g)
            trace.g_post_u.append(g)
            trace.displacement.append(float(np.linalg.norm(xk - holder["prev"])))
            trace.subgrad_norm.append(math.nan)
            trace.obv.append(localization_objective(net, xk))
            if net.sensors_truth is not None:
                trace.err_sq.append(float(np.sum((xk - net.sensors_truth) ** 2)))
            if config.record_iterates:
                trace.iterates.append(xk.copy())
            holder["prev"] = xk.copy()

        state.x = ag_warmstart(net, mats, x, u, trace.ag_iters, record=_rec)
        state.iters = trace.ag_iters

    sweeps = config.max_iters - trace.ag_iters
    for _ in range(sweeps):
        x_old = state.x.copy()
        rhs_const = mats.pull(state.u) + mats.anchor_force
        plan.sweep_x(state.x, rhs_const)
        if config.record_history:
            _record_am_iteration(net, mats, state, trace, x_old, rhs_const)
        state.u = update_u(net, state.x)
        if config.record_history:
            _finish_am_record(net, state, trace)
        if config.record_iterates:
            trace.iterates.append(state.x.copy())
        state.iters += 1
        disp = float(np.linalg.norm(state.x - x_old))
        if config.tolerance is not None and disp <= config.tolerance:
            break
    return state, trace


# --------------------------------------------------------------------------
# Criticality certification
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CriticalityReport:
    """Residuals of the two first-order optimality conditions.

    ``res_x`` is the largest per-sensor norm of the location stationarity
    residual; ``res_u`` the largest per-edge distance of ``2 d v`` to the
    unit-ball normal cone at the stored auxiliary.  Both vanish exactly at a
    critical point of the reformulation, which certifies the locations as
    critical for the original localization objective.
    """

    res_x: float
    res_u: float

    def is_critical(self, eps: float) -> bool:
        return max(self.res_x, self.res_u) <= eps


def criticality_report(net: Network, x: np.ndarray,
                       u: np.ndarray) -> CriticalityReport:
    N, n = net.num_sensors, net.dim
    e1, e2 = net.edges_e1, net.edges_e2
    d = net.dist
    n1 = len(e1)

    # Location residual: M_i x_i - sum nbr x_j - sum nbr anchors - sum d u.
    acc = net.adjacency.degrees[:, None] * x - net.adjacency.anchor_sum
    if n1:
        np.add.at(acc, e1[:, 0], -x[e1[:, 1]])
        np.add.at(acc, e1[:, 1], -x[e1[:, 0]])
        du1 = d[:n1, None] * u[:n1]
        np.add.at(acc, e1[:, 0], -du1)
        np.add.at(acc, e1[:, 1], du1)
    if len(e2):
        np.add.at(acc, e2[:, 0], -d[n1:, None] * u[n1:])
    res_x = float(np.linalg.norm(acc, axis=1).max()) if N else 0.0

    # Auxiliary residual: distance of 2 d v to the normal cone at u.
    v = net.edge_differences(x)
    target = 2.0 * d[:, None] * v
    unorm = np.linalg.norm(u, axis=1)
    res = np.linalg.norm(target, axis=1)           # interior: cone is {0}
    boundary = np.abs(unorm - 1.0) <= _BOUNDARY_TOL
    if boundary.any():
        ub = u[boundary]
        tb = target[boundary]
        lam = np.maximum(np.sum(tb * ub, axis=1), 0.0)
        res[boundary] = np.linalg.norm(tb - lam[:, None] * ub, axis=1)
    outside = unorm > 1.0 + _BOUNDARY_TOL
    if outside.any():
        res[outside] = np.inf                      # infeasible auxiliary
    res_u = float(res.max()) if len(res) else 0.0
    return CriticalityReport(res_x=res_x, res_u=res_u)
