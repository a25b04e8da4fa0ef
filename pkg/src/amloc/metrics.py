"""Evaluation metrics and per-iteration cost accounting.

The headline error figure aggregates over noise realizations without
per-sensor normalization:

    RMSE = sqrt( sum_l sum_i ||x_i^l - x_i^true||^2 / R )

so it is comparable to the root Cramer-Rao bound reported as
``sqrt(trace(FIM^-1))`` over all unknown coordinates.  A clearly separate
per-sensor accessor divides by N for display purposes only.

Message accounting mirrors the published per-iteration cost table: in the
distributed variants every node broadcasts one dim-vector per iteration and a
sensor with M_i neighbors receives M_i messages, so total receptions per
iteration equal 2M (two per measured edge, one in each direction).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .clustering import Clustering
from .errors import MissingTruthError, SingularFIMError
from .network import Network

__all__ = ["rmse", "rmse_per_sensor", "bias_estimate", "fisher_information",
           "crlb_root", "message_accounting", "MessageLedger", "RunReport",
           "write_aggregate_csv", "write_plotdata_csv", "CSV_COLUMNS"]


def _stack_errors(estimates, truth) -> np.ndarray:
    if truth is None:
        raise MissingTruthError("ground-truth positions are required")
    truth = np.asarray(truth, dtype=np.float64)
    errs = []
    for est in estimates:
        est = np.asarray(est, dtype=np.float64)
        if est.shape != truth.shape:
            raise ValueError("estimate shape does not match truth")
        errs.append(est - truth)
    if not errs:
        raise ValueError("need at least one realization")
    return np.stack(errs)


def rmse(estimates, truth) -> float:
    """Root realization-averaged total squared localization error."""
    errs = _stack_errors(estimates, truth)
    return float(np.sqrt(np.sum(errs ** 2) / len(errs)))


def rmse_per_sensor(estimates, truth) -> float:
    """Per-sensor-normalized variant: divides the mean square by N as well."""
    errs = _stack_errors(estimates, truth)
    n_sensors = errs.shape[1]
    return float(np.sqrt(np.sum(errs ** 2) / (len(errs) * n_sensors)))


def bias_estimate(estimates, truth) -> tuple[np.ndarray, float]:
    """Per-sensor mean error vectors and the norm of their stacked vector."""
    errs = _stack_errors(estimates, truth)
    bias = errs.mean(axis=0)
    return bias, float(np.linalg.norm(bias))


def fisher_information(net: Network, sigma: float) -> np.ndarray:
    """Fisher information of the Gaussian range measurements at ground truth.

    Each measured edge contributes ``(1/sigma^2) g g'`` where g holds the
    unit edge direction in the block of sensor i and its negation in the
    block of sensor j; anchor blocks are absent because anchors are known.
    Returned dense, shape (N*dim, N*dim).
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive for a Fisher information")
    if net.sensors_truth is None:
        raise MissingTruthError("Fisher information is evaluated at ground truth")
    N, n = net.num_sensors, net.dim
    v = net.edge_differences(net.sensors_truth)
    norms = np.linalg.norm(v, axis=1)
    if np.any(norms <= 0):
        raise ValueError("coincident nodes give undefined edge directions")
    g = v / norms[:, None]
    fim = np.zeros((N * n, N * n))
    n1 = len(net.edges_e1)
    for k, (i, j) in enumerate(net.edges_e1):
        gi = g[k]
        bi, bj = slice(i * n, i * n + n), slice(j * n, j * n + n)
        outer = np.outer(gi, gi)
        fim[bi, bi] += outer
        fim[bj, bj] += outer
        fim[bi, bj] -= outer
        fim[bj, bi] -= outer
    for k, (i, _) in enumerate(net.edges_e2):
        gi = g[n1 + k]
        bi = slice(i * n, i * n + n)
        fim[bi, bi] += np.outer(gi, gi)
    fim /= sigma ** 2
    return fim


def crlb_root(net: Network, sigma: float, per_node: bool = False) -> float:
    """Root Cramer-Rao bound: sqrt(trace(FIM^-1)) over all unknown coordinates.

    ``per_node=True`` applies the display-only division by the sensor count.

    Raises
    ------
    SingularFIMError
        When the information matrix is (numerically) singular, signalling an
        under-anchored or under-connected geometry.
    """
    fim = fisher_information(net, sigma)
    try:
        cho = scipy.linalg.cho_factor(fim)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise SingularFIMError("Fisher information is singular") from exc
    diag = np.diag(cho[0])
    if diag.min() <= 1e-8 * diag.max():
        raise SingularFIMError("Fisher information is numerically singular")
    inv = scipy.linalg.cho_solve(cho, np.eye(fim.shape[0]))
    value = float(np.sqrt(np.trace(inv)))
    return value / net.num_sensors if per_node else value


# --------------------------------------------------------------------------
# Communication and computation accounting
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MessageLedger:
    """Analytic per-iteration cost tallies for one method on one instance.

    Distributed variants: sensor i receives ``in_counts[i] = M_i`` messages
    and broadcasts once, every message one dim-vector; anchors likewise
    broadcast their position and hear their neighbors, so total receptions
    are 2M per iteration.  The centralized variant has no per-node messaging
    ('-' entries); its sequential cost separates the one-time factorization
    (dense worst case ``dim * N^3``) from the per-iteration ``dim * M``
    auxiliary work.  ``parallel_cost`` is the within-cluster-parallel model
    ``sum_j max_{i in C_j} dim * M_i`` and is only defined for independent-set
    clusterings.
    """

    method_kind: str
    msg_size_scalars: int
    in_counts: np.ndarray | None            # per sensor, per iteration
    out_counts: np.ndarray | None
    anchor_in_counts: np.ndarray | None
    ops_per_sensor: np.ndarray | None       # dim * M_i
    sequential_cost: float
    parallel_cost: float | None
    one_time_cost: float = 0.0
    one_time_cost_actual: float | None = None

    @property
    def total_in(self) -> int:
        if self.in_counts is None:
            return 0
        total = int(self.in_counts.sum())
        if self.anchor_in_counts is not None:
            total += int(self.anchor_in_counts.sum())
        return total

    @property
    def total_out(self) -> int:
        if self.out_counts is None:
            return 0
        extra = len(self.anchor_in_counts) if self.anchor_in_counts is not None else 0
        return int(self.out_counts.sum()) + extra


_DISTRIBUTED_KINDS = ("am-fd", "am-cc", "ag")


def message_accounting(method_kind: str, clustering: Clustering | None,
                       net: Network, mats=None) -> MessageLedger:
    """Per-iteration communication/computation ledger for a method kind.

    ``method_kind`` is one of ``am-fc``, ``am-fd``, ``am-cc``, ``ag``.
    Clustered variants other than the independent-set one reuse the broadcast
    model of ``am-fd`` (pass kind ``am-fd``); ``am-cc`` needs its clustering
    to evaluate the parallel cost.  Passing the assembled matrices lets the
    centralized row report the actual sparse factorization size next to the
    dense worst case.
    """
    kind = method_kind.lower()
    N, n, M = net.num_sensors, net.dim, net.num_edges
    deg = net.adjacency.degrees
    if kind == "am-fc":
        actual = None
        if mats is not None:
            lu = getattr(mats.factor, "_lu", None)
            if lu is not None:
                actual = float(n * (lu.L.nnz + lu.U.nnz))
            else:
                actual = float(n * N * (N + 1) / 2)  # dense triangular factor
        return MessageLedger(
            method_kind=kind, msg_size_scalars=n,
            in_counts=None, out_counts=None, anchor_in_counts=None,
            ops_per_sensor=None,
            sequential_cost=float(n * M),
            parallel_cost=None,
            one_time_cost=float(n * N ** 3),
            one_time_cost_actual=actual)
    if kind not in _DISTRIBUTED_KINDS:
        raise ValueError(f"unknown method kind {method_kind!r}")

    anchor_deg = np.zeros(net.num_anchors, dtype=np.int64)
    if len(net.edges_e2):
        np.add.at(anchor_deg, net.edges_e2[:, 1] - N, 1)
    parallel = None
    if kind == "am-cc":
        if clustering is None:
            raise ValueError("am-cc accounting needs the clustering")
        parallel = float(sum(n * int(deg[C].max()) for C in clustering.clusters))
    elif kind == "ag":
        parallel = float(n * int(deg.max()))
    return MessageLedger(
        method_kind=kind, msg_size_scalars=n,
        in_counts=deg.copy(), out_counts=np.ones(N, dtype=np.int64),
        anchor_in_counts=anchor_deg,
        ops_per_sensor=(n * deg).astype(np.float64),
        sequential_cost=float(n * M),
        parallel_cost=parallel)


# --------------------------------------------------------------------------
# Run reports and CSV serialization
# --------------------------------------------------------------------------

CSV_COLUMNS = ["method", "K", "m", "r", "sigma", "R", "iters",
               "obv_mean", "obv_std", "rmse", "bias_norm", "crlb_root",
               "time_seq_s", "time_par_s", "msgs_in_total", "msgs_out_total"]


@dataclass
class RunReport:
    """Aggregated results of one method on one instance over R realizations."""

    method: str
    K: int
    m: int
    r: float
    sigma: float
    realizations: int
    iters: int
    obv_mean: float
    obv_std: float
    rmse: float | None
    bias_norm: float | None
    crlb_root: float | None          # None encodes the 'n/a' downgrade
    time_seq_s: float = 0.0
    time_par_s: float | None = None
    messages: MessageLedger | None = None
    per_iteration: dict[str, np.ndarray] = field(default_factory=dict)
    per_realization_err: list[float] = field(default_factory=list)

    def csv_row(self) -> list[str]:
        def num(v, fmt="%.17g"):
            return "" if v is None else (fmt % v)

        ledger = self.messages
        msgs_in = msgs_out = ""
        if ledger is not None and ledger.in_counts is not None:
            msgs_in = str(ledger.total_in * self.iters)
            msgs_out = str(ledger.total_out * self.iters)
        crlb = "n/a" if self.crlb_root is None else ("%.17g" % self.crlb_root)
        return [self.method, str(self.K), str(self.m), num(self.r),
                num(self.sigma), str(self.realizations), str(self.iters),
                num(self.obv_mean), num(self.obv_std), num(self.rmse),
                num(self.bias_norm), crlb,
                "%.6f" % self.time_seq_s,
                "" if self.time_par_s is None else "%.6f" % self.time_par_s,
                msgs_in, msgs_out]


def write_aggregate_csv(reports, path) -> None:
    """One row per method aggregate, fixed column schema."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rep in reports:
            writer.writerow(rep.csv_row())


def write_plotdata_csv(reports, path, crlb: float | None = None) -> None:
    """Long-format per-iteration curves: method, iteration, rmse, obv.

    Appends a single horizontal-reference row carrying the root CRLB when
    curves exist and the bound is available.
    """
    rows = 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "iteration", "rmse", "obv"])
        for rep in reports:
            curves = rep.per_iteration
            if not curves:
                continue
            obv = curves.get("obv")
            rms = curves.get("rmse")
            length = len(obv) if obv is not None else len(rms)
            for k in range(length):
                writer.writerow([
                    rep.method, str(k + 1),
                    "" if rms is None else "%.17g" % rms[k],
                    "" if obv is None else "%.17g" % obv[k]])
                rows += 1
        if rows and crlb is not None:
            writer.writerow(["sqrt_crlb", "", "%.17g" % crlb, ""])
