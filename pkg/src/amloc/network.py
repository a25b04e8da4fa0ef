"""Network data model and graph queries.

A network instance is immutable after construction: anchor positions, optional
ground-truth sensor positions, the two edge sets with one measured distance per
unordered pair, and the communication radius.  Index convention: the N unknown
sensors carry ids ``0..N-1`` and the m anchors carry global ids ``N..N+m-1``
(anchor ``j`` sits at ``anchors[j - N]``).
"""

from __future__ import annotations

from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import ConnectivityError

__all__ = ["Network", "EdgeOrdering", "connected", "components"]


def _as_edge_array(edges, name: str) -> np.ndarray:
    arr = np.array(edges, dtype=np.int64, copy=True)
    if arr.size == 0:
        return arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"{name} must be a sequence of (i, j) pairs")
    return arr


def _components_raw(num_sensors: int, num_anchors: int,
                    e1: np.ndarray, e2: np.ndarray) -> list[list[int]]:
    """Connected components of the union graph on V ∪ A, as sorted id lists."""
    total = num_sensors + num_anchors
    adj: list[list[int]] = [[] for _ in range(total)]
    for i, j in np.concatenate([e1, e2]) if (len(e1) or len(e2)) else []:
        adj[i].append(j)
        adj[j].append(i)
    seen = np.zeros(total, dtype=bool)
    comps = []
    for start in range(total):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = []
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


class EdgeOrdering:
    """Fixed bijection between edges and row indices.

    Sensor-sensor edges (lexicographic ``(i, j)``, ``i < j``) occupy indices
    ``0..|E1|-1``; sensor-anchor edges follow, lexicographic as well.
    """

    def __init__(self, edges_e1: np.ndarray, edges_e2: np.ndarray):
        self.e1 = edges_e1
        self.e2 = edges_e2
        self.num_e1 = len(edges_e1)
        self._index = {}
        for k, (i, j) in enumerate(edges_e1):
            self._index[(int(i), int(j))] = k
        for k, (i, j) in enumerate(edges_e2):
            self._index[(int(i), int(j))] = self.num_e1 + k

    def __len__(self) -> int:
        return self.num_e1 + len(self.e2)

    def edge(self, index: int) -> tuple[int, int]:
        if index < self.num_e1:
            i, j = self.e1[index]
        else:
            i, j = self.e2[index - self.num_e1]
        return int(i), int(j)

    def index_of(self, i: int, j: int) -> int:
        """Row index of the edge, accepting either endpoint order."""
        key = (i, j) if (i, j) in self._index else (j, i)
        return self._index[key]

    def __contains__(self, pair) -> bool:
        i, j = pair
        return (i, j) in self._index or (j, i) in self._index


class _Adjacency(NamedTuple):
    """Per-sensor neighbor structure cached on a Network."""

    nbr_sensors: list[np.ndarray]    # neighbor sensor ids of sensor i
    nbr_edges: list[np.ndarray]      # edge indices of those E1 edges
    nbr_signs: list[np.ndarray]      # +1 if i is the stored first endpoint
    anchor_edges: list[np.ndarray]   # edge indices of i's E2 edges
    anchor_sum: np.ndarray           # (N, n) sum of anchor neighbor positions
    degrees: np.ndarray              # (N,) total neighbor count M_i
    e1_degrees: np.ndarray           # (N,) sensor-sensor degree only


class Network:
    """Immutable localization problem instance.

    Parameters
    ----------
    dim : int
        Ambient dimension n (2 in all reported experiments).
    num_sensors : int
        Number N of sensors with unknown position.
    anchors : array_like, shape (m, dim)
        Known anchor positions; m >= 1 is required.
    edges_e1 : sequence of (i, j)
        Sensor-sensor edges, both endpoints in ``0..N-1``.
    edges_e2 : sequence of (i, j)
        Sensor-anchor edges, ``i < N <= j < N + m``.
    dist : array_like, shape (|E1| + |E2|,)
        Measured distance per edge, aligned with ``edges_e1`` then
        ``edges_e2`` as passed (re-sorted into canonical order internally).
    radius : float
        Communication radius used to build the instance (metadata).
    sensors_truth : array_like, shape (N, dim), optional
        Ground-truth sensor positions, needed for error metrics and noise
        resampling.
    sigma : float
        Noise standard deviation the distances were drawn with (metadata).
    validate : bool
        Verify connectivity of the union graph (rejecting disconnected
        inputs); disable only to inspect invalid instances.
    """

    def __init__(self, dim: int, num_sensors: int, anchors,
                 edges_e1, edges_e2, dist, radius: float,
                 sensors_truth=None, sigma: float = 0.0,
                 validate: bool = True):
        if dim < 1:
            raise ValueError("dim must be positive")
        if num_sensors < 1:
            raise ValueError("need at least one sensor")
        self.dim = int(dim)
        self.num_sensors = int(num_sensors)
        self.anchors = np.array(anchors, dtype=np.float64).reshape(-1, dim)
        if len(self.anchors) < 1:
            raise ValueError("need at least one anchor")
        self.num_anchors = len(self.anchors)
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)
        self.sigma = float(sigma)
        if sensors_truth is None:
            self.sensors_truth = None
        else:
            self.sensors_truth = np.array(sensors_truth, dtype=np.float64)
            if self.sensors_truth.shape != (num_sensors, dim):
                raise ValueError("sensors_truth has wrong shape")
            self.sensors_truth.setflags(write=False)

        e1 = _as_edge_array(edges_e1, "edges_e1")
        e2 = _as_edge_array(edges_e2, "edges_e2")
        d = np.asarray(dist, dtype=np.float64).ravel()
        if len(d) != len(e1) + len(e2):
            raise ValueError("dist length does not match edge count")

        # Normalize E1 orientation to i < j, then sort both sets
        # lexicographically so ordering is reproducible across runs.
        N, m = self.num_sensors, self.num_anchors
        if len(e1):
            flip = e1[:, 0] > e1[:, 1]
            e1[flip] = e1[flip][:, ::-1]
            if np.any(e1[:, 0] == e1[:, 1]):
                raise ValueError("self-loop in edges_e1")
            if e1.min() < 0 or e1.max() >= N:
                raise ValueError("edges_e1 index out of range")
            order1 = np.lexsort((e1[:, 1], e1[:, 0]))
            e1 = e1[order1]
            d1 = d[:len(e1)][order1]
        else:
            d1 = d[:0]
        if len(e2):
            if np.any(e2[:, 0] >= N) or np.any(e2[:, 0] < 0):
                raise ValueError("edges_e2 sensor index out of range")
            if np.any(e2[:, 1] < N) or np.any(e2[:, 1] >= N + m):
                raise ValueError("edges_e2 anchor index out of range")
            order2 = np.lexsort((e2[:, 1], e2[:, 0]))
            e2 = e2[order2]
            d2 = d[len(e1):][order2]
        else:
            d2 = d[:0]

        for arr, name in ((e1, "edges_e1"), (e2, "edges_e2")):
            if len(arr) and len(np.unique(arr, axis=0)) != len(arr):
                raise ValueError(f"duplicate edge in {name}")
        dd = np.concatenate([d1, d2])
        if np.any(dd <= 0):
            raise ValueError("all measured distances must be positive")

        self.edges_e1 = e1
        self.edges_e2 = e2
        self._dist = dd
        for arr in (self.edges_e1, self.edges_e2, self._dist, self.anchors):
            arr.setflags(write=False)

        if validate and not connected(self):
            raise ConnectivityError(
                "network graph is not connected; split it along components() "
                "and treat each part separately")

    # -- basic queries ----------------------------------------------------

    @property
    def num_edges(self) -> int:
        return len(self._dist)

    @property
    def dist(self) -> np.ndarray:
        """Measured distances in canonical edge order (E1 rows then E2)."""
        return self._dist

    @cached_property
    def ordering(self) -> EdgeOrdering:
        return EdgeOrdering(self.edges_e1, self.edges_e2)

    def distance(self, i: int, j: int) -> float:
        """Measured distance of edge {i, j} (either endpoint order)."""
        return float(self._dist[self.ordering.index_of(i, j)])

    def anchor_position(self, j: int) -> np.ndarray:
        """Position of the anchor with global id j (N <= j < N + m)."""
        return self.anchors[j - self.num_sensors]

    @cached_property
    def adjacency(self) -> _Adjacency:
        N, n = self.num_sensors, self.dim
        nbr_s: list[list[int]] = [[] for _ in range(N)]
        nbr_e: list[list[int]] = [[] for _ in range(N)]
        nbr_sign: list[list[int]] = [[] for _ in range(N)]
        anch_e: list[list[int]] = [[] for _ in range(N)]
        anchor_sum = np.zeros((N, n))
        for k, (i, j) in enumerate(self.edges_e1):
            nbr_s[i].append(j); nbr_e[i].append(k); nbr_sign[i].append(1)
            nbr_s[j].append(i); nbr_e[j].append(k); nbr_sign[j].append(-1)
        off = len(self.edges_e1)
        for k, (i, j) in enumerate(self.edges_e2):
            anch_e[i].append(off + k)
            anchor_sum[i] += self.anchor_position(j)
        e1_deg = np.array([len(x) for x in nbr_s], dtype=np.int64)
        deg = e1_deg + np.array([len(x) for x in anch_e], dtype=np.int64)
        return _Adjacency(
            [np.array(x, dtype=np.int64) for x in nbr_s],
            [np.array(x, dtype=np.int64) for x in nbr_e],
            [np.array(x, dtype=np.float64) for x in nbr_sign],
            [np.array(x, dtype=np.int64) for x in anch_e],
            anchor_sum, deg, e1_deg)

    @property
    def degrees(self) -> np.ndarray:
        """Total neighbor count M_i per sensor (sensors plus anchors)."""
        return self.adjacency.degrees

    @property
    def max_e1_degree(self) -> int:
        """Largest sensor-sensor degree over non-anchors."""
        deg = self.adjacency.e1_degrees
        return int(deg.max()) if len(deg) else 0

    def edge_differences(self, x: np.ndarray) -> np.ndarray:
        """Per-edge difference vectors at iterate x.

        Row l is ``x_i - x_j`` for a sensor-sensor edge and ``x_i - a_j`` for
        a sensor-anchor edge, in canonical edge order.  ``x`` has shape
        (N, dim).
        """
        e1, e2 = self.edges_e1, self.edges_e2
        out = np.empty((self.num_edges, self.dim))
        if len(e1):
            out[:len(e1)] = x[e1[:, 0]] - x[e1[:, 1]]
        if len(e2):
            out[len(e1):] = x[e2[:, 0]] - self.anchors[e2[:, 1] - self.num_sensors]
        return out

    def true_distances(self) -> np.ndarray:
        """Exact distances at the ground-truth configuration."""
        if self.sensors_truth is None:
            raise ValueError("network carries no ground truth")
        v = self.edge_differences(self.sensors_truth)
        return np.linalg.norm(v, axis=1)

    def with_distances(self, dist: np.ndarray, sigma: float | None = None) -> "Network":
        """Copy of this network with a new measured-distance vector.

        Topology, anchors and truth are shared; only the distances (and the
        recorded sigma) change.  Distances are interpreted in canonical edge
        order.
        """
        return Network(self.dim, self.num_sensors, self.anchors,
                       self.edges_e1, self.edges_e2, dist, self.radius,
                       sensors_truth=self.sensors_truth,
                       sigma=self.sigma if sigma is None else sigma,
                       validate=False)

    def __repr__(self) -> str:  # pragma: no cover - debug aid
        return (f"Network(n={self.dim}, N={self.num_sensors}, "
                f"m={self.num_anchors}, |E1|={len(self.edges_e1)}, "
                f"|E2|={len(self.edges_e2)}, r={self.radius})")


def connected(net: Network) -> bool:
    """True when the union graph over V ∪ A with E1 ∪ E2 is connected."""
    return len(components(net)) == 1


def components(net: Network) -> list[list[int]]:
    """Connected components of the union graph, as sorted global-id lists.

    Disconnected sub-networks can be solved separately as long as each one
    contains an anchor; this helper makes the split explicit rather than
    silent.
    """
    return _components_raw(net.num_sensors, net.num_anchors,
                           net.edges_e1, net.edges_e2)
