"""Partitions of the non-anchor sensors into disjoint update clusters.

Two constructions plus the two degenerate partitions:

* geographical: LEACH-like; q heads drawn uniformly without replacement,
  every sensor joins the head at minimal hop distance in the sensor-only
  graph, ties broken by the smallest measured-distance sum along a
  minimum-hop path, then by lowest head id.
* colored: greedy sequential coloring of the sensor-sensor graph (visit
  order descending degree, ties by index); color classes are independent
  sets, so all sensors of one class update in parallel safely.

Anchors never belong to clusters; only sensor positions are optimized.
Clusters are listed in their fixed processing order (ascending head id for
geographical, ascending color id for colored).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnreachableError
from .network import Network

__all__ = ["Clustering", "geographical_clusters", "colored_clusters",
           "singleton_clusters", "whole_cluster"]


@dataclass(frozen=True)
class Clustering:
    """A partition of sensors ``0..N-1`` into disjoint clusters.

    ``clusters`` is in processing order; a sweep updates the clusters in
    list order with Gauss-Seidel semantics.  ``kind`` is one of ``whole``,
    ``singleton``, ``geographical``, ``colored``; for ``colored`` no
    sensor-sensor edge joins two members of the same cluster.
    """

    clusters: tuple[np.ndarray, ...]
    kind: str
    num_sensors: int
    heads: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("whole", "singleton", "geographical", "colored"):
            raise ValueError(f"unknown clustering kind {self.kind!r}")
        cover = np.concatenate([np.asarray(c) for c in self.clusters]) \
            if self.clusters else np.array([], dtype=np.int64)
        if len(cover) != self.num_sensors or \
                not np.array_equal(np.sort(cover), np.arange(self.num_sensors)):
            raise ValueError("clusters must partition the sensor set")
        if any(len(c) == 0 for c in self.clusters):
            raise ValueError("empty cluster")
        if (self.q == 1) != (self.kind == "whole"):
            raise ValueError("q == 1 exactly for kind 'whole'")
        if self.kind == "singleton" and self.q != self.num_sensors:
            raise ValueError("singleton clustering needs q == N")

    @property
    def q(self) -> int:
        return len(self.clusters)

    def labels(self) -> np.ndarray:
        """Cluster id per sensor, (N,)."""
        lab = np.empty(self.num_sensors, dtype=np.int64)
        for cid, members in enumerate(self.clusters):
            lab[members] = cid
        return lab


def whole_cluster(net: Network) -> Clustering:
    """The single-cluster partition (fully centralized updates)."""
    members = np.arange(net.num_sensors)
    members.setflags(write=False)
    return Clustering((members,), "whole", net.num_sensors)


def singleton_clusters(net: Network) -> Clustering:
    """One cluster per sensor, ascending id (fully distributed updates)."""
    cl = tuple(np.array([i]) for i in range(net.num_sensors))
    return Clustering(cl, "singleton", net.num_sensors)


def _hop_and_pathdist(net: Network, source: int) -> tuple[np.ndarray, np.ndarray]:
    """BFS hop counts from a sensor plus the minimal measured-distance sum
    over minimum-hop paths, both over the sensor-only graph."""
    N = net.num_sensors
    adj = net.adjacency
    hops = np.full(N, -1, dtype=np.int64)
    pdist = np.full(N, np.inf)
    hops[source] = 0
    pdist[source] = 0.0
    frontier = [source]
    level = 0
    while frontier:
        nxt = []
        for v in frontier:
            base = pdist[v]
            for w, e in zip(adj.nbr_sensors[v], adj.nbr_edges[v]):
                d = base + net.dist[e]
                if hops[w] == -1:
                    hops[w] = level + 1
                    pdist[w] = d
                    nxt.append(int(w))
                elif hops[w] == level + 1 and d < pdist[w]:
                    pdist[w] = d
        frontier = nxt
        level += 1
    return hops, pdist


def geographical_clusters(net: Network, q: int, seed) -> Clustering:
    """LEACH-like partition around q randomly drawn cluster heads.

    The degenerate counts collapse to the canonical kinds: q == 1 gives the
    whole-set partition and q == N the singleton partition, independent of
    the seed.

    Raises
    ------
    UnreachableError
        When some sensor cannot reach any head through sensor-sensor edges
        (the sensor-only graph may be disconnected even when the full network
        is connected); the caller reseeds.
    """
    N = net.num_sensors
    if not (1 <= q <= N):
        raise ValueError("need 1 <= q <= N")
    if q == 1:
        return whole_cluster(net)
    if q == N:
        return singleton_clusters(net)

    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    rng = np.random.Generator(np.random.PCG64(seq))
    heads = np.sort(rng.choice(N, size=q, replace=False))

    # Assignment key per sensor: (hops, path distance, head id), minimized.
    best_head = np.full(N, -1, dtype=np.int64)
    best_hops = np.full(N, np.iinfo(np.int64).max)
    best_dist = np.full(N, np.inf)
    for h in heads:
        hops, pdist = _hop_and_pathdist(net, int(h))
        reached = hops >= 0
        better = reached & (
            (hops < best_hops)
            | ((hops == best_hops) & (pdist < best_dist - 1e-15)))
        best_head[better] = h
        best_hops[better] = hops[better]
        best_dist[better] = pdist[better]
    if np.any(best_head < 0):
        missing = np.flatnonzero(best_head < 0)[:5].tolist()
        raise UnreachableError(
            f"sensors {missing} cannot reach any cluster head; "
            "reseed the head draw")

    clusters = tuple(np.flatnonzero(best_head == h) for h in heads)
    return Clustering(clusters, "geographical", N, heads=tuple(int(h) for h in heads))


def colored_clusters(net: Network) -> Clustering:
    """Greedy coloring of the sensor-sensor graph; classes become clusters.

    Sensors are visited in descending degree order (ties by index) and take
    the smallest color absent among already-colored neighbors, so at most
    max-degree + 1 colors appear.  Every class is an independent set: all of
    its members can update concurrently without data dependence.
    """
    N = net.num_sensors
    adj = net.adjacency
    order = np.lexsort((np.arange(N), -adj.e1_degrees))
    color = np.full(N, -1, dtype=np.int64)
    for v in order:
        taken = {int(color[w]) for w in adj.nbr_sensors[v] if color[w] >= 0}
        c = 0
        while c in taken:
            c += 1
        color[v] = c
    ncolors = int(color.max()) + 1
    clusters = tuple(np.flatnonzero(color == c) for c in range(ncolors))
    if ncolors == 1:
        return Clustering(clusters, "whole", N)
    kind = "colored" if ncolors < N else "singleton"
    return Clustering(clusters, kind, N)


def is_independent(clustering: Clustering, net: Network) -> bool:
    """No sensor-sensor edge inside any cluster."""
    lab = clustering.labels()
    e1 = net.edges_e1
    if not len(e1):
        return True
    return bool(np.all(lab[e1[:, 0]] != lab[e1[:, 1]]))
