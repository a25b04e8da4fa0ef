"""Random network generation and Gaussian range-noise sampling.

Reproducibility contract: all randomness flows through numpy's PCG64
generator seeded by ``numpy.random.SeedSequence``.  Streams are split
hierarchically off one master seed so each consumer is independent and
deterministic:

    spawn_key (0, attempt)   node placement (attempt counts reseeds after a
                             disconnected draw)
    spawn_key (1, l)         measurement noise of realization l
    spawn_key (2, l)         starting-point draw of realization l
    spawn_key (3, q)         cluster-head draw for q geographical clusters
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np
from scipy.spatial import cKDTree

from .errors import DisconnectedError, MissingTruthError
from .network import Network

__all__ = ["GenSpec", "Realization", "PRESETS", "preset", "generate_topology",
           "sample_noise", "iter_realizations", "stream", "noise_seed",
           "x0_seed", "topology_seed", "cluster_seed"]


@dataclass(frozen=True)
class GenSpec:
    """Generation parameters for one random network family.

    ``box`` is the common coordinate range per axis; nodes are placed
    uniformly in ``box^dim``.  The first ``m`` drawn points become anchors.
    """

    K: int
    m: int
    r: float
    sigma: float
    box: tuple[float, float] = (-0.5, 0.5)
    seed: int = 0
    realization_count: int = 1
    dim: int = 2

    def __post_init__(self):
        if not (1 <= self.m < self.K):
            raise ValueError("need 1 <= m < K")
        if self.r <= 0:
            raise ValueError("radius must be positive")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.realization_count < 1:
            raise ValueError("realization_count must be >= 1")


@dataclass(frozen=True)
class Realization:
    """One noisy-measurement draw on a fixed topology."""

    net: Network
    realization_index: int
    noise_seed: object


# (K, m, r, sigma) tuples of the published random-network experiments.
_PRESET_ROWS = {
    "rand-1000": (1000, 20, 0.061, 0.00427),
    "rand-2000": (2000, 40, 0.043, 0.00301),
    "rand-3000": (3000, 60, 0.035, 0.00245),
    "rand-5000": (5000, 100, 0.029, 0.00203),
    "rand-10000": (10000, 200, 0.025, 0.00172),
    "rand-985-m5": (985, 5, 0.061, 0.00427),
    "rand-990-m10": (990, 10, 0.061, 0.00427),
    "rand-1010-m30": (1010, 30, 0.061, 0.00427),
    "rand-1000-r049": (1000, 20, 0.049, 0.00340),
    "rand-1000-r057": (1000, 20, 0.057, 0.00398),
    "rand-1000-r067": (1000, 20, 0.067, 0.00466),
}

PRESETS = {name: GenSpec(K=K, m=m, r=r, sigma=s)
           for name, (K, m, r, s) in _PRESET_ROWS.items()}


def preset(name: str, seed: int = 0, realization_count: int = 1) -> GenSpec:
    """Named generation preset with the caller's seed attached."""
    try:
        base = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: "
                       f"{', '.join(sorted(PRESETS))}") from None
    return replace(base, seed=seed, realization_count=realization_count)


def stream(seed: int, *key: int) -> np.random.Generator:
    """PCG64 generator for the sub-stream ``key`` of a master seed."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def topology_seed(seed: int, attempt: int = 0):
    return np.random.SeedSequence(seed, spawn_key=(0, attempt))


def noise_seed(seed: int, realization: int):
    return np.random.SeedSequence(seed, spawn_key=(1, realization))


def x0_seed(seed: int, realization: int):
    return np.random.SeedSequence(seed, spawn_key=(2, realization))


def cluster_seed(seed: int, q: int, attempt: int = 0):
    return np.random.SeedSequence(seed, spawn_key=(3, q, attempt))


def generate_topology(spec: GenSpec, attempt: int = 0) -> Network:
    """Draw node positions and the radius graph for one topology.

    All K points are uniform in the box; the first m drawn points are the
    anchors.  Every pair within distance r forms an edge except anchor-anchor
    pairs, which carry no information and are discarded.  Stored distances
    are the exact ones (a zero-noise realization); apply ``sample_noise`` for
    measurements.

    Raises
    ------
    DisconnectedError
        When the drawn graph is disconnected; reseed (bump ``attempt``) or
        enlarge the radius.
    """
    rng = np.random.Generator(np.random.PCG64(topology_seed(spec.seed, attempt)))
    lo, hi = spec.box
    pts = rng.uniform(lo, hi, size=(spec.K, spec.dim))
    m = spec.m
    N = spec.K - m
    anchors = pts[:m]
    sensors = pts[m:]

    # Draw-order ids: anchors first. Re-index to sensors 0..N-1, anchors N..K-1.
    pairs = cKDTree(pts).query_pairs(spec.r, output_type="ndarray")
    both_anchor = (pairs[:, 0] < m) & (pairs[:, 1] < m)
    pairs = pairs[~both_anchor]

    def to_global(idx):
        return np.where(idx < m, idx + N, idx - m)

    g = to_global(pairs)
    is_e1 = (g[:, 0] < N) & (g[:, 1] < N)
    e1 = np.sort(g[is_e1], axis=1)
    e2 = g[~is_e1]
    swap = e2[:, 0] >= N
    e2[swap] = e2[swap][:, ::-1]

    coords = np.vstack([sensors, anchors])
    d1 = np.linalg.norm(coords[e1[:, 0]] - coords[e1[:, 1]], axis=1)
    d2 = np.linalg.norm(coords[e2[:, 0]] - coords[e2[:, 1]], axis=1)

    try:
        return Network(spec.dim, N, anchors, e1, e2,
                       np.concatenate([d1, d2]), spec.r,
                       sensors_truth=sensors, sigma=spec.sigma)
    except Exception as exc:
        from .errors import ConnectivityError
        if isinstance(exc, ConnectivityError):
            raise DisconnectedError(
                f"seed {spec.seed} attempt {attempt} gave a disconnected "
                f"graph at r={spec.r}; reseed or enlarge r") from exc
        raise


def generate_connected(spec: GenSpec, max_attempts: int = 64) -> tuple[Network, int]:
    """Retry ``generate_topology`` over attempts until connected.

    Returns the network and the attempt index that produced it, so the draw
    stays reproducible from (seed, attempt).
    """
    for attempt in range(max_attempts):
        try:
            return generate_topology(spec, attempt=attempt), attempt
        except DisconnectedError:
            continue
    raise DisconnectedError(
        f"no connected draw in {max_attempts} attempts; enlarge r")


def sample_noise(net: Network, sigma: float, seed) -> Realization:
    """Additive Gaussian range noise, resampling nonpositive draws.

    Each measured distance is the true distance plus an independent
    N(0, sigma^2) perturbation.  Draws that land at or below zero are
    resampled from the same stream (clamping would bias the noise and the
    u-update normalization needs strictly positive distances).  Deterministic
    given the seed.
    """
    if net.sensors_truth is None:
        raise MissingTruthError("noise sampling needs ground-truth positions")
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    rng = np.random.Generator(np.random.PCG64(seq))
    true = net.true_distances()
    d = true + rng.normal(0.0, sigma, size=len(true)) if sigma > 0 else true.copy()
    while True:
        bad = d <= 0
        if not bad.any():
            break
        d[bad] = true[bad] + rng.normal(0.0, sigma, size=int(bad.sum()))
    idx = getattr(seq, "spawn_key", None)
    index = idx[-1] if idx else -1
    return Realization(net=net.with_distances(d, sigma=sigma),
                       realization_index=int(index), noise_seed=seq)


def iter_realizations(spec: GenSpec, net: Network) -> Iterator[Realization]:
    """The spec's R noise realizations on a fixed topology, in index order."""
    for l in range(spec.realization_count):
        r = sample_noise(net, spec.sigma, noise_seed(spec.seed, l))
        yield Realization(net=r.net, realization_index=l, noise_seed=r.noise_seed)
