"""Shared helpers: small brute-force instance factory independent of the
package's own generator."""

import numpy as np
import pytest

from amloc import ConnectivityError, Network


def brute_force_net(seed, K=12, m=3, r=0.6, sigma=0.0, dim=2, box=1.0,
                    max_tries=200):
    """Random connected instance built by exhaustive pair enumeration.

    Sensors occupy ids 0..N-1, anchors N..K-1; every pair within r becomes
    an edge except anchor-anchor pairs.  Measured distances are truth plus
    optional Gaussian noise, resampled positive.
    """
    rng = np.random.default_rng(seed)
    N = K - m
    for _ in range(max_tries):
        pts = rng.uniform(0.0, box, (K, dim))
        e1, d1, e2, d2 = [], [], [], []
        for i in range(K):
            for j in range(i + 1, K):
                if i >= N and j >= N:
                    continue
                dist = float(np.linalg.norm(pts[i] - pts[j]))
                if dist <= r:
                    if j < N:
                        e1.append((i, j)); d1.append(dist)
                    else:
                        e2.append((i, j)); d2.append(dist)
        d = np.array(d1 + d2)
        if sigma > 0:
            true = d.copy()
            d = true + rng.normal(0.0, sigma, size=len(d))
            while np.any(d <= 0):
                bad = d <= 0
                d[bad] = true[bad] + rng.normal(0.0, sigma, int(bad.sum()))
        try:
            return Network(dim, N, pts[N:], e1, e2, d, r,
                           sensors_truth=pts[:N], sigma=sigma)
        except ConnectivityError:
            continue
    raise RuntimeError("no connected draw; loosen parameters")


@pytest.fixture
def small_net():
    return brute_force_net(seed=7, K=12, m=3, r=0.7)


@pytest.fixture
def noisy_net():
    return brute_force_net(seed=3, K=14, m=3, r=0.7, sigma=0.02)
