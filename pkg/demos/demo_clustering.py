"""The two clustering constructions and the update family they induce.

Geographical clusters gather hop-distance neighborhoods around random heads
(more clusters = more distributed); colored clusters are independent sets of
the sensor graph, so every member of a class can update in parallel.
"""

import amloc
from amloc import generate as gen

SEED = 11
spec = gen.GenSpec(K=150, m=8, r=0.22, sigma=0.004, seed=SEED)
net, _ = gen.generate_connected(spec)
print(net)

for q in (2, 5, 12):
    clustering = amloc.geographical_clusters(net, q, gen.cluster_seed(SEED, q))
    sizes = sorted((len(c) for c in clustering.clusters), reverse=True)
    print(f"geographical q={q:3d}: sizes {sizes}")

colored = amloc.colored_clusters(net)
sizes = sorted((len(c) for c in colored.clusters), reverse=True)
print(f"colored: {colored.q} classes, sizes {sizes}")
print("independent classes:",
      all(len(set(net.edges_e1[k]) & set(c.tolist())) < 2
          for c in colored.clusters for k in range(len(net.edges_e1))))

# The cluster count interpolates the method family: fewer clusters behave
# more like the centralized solve within the same round budget.
real = gen.sample_noise(net, spec.sigma, gen.noise_seed(SEED, 0)).net
mats = amloc.build_matrices(real)
x0 = gen.stream(SEED, 2, 0).uniform(-0.01, 0.01, size=(net.num_sensors, 2))
print(f"\n{'clusters':>8s} {'rmse after 300 rounds':>22s}")
for q in (net.num_sensors, 12, 5, 2, 1):
    if q == 1:
        clustering = amloc.whole_cluster(net)
    elif q == net.num_sensors:
        clustering = amloc.singleton_clusters(net)
    else:
        clustering = amloc.geographical_clusters(net, q, gen.cluster_seed(SEED, q))
    config = amloc.SolverConfig(clustering=clustering, max_iters=300,
                                record_history=False)
    state, _ = amloc.run(real, config, x0=x0, mats=mats)
    print(f"{q:8d} {amloc.rmse([state.x], net.sensors_truth):22.4f}")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 5))
    palette = plt.colormaps["tab20"]
    for cid, members in enumerate(colored.clusters):
        pts = net.sensors_truth[members]
        ax.scatter(pts[:, 0], pts[:, 1], s=12, color=palette(cid % 20),
                   label=f"class {cid}" if cid < 4 else None)
    ax.scatter(net.anchors[:, 0], net.anchors[:, 1], marker="*", s=120,
               color="black", label="anchors")
    ax.set_title(f"colored clustering: {colored.q} independent classes")
    ax.legend(loc="upper right", fontsize=7)
    fig.savefig("colored_clusters.png", dpi=120, bbox_inches="tight")
    print("\nwrote colored_clusters.png")
except ImportError:
    pass
