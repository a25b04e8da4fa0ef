"""Centralized, fully distributed and colored-clustered solves side by side.

All three are the same alternating scheme with different location
partitions; they differ in per-iteration cost and in how far they get within
a fixed round budget, not in what they converge to eventually.
"""

import amloc
from amloc import generate as gen

SEED = 7
spec = gen.GenSpec(K=120, m=6, r=0.24, sigma=0.004, seed=SEED)
net, attempt = gen.generate_connected(spec)
real = gen.sample_noise(net, spec.sigma, gen.noise_seed(SEED, 0)).net
print(f"instance: {net} (draw attempt {attempt})")

mats = amloc.build_matrices(real)
x0 = gen.stream(SEED, 2, 0).uniform(-0.01, 0.01, size=(net.num_sensors, 2))

partitions = {
    "centralized (one cluster)": amloc.whole_cluster(net),
    "fully distributed (singletons)": amloc.singleton_clusters(net),
    "colored clusters": amloc.colored_clusters(net),
}

print(f"\n{'partition':34s} {'rounds':>6s} {'objective':>11s} "
      f"{'rmse':>8s} {'res_x':>9s}")
for label, clustering in partitions.items():
    config = amloc.SolverConfig(clustering=clustering, max_iters=500)
    state, trace = amloc.run(real, config, x0=x0, mats=mats)
    report = amloc.criticality_report(real, state.x, state.u)
    rmse = amloc.rmse([state.x], net.sensors_truth)
    print(f"{label:34s} {state.iters:6d} {trace.obv[-1]:11.4e} "
          f"{rmse:8.4f} {report.res_x:9.2e}")

print("\nObjective values never increase along a run; the centralized")
print("variant minimizes over all locations jointly each round and")
print("typically reaches a critical point in the fewest rounds.")
