"""Command-line entry points: generate, cluster, solve, experiment."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import generate as gen
from .clustering import colored_clusters, geographical_clusters, \
    singleton_clusters, whole_cluster
from .errors import AmlocError
from .experiment import load_config, parse_method, run_experiment
from .instance_io import read_instance, write_instance
from .matrices import build_matrices
from .metrics import rmse
from .solver import SolverConfig, criticality_report, run

__all__ = ["main"]


def _cmd_generate(args) -> int:
    if args.preset:
        spec = gen.preset(args.preset, seed=args.seed)
    else:
        missing = [k for k in ("count", "anchors", "radius") if getattr(args, k) is None]
        if missing:
            raise AmlocError(f"--{missing[0]} required without --preset")
        spec = gen.GenSpec(K=args.count, m=args.anchors, r=args.radius,
                           sigma=args.sigma, box=tuple(args.box),
                           seed=args.seed, dim=args.dim)
    net, attempt = gen.generate_connected(spec)
    if not args.noiseless and spec.sigma > 0:
        net = gen.sample_noise(net, spec.sigma,
                               gen.noise_seed(spec.seed, args.realization)).net
    write_instance(net, args.out)
    print(f"wrote {args.out}: K={spec.K} m={spec.m} r={spec.r} "
          f"sigma={spec.sigma} |E|={net.num_edges} (attempt {attempt})")
    return 0


def _cmd_cluster(args) -> int:
    net = read_instance(args.instance)
    if args.kind == "colored":
        clustering = colored_clusters(net)
    elif args.kind == "geographical":
        if args.q is None:
            raise AmlocError("--q required for geographical clustering")
        clustering = geographical_clusters(
            net, args.q, gen.cluster_seed(args.seed, args.q))
    elif args.kind == "singleton":
        clustering = singleton_clusters(net)
    else:
        clustering = whole_cluster(net)
    write_instance(net, args.out, clustering=clustering)
    sizes = sorted((len(c) for c in clustering.clusters), reverse=True)
    print(f"wrote {args.out}: kind={clustering.kind} q={clustering.q} "
          f"sizes={sizes[:8]}{'...' if len(sizes) > 8 else ''}")
    return 0


def _cmd_solve(args) -> int:
    net = read_instance(args.instance)
    method = parse_method(args.method)
    clustering = method.clustering(net, args.seed)
    mats = build_matrices(net)
    rng = gen.stream(args.seed, 2, 0)
    x0 = rng.uniform(-args.x0_halfwidth, args.x0_halfwidth,
                     size=(net.num_sensors, net.dim))
    config = SolverConfig(clustering=clustering, max_iters=args.iters,
                          ag_warmstart_iters=method.ag_iters,
                          tolerance=args.tol)
    state, trace = run(net, config, x0=x0, mats=mats)
    report = criticality_report(net, state.x, state.u)
    obv = trace.obv[-1]
    print(f"method={method.name} iters={state.iters} obv={obv:.6e} "
          f"res_x={report.res_x:.3e} res_u={report.res_u:.3e}")
    if net.sensors_truth is not None:
        print(f"rmse={rmse([state.x], net.sensors_truth):.6e}")
    if args.out:
        header = " ".join(f"x{k}" for k in range(net.dim))
        np.savetxt(args.out, state.x, fmt="%.17g",
                   header=f"sensor estimates: {header}")
        print(f"wrote {args.out}")
    return 0


def _cmd_experiment(args) -> int:
    config = load_config(args.config, seed=args.seed)
    reports = run_experiment(config, args.out)
    for rep in reports:
        rmse_txt = "n/a" if rep.rmse is None else f"{rep.rmse:.4e}"
        print(f"{rep.method}: rmse={rmse_txt} obv={rep.obv_mean:.4e} "
              f"(std {rep.obv_std:.2e})")
    print(f"wrote {args.out}/aggregate.csv and {args.out}/curves.csv")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="amloc",
        description="Alternating-minimization localization experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="draw a random instance file")
    p.add_argument("--preset", help="named parameter preset, e.g. rand-1000")
    p.add_argument("--count", "-K", type=int, help="total node count")
    p.add_argument("--anchors", "-m", type=int, help="anchor count")
    p.add_argument("--radius", "-r", type=float, help="communication radius")
    p.add_argument("--sigma", type=float, default=0.0,
                   help="noise standard deviation")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--box", type=float, nargs=2, default=(-0.5, 0.5),
                   metavar=("LO", "HI"))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--realization", type=int, default=0,
                   help="noise realization index to store")
    p.add_argument("--noiseless", action="store_true",
                   help="store exact distances")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("cluster", help="partition an instance's sensors")
    p.add_argument("--instance", required=True)
    p.add_argument("--kind", required=True,
                   choices=["colored", "geographical", "singleton", "whole"])
    p.add_argument("--q", type=int, help="cluster count (geographical)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("solve", help="run one method on an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--method", required=True,
                   help="am-fc | am-fd | am-cc | am-u-<q>, optional -ag<k>")
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--tol", type=float, default=None,
                   help="early stop on location step norm")
    p.add_argument("--seed", type=int, default=0, help="starting-point seed")
    p.add_argument("--x0-halfwidth", type=float, default=0.01)
    p.add_argument("--out", help="write final sensor estimates")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("experiment", help="run a method x realization matrix")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, required=True, help="master seed")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AmlocError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
