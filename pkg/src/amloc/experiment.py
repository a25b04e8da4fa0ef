"""Experiment matrices: method x realization runs with seeded reproducibility.

Protocol per realization: resample the measurement noise, draw one shared
starting point uniform in (-h, h) per coordinate (identical for every
compared method), zero initial auxiliaries, and run each method for the same
total number of location-update rounds, warm-start rounds included.  All
randomness derives from the single master seed through named sub-streams, so
a config plus seed pins every output byte except the two wall-clock timing
columns of the aggregate CSV.
"""

from __future__ import annotations

import configparser
import re
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import generate as gen
from .clustering import Clustering, colored_clusters, geographical_clusters, \
    singleton_clusters, whole_cluster
from .errors import AmlocError, SingularFIMError, UnreachableError
from .instance_io import read_instance, write_instance
from .matrices import build_matrices
from .metrics import (MessageLedger, RunReport, bias_estimate, crlb_root,
                      message_accounting, rmse, write_aggregate_csv,
                      write_plotdata_csv)
from .network import Network
from .solver import SolverConfig, run

__all__ = ["MethodSpec", "parse_method", "ExperimentConfig", "run_experiment",
           "emit_plotdata", "load_config"]

_METHOD_RE = re.compile(
    r"^am-(fc|fd|cc|u-(\d+))(?:-ag(\d+))?$", re.IGNORECASE)


@dataclass(frozen=True)
class MethodSpec:
    """One solver variant: base kind, cluster count for am-u, warm-start rounds."""

    name: str
    base: str            # am-fc | am-fd | am-cc | am-u
    q: int | None = None
    ag_iters: int = 0

    def clustering(self, net: Network, master_seed: int) -> Clustering:
        if self.base == "am-fc":
            return whole_cluster(net)
        if self.base == "am-fd":
            return singleton_clusters(net)
        if self.base == "am-cc":
            return colored_clusters(net)
        # am-u: geographical clusters, reseeding on unreachable sensors
        for attempt in range(32):
            try:
                return geographical_clusters(
                    net, self.q, gen.cluster_seed(master_seed, self.q, attempt))
            except UnreachableError:
                continue
        raise UnreachableError(
            f"no reachable head assignment for q={self.q} in 32 attempts")

    def ledger(self, net: Network, clustering: Clustering, mats) -> MessageLedger:
        if self.base == "am-fc":
            return message_accounting("am-fc", None, net, mats)
        if clustering.kind == "colored":
            return message_accounting("am-cc", clustering, net)
        return message_accounting("am-fd", None, net)


def parse_method(text: str) -> MethodSpec:
    """Parse a method name like ``am-fc``, ``am-cc-ag100`` or ``am-u-10``."""
    cleaned = text.strip().lower()
    match = _METHOD_RE.match(cleaned)
    if not match:
        raise ValueError(
            f"cannot parse method {text!r}; expected am-fc, am-fd, am-cc or "
            "am-u-<q>, optionally suffixed -ag<iters>")
    kind, q, ag = match.groups()
    base = "am-u" if kind.startswith("u-") else f"am-{kind}"
    return MethodSpec(name=cleaned, base=base,
                      q=int(q) if q else None,
                      ag_iters=int(ag) if ag else 0)


@dataclass
class ExperimentConfig:
    """Instance source, method list and run parameters of one experiment."""

    methods: list[MethodSpec]
    preset: str | None = None
    instance_path: str | None = None
    genspec: gen.GenSpec | None = None
    realizations: int = 50
    max_iters: int = 1000
    x0_halfwidth: float = 0.01
    seed: int = 0
    record_curves: bool = True

    def __post_init__(self):
        if not self.methods:
            raise ValueError("need at least one method")
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        sources = [s is not None for s in
                   (self.preset, self.instance_path, self.genspec)]
        if sum(sources) != 1:
            raise ValueError("exactly one instance source must be given")


def load_config(path, seed: int) -> ExperimentConfig:
    """Read a declarative key = value config file.

    Sections: ``[instance]`` with either ``preset``, ``path`` or inline
    ``K/m/r/sigma`` keys; ``[methods]`` with ``names`` (comma separated);
    ``[run]`` with ``realizations``, ``iterations``, ``x0_halfwidth``,
    ``record_curves``.  Defaults follow the published protocol: halfwidth
    0.01, 1000 iterations, 50 realizations.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    read = parser.read(path)
    if not read:
        raise AmlocError(f"config file not found: {path}")
    if not parser.has_section("instance") or not parser.has_section("methods"):
        raise AmlocError("config needs [instance] and [methods] sections")

    inst = parser["instance"]
    preset_name = inst.get("preset", fallback=None)
    path_val = inst.get("path", fallback=None)
    genspec = None
    if preset_name is None and path_val is None:
        try:
            genspec = gen.GenSpec(
                K=inst.getint("k"), m=inst.getint("m"),
                r=inst.getfloat("r"), sigma=inst.getfloat("sigma"),
                dim=inst.getint("dim", fallback=2), seed=seed)
        except (TypeError, ValueError, configparser.NoOptionError) as exc:
            raise AmlocError(f"bad inline instance spec: {exc}") from exc

    names = parser["methods"].get("names", fallback="")
    methods = [parse_method(tok) for tok in names.split(",") if tok.strip()]

    runsec = parser["run"] if parser.has_section("run") else {}
    getv = (lambda key, conv, default:
            conv(runsec.get(key)) if isinstance(runsec, configparser.SectionProxy)
            and runsec.get(key) is not None else default)
    return ExperimentConfig(
        methods=methods, preset=preset_name, instance_path=path_val,
        genspec=genspec,
        realizations=getv("realizations", int, 50),
        max_iters=getv("iterations", int, 1000),
        x0_halfwidth=getv("x0_halfwidth", float, 0.01),
        seed=seed,
        record_curves=getv("record_curves", lambda s: s.lower() == "true", True))


def _resolve_instance(config: ExperimentConfig) -> tuple[Network, gen.GenSpec | None]:
    if config.instance_path is not None:
        return read_instance(config.instance_path), None
    if config.preset is not None:
        spec = gen.preset(config.preset, seed=config.seed,
                          realization_count=config.realizations)
    else:
        spec = config.genspec
    net, _ = gen.generate_connected(spec)
    return net, spec


def run_experiment(config: ExperimentConfig, outdir) -> list[RunReport]:
    """Execute the full method x realization matrix and write reports.

    Writes ``aggregate.csv`` (one row per method), ``curves.csv``
    (per-iteration long format plus the root-CRLB reference), the generated
    instance, and one clustering file per clustered method.  A singular
    Fisher information downgrades the CRLB column to ``n/a`` without failing
    the run.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    net, spec = _resolve_instance(config)
    sigma = spec.sigma if spec is not None else net.sigma
    write_instance(net, outdir / "instance.txt")

    base_mats = build_matrices(net)
    crlb = None
    if net.sensors_truth is not None and sigma > 0:
        try:
            crlb = crlb_root(net, sigma)
        except SingularFIMError:
            crlb = None

    prepared = []
    for m in config.methods:
        clustering = m.clustering(net, config.seed)
        if clustering.kind in ("geographical", "colored"):
            write_instance(net, outdir / f"clustering_{m.name}.txt",
                           clustering=clustering)
        prepared.append((m, clustering))

    R = config.realizations
    N, n = net.num_sensors, net.dim
    results = {m.name: {"finals": [], "obv": [], "err": [], "time": 0.0,
                        "curves_err": [], "curves_obv": []}
               for m, _ in prepared}

    for l in range(R):
        if net.sensors_truth is not None:
            real_net = gen.sample_noise(
                net, sigma, gen.noise_seed(config.seed, l)).net
        else:
            real_net = net      # file instance without truth: fixed distances
        mats = build_matrices(real_net, factor=base_mats.factor)
        rng = gen.stream(config.seed, 2, l)
        h = config.x0_halfwidth
        x0 = rng.uniform(-h, h, size=(N, n))
        for m, clustering in prepared:
            solver_config = SolverConfig(
                clustering=clustering, max_iters=config.max_iters,
                ag_warmstart_iters=m.ag_iters,
                record_history=config.record_curves)
            start = time.perf_counter()
            state, trace = run(real_net, solver_config, x0=x0, mats=mats)
            elapsed = time.perf_counter() - start
            bucket = results[m.name]
            bucket["time"] += elapsed
            bucket["finals"].append(state.x.copy())
            bucket["obv"].append(trace.obv[-1] if trace.obv
                                 else _final_obv(real_net, state.x))
            if net.sensors_truth is not None:
                err = float(np.sum((state.x - net.sensors_truth) ** 2))
                bucket["err"].append(err)
            if config.record_curves:
                bucket["curves_obv"].append(np.asarray(trace.obv))
                if trace.err_sq:
                    bucket["curves_err"].append(np.asarray(trace.err_sq))

    reports = []
    for m, clustering in prepared:
        bucket = results[m.name]
        obv = np.asarray(bucket["obv"])
        have_truth = net.sensors_truth is not None
        ledger = m.ledger(net, clustering, base_mats)
        per_iteration = {}
        if config.record_curves and bucket["curves_obv"]:
            per_iteration["obv"] = np.mean(bucket["curves_obv"], axis=0)
            if bucket["curves_err"]:
                per_iteration["rmse"] = np.sqrt(
                    np.sum(bucket["curves_err"], axis=0) / R)
        time_seq = bucket["time"] / R
        time_par = None
        if ledger.parallel_cost is not None and ledger.sequential_cost > 0:
            scale = ledger.parallel_cost / (
                ledger.parallel_cost + sum(ledger.ops_per_sensor))
            time_par = time_seq * scale
        reports.append(RunReport(
            method=m.name, K=N + net.num_anchors, m=net.num_anchors,
            r=net.radius, sigma=sigma, realizations=R, iters=config.max_iters,
            obv_mean=float(obv.mean()),
            obv_std=float(obv.std(ddof=1)) if R > 1 else 0.0,
            rmse=rmse(bucket["finals"], net.sensors_truth) if have_truth else None,
            bias_norm=bias_estimate(bucket["finals"], net.sensors_truth)[1]
            if have_truth else None,
            crlb_root=crlb,
            time_seq_s=time_seq, time_par_s=time_par,
            messages=ledger, per_iteration=per_iteration,
            per_realization_err=[float(np.sqrt(e)) for e in bucket["err"]]))

    write_aggregate_csv(reports, outdir / "aggregate.csv")
    emit_plotdata(reports, outdir / "curves.csv", crlb=crlb)
    return reports


def _final_obv(net: Network, x: np.ndarray) -> float:
    from .solver import localization_objective
    return localization_objective(net, x)


def emit_plotdata(reports, path, crlb: float | None = None) -> None:
    """Write the per-iteration long-format CSV for plotting."""
    if crlb is None:
        for rep in reports:
            if rep.crlb_root is not None:
                crlb = rep.crlb_root
                break
    write_plotdata_csv(reports, path, crlb=crlb)
