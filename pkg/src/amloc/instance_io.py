"""Plain-text instance files.

Sections, whitespace-separated, ``#`` starts a comment, UTF-8:

    [meta]      one row: n K m r sigma
    [anchors]   id x y ...   (global ids N..K-1)
    [sensors]   id x y ...   (ground truth, optional)
    [edges]     i j d_ij     (i < j for sensor pairs, sensor first otherwise)
    [clusters]  sensor_id cluster_id   (optional)

Floats are printed with 17 significant digits for a lossless round trip.
Explicit edge lists keep externally truncated edge sets loadable.
"""

from __future__ import annotations

import numpy as np

from .clustering import Clustering, is_independent
from .errors import ParseError
from .network import Network

__all__ = ["read_instance", "write_instance", "read_clustering"]

_SECTIONS = ("meta", "anchors", "sensors", "edges", "clusters")


def _fmt(x: float) -> str:
    return "%.17g" % x


def write_instance(net: Network, path, clustering: Clustering | None = None) -> None:
    """Write a network (and optionally a clustering) to an instance file."""
    N, m = net.num_sensors, net.num_anchors
    lines = ["# localization instance",
             "[meta]",
             f"{net.dim} {N + m} {m} {_fmt(net.radius)} {_fmt(net.sigma)}",
             "[anchors]"]
    for j, pos in enumerate(net.anchors):
        lines.append(f"{N + j} " + " ".join(_fmt(c) for c in pos))
    if net.sensors_truth is not None:
        lines.append("[sensors]")
        for i, pos in enumerate(net.sensors_truth):
            lines.append(f"{i} " + " ".join(_fmt(c) for c in pos))
    lines.append("[edges]")
    for k, (i, j) in enumerate(net.edges_e1):
        lines.append(f"{i} {j} {_fmt(net.dist[k])}")
    off = len(net.edges_e1)
    for k, (i, j) in enumerate(net.edges_e2):
        lines.append(f"{i} {j} {_fmt(net.dist[off + k])}")
    if clustering is not None:
        lines.append(f"# kind: {clustering.kind}")
        lines.append("[clusters]")
        for i, cid in enumerate(clustering.labels()):
            lines.append(f"{i} {cid}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _tokenized_lines(path):
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield lineno, line


def _parse_sections(path) -> dict[str, list[tuple[int, list[str]]]]:
    sections: dict[str, list[tuple[int, list[str]]]] = {}
    current = None
    for lineno, line in _tokenized_lines(path):
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            if name not in _SECTIONS:
                raise ParseError(f"{path}:{lineno}: unknown section [{name}]")
            current = sections.setdefault(name, [])
            continue
        if current is None:
            raise ParseError(f"{path}:{lineno}: data before any section header")
        current.append((lineno, line.split()))
    return sections


def _numbers(path, lineno, fields, types):
    if len(fields) != len(types):
        raise ParseError(f"{path}:{lineno}: expected {len(types)} fields, "
                         f"got {len(fields)}")
    out = []
    for field, typ in zip(fields, types):
        try:
            out.append(typ(field))
        except ValueError:
            raise ParseError(f"{path}:{lineno}: bad value {field!r}") from None
    return out


def read_instance(path) -> Network:
    """Parse an instance file into a Network.

    Raises
    ------
    ParseError
        With line/field diagnostics on any malformed content or a missing
        required section ([meta], [anchors], [edges]).
    """
    sections = _parse_sections(path)
    for required in ("meta", "anchors", "edges"):
        if required not in sections:
            raise ParseError(f"{path}: missing [{required}] section")
    meta_rows = sections["meta"]
    if len(meta_rows) != 1:
        raise ParseError(f"{path}: [meta] must hold exactly one row")
    lineno, fields = meta_rows[0]
    n, K, m, r, sigma = _numbers(path, lineno, fields,
                                 (int, int, int, float, float))
    N = K - m
    if N < 1 or m < 1:
        raise ParseError(f"{path}:{lineno}: need K > m >= 1")

    anchors = np.full((m, n), np.nan)
    for lineno, fields in sections["anchors"]:
        vals = _numbers(path, lineno, fields, (int,) + (float,) * n)
        j = vals[0]
        if not (N <= j < K):
            raise ParseError(f"{path}:{lineno}: anchor id {j} out of range "
                             f"[{N}, {K})")
        anchors[j - N] = vals[1:]
    if np.isnan(anchors).any():
        raise ParseError(f"{path}: [anchors] does not cover all {m} anchors")

    truth = None
    if "sensors" in sections:
        truth = np.full((N, n), np.nan)
        for lineno, fields in sections["sensors"]:
            vals = _numbers(path, lineno, fields, (int,) + (float,) * n)
            i = vals[0]
            if not (0 <= i < N):
                raise ParseError(f"{path}:{lineno}: sensor id {i} out of range")
            truth[i] = vals[1:]
        if np.isnan(truth).any():
            raise ParseError(f"{path}: [sensors] does not cover all {N} sensors")

    e1, e2, d1, d2 = [], [], [], []
    for lineno, fields in sections["edges"]:
        i, j, d = _numbers(path, lineno, fields, (int, int, float))
        if d <= 0:
            raise ParseError(f"{path}:{lineno}: nonpositive distance")
        lo, hi = min(i, j), max(i, j)
        if hi < N:
            e1.append((lo, hi)); d1.append(d)
        elif lo < N <= hi < K:
            e2.append((lo, hi)); d2.append(d)
        else:
            raise ParseError(f"{path}:{lineno}: edge ({i}, {j}) joins two "
                             "anchors or is out of range")
    try:
        return Network(n, N, anchors, np.array(e1, dtype=np.int64).reshape(-1, 2),
                       np.array(e2, dtype=np.int64).reshape(-1, 2),
                       np.array(d1 + d2), r, sensors_truth=truth, sigma=sigma)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def read_clustering(path, net: Network) -> Clustering:
    """Parse the [clusters] section of an instance file.

    The kind is recovered from the ``# kind:`` comment when present,
    otherwise inferred (whole/singleton by count, colored when every cluster
    is an independent set, geographical as the fallback).
    """
    kind_hint = None
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            stripped = raw.strip()
            if stripped.lower().startswith("# kind:"):
                kind_hint = stripped.split(":", 1)[1].strip().lower()
    sections = _parse_sections(path)
    if "clusters" not in sections:
        raise ParseError(f"{path}: missing [clusters] section")
    N = net.num_sensors
    labels = np.full(N, -1, dtype=np.int64)
    for lineno, fields in sections["clusters"]:
        i, cid = _numbers(path, lineno, fields, (int, int))
        if not (0 <= i < N):
            raise ParseError(f"{path}:{lineno}: sensor id {i} out of range")
        labels[i] = cid
    if (labels < 0).any():
        raise ParseError(f"{path}: [clusters] does not cover all sensors")
    ids = np.unique(labels)
    clusters = tuple(np.flatnonzero(labels == cid) for cid in ids)
    if kind_hint is None:
        if len(clusters) == 1:
            kind_hint = "whole"
        elif len(clusters) == N:
            kind_hint = "singleton"
        else:
            probe = Clustering(clusters, "geographical", N)
            kind_hint = "colored" if is_independent(probe, net) else "geographical"
    return Clustering(clusters, kind_hint, N)
