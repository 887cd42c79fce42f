"""Synthetic stand-ins for benchmark data and small planted instances."""
from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .generator import NoahParams, generate
from .hgraph import AttributedHypergraph, load_hypergraph
from .partition import CoreFringePartition, as_rng

WORKSPACE_ENV = "NOAH_WORKSPACE_DIR"
# department head-counts for a 92-person office, one-hot encoded as k = 5
_DEPARTMENTS = (15, 26, 34, 4, 13)
_SIZE_PROBS = {2: 0.68, 3: 0.21, 4: 0.08, 5: 0.03}


def find_workspace(directory=None):
    """Locate ``hyperedges.txt`` / ``node-attributes.txt`` of the Workspace data.

    Searches ``directory`` or ``$NOAH_WORKSPACE_DIR``. Returns ``None`` when
    the files are not available locally.
    """
    directory = directory or os.environ.get(WORKSPACE_ENV)
    if not directory:
        return None
    d = Path(directory)
    edges, attrs = d / "hyperedges.txt", d / "node-attributes.txt"
    if edges.is_file() and attrs.is_file():
        return load_hypergraph(edges, attrs)
    return None


def workspace_like(rng=None, num_edges=788, within_department=0.85) -> AttributedHypergraph:
    """Office contact hypergraph shaped like Workspace (|V|=92, |E|=788, k=5).

    Each contact group has a host drawn by heterogeneous activity; the other
    members come from the host's department with probability
    ``within_department`` and from anywhere otherwise, also activity-weighted.
    This is a department-block Chung-Lu process, not a NoAH sample.
    """
    rng = as_rng(rng)
    dept = np.repeat(np.arange(len(_DEPARTMENTS)), _DEPARTMENTS)
    n = dept.size
    X = np.eye(len(_DEPARTMENTS), dtype=np.int8)[dept]
    activity = rng.lognormal(0.0, 1.0, size=n)
    sizes = np.array(list(_SIZE_PROBS))
    size_p = np.array(list(_SIZE_PROBS.values()))
    edges = []
    while len(edges) < num_edges:
        size = int(rng.choice(sizes, p=size_p))
        host = int(rng.choice(n, p=activity / activity.sum()))
        members = {host}
        while len(members) < size:
            pool = np.flatnonzero(dept == dept[host]) if rng.random() < within_department else np.arange(n)
            w = activity[pool]
            v = int(rng.choice(pool, p=w / w.sum()))
            members.add(v)
            if len(members) < size and all(u in members for u in pool):
                break
        edges.append(tuple(sorted(members)))
    return AttributedHypergraph(n, tuple(edges), X)


def zipf_probs(n, exponent=1.0) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1) ** exponent
    return w / w.sum()


def planted_instance(n_core=30, n_fringe=70, k=2, m=2000, rng=None):
    """Homophilous planted NoAH instance.

    Affinities are ``0.6 ** (1/k)`` on the diagonal and ``0.1 ** (1/k)`` off
    it for both tables; ``p_seed`` is Zipf over the core; attributes are
    i.i.d. fair coins. Returns ``(H, partition, params)``.
    """
    rng = as_rng(rng)
    n = n_core + n_fringe
    X = (rng.random((n, k)) < 0.5).astype(np.int8)
    theta = np.empty((k, 2, 2))
    theta[:, 0, 0] = theta[:, 1, 1] = 0.6 ** (1.0 / k)
    theta[:, 0, 1] = theta[:, 1, 0] = 0.1 ** (1.0 / k)
    params = NoahParams(zipf_probs(n_core), theta, theta.copy())
    partition = CoreFringePartition(frozenset(range(n_core)), frozenset(range(n_core, n)))
    H = generate(params, partition, X, m, rng)
    return H, partition, params


def duplicate_edges(H: AttributedHypergraph, factor: int) -> AttributedHypergraph:
    return H.with_edges(H.hyperedges * factor)


def duplicate_attributes(H: AttributedHypergraph, factor: int) -> AttributedHypergraph:
    return AttributedHypergraph(H.node_count, H.hyperedges, np.tile(H.attributes, (1, factor)))
