"""HyperCL: degree-proportional resampling at the observed hyperedge sizes."""
from __future__ import annotations

import numpy as np

from .hgraph import AttributedHypergraph, degree_vector
from .partition import as_rng


def hypercl_generate(H: AttributedHypergraph, rng=None) -> AttributedHypergraph:
    """Chung-Lu style hypergraph with the same size sequence as ``H``.

    For every observed hyperedge, ``|e|`` distinct nodes are drawn with
    probability proportional to degree, without replacement. When ``|e|``
    exceeds the number of nodes with positive degree, that hyperedge is drawn
    uniformly from all nodes instead. Node ids and attributes carry over.
    """
    rng = as_rng(rng)
    deg = degree_vector(H).astype(float)
    n = H.node_count
    active = int(np.count_nonzero(deg))
    p = deg / deg.sum()
    edges = []
    for e in H.hyperedges:
        size = len(e)
        if size <= active:
            picked = rng.choice(n, size=size, replace=False, p=p)
        else:
            picked = rng.choice(n, size=size, replace=False)
        edges.append(tuple(sorted(int(v) for v in picked)))
    return AttributedHypergraph(n, tuple(edges), H.attributes)
