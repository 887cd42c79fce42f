"""Core/fringe split via a union of randomized minimal hitting sets."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hgraph import AttributedHypergraph

DEFAULT_ROUNDS = 10


def as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True)
class CoreFringePartition:
    core: frozenset
    fringe: frozenset
    rounds_used: int = 0

    def __post_init__(self):
        object.__setattr__(self, "core", frozenset(int(v) for v in self.core))
        object.__setattr__(self, "fringe", frozenset(int(v) for v in self.fringe))
        if self.core & self.fringe:
            raise ValueError("core and fringe overlap")

    @property
    def core_ids(self) -> np.ndarray:
        """Core node ids in ascending order (the index order of ``p_seed``)."""
        return np.array(sorted(self.core), dtype=np.int64)

    @property
    def fringe_ids(self) -> np.ndarray:
        return np.array(sorted(self.fringe), dtype=np.int64)

    def check(self, H: AttributedHypergraph, require_hitting=True) -> None:
        if self.core | self.fringe != frozenset(range(H.node_count)):
            raise ValueError("core and fringe do not cover the node set")
        if require_hitting and not is_hitting_set(H.hyperedges, self.core):
            raise ValueError("core does not intersect every hyperedge")

    @classmethod
    def all_core(cls, node_count) -> "CoreFringePartition":
        """Degenerate split with every node in the core (used by NoAH-CF)."""
        return cls(frozenset(range(node_count)), frozenset(), 0)


def is_hitting_set(hyperedges, nodes) -> bool:
    nodes = set(nodes)
    return all(not nodes.isdisjoint(e) for e in hyperedges)


def _node_to_edges(H):
    incident = [[] for _ in range(H.node_count)]
    for j, e in enumerate(H.hyperedges):
        for v in e:
            incident[v].append(j)
    return incident


def minimal_hitting_set(H: AttributedHypergraph, rng=None, _incident=None) -> set:
    """One randomized greedy-then-prune pass.

    Hyperedges are visited in random order and any hyperedge not yet hit
    contributes all of its nodes. The candidate set is then visited in random
    order and a node is dropped whenever every hyperedge it belongs to is
    still hit by another member.
    """
    rng = as_rng(rng)
    incident = _incident if _incident is not None else _node_to_edges(H)
    edges = H.hyperedges
    hits = np.zeros(len(edges), dtype=np.int64)
    S = set()
    for j in rng.permutation(len(edges)):
        if hits[j] == 0:
            for v in edges[j]:
                if v not in S:
                    S.add(v)
                    hits[incident[v]] += 1
    order = sorted(S)
    for idx in rng.permutation(len(order)):
        v = order[idx]
        inc = incident[v]
        # duplicate hyperedges appear once per copy in `inc`, each copy has its own counter
        if np.all(hits[inc] >= 2):
            S.discard(v)
            hits[inc] -= 1
    return S


def umhs_partition(H: AttributedHypergraph, rounds: int = DEFAULT_ROUNDS, rng=None) -> CoreFringePartition:
    """Core = union of ``rounds`` minimal hitting sets, fringe = the rest.

    Rounds draw from ``rng`` sequentially, so the first R rounds of an
    (R+1)-round run with the same seed reproduce the R-round result.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    rng = as_rng(rng)
    incident = _node_to_edges(H)
    core = set()
    for _ in range(rounds):
        core |= minimal_hitting_set(H, rng, _incident=incident)
    fringe = set(range(H.node_count)) - core
    return CoreFringePartition(frozenset(core), frozenset(fringe), rounds)


def read_core_file(path, node_count) -> CoreFringePartition:
    core = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                core.add(int(line))
    if any(v < 0 or v >= node_count for v in core):
        raise ValueError(f"{path}: core id out of range for {node_count} nodes")
    return CoreFringePartition(frozenset(core), frozenset(range(node_count)) - core)
