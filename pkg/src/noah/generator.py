"""NoAH hyperedge sampler and its core-free ablation (NoAH-CF)."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .hgraph import AttributedHypergraph
from .partition import CoreFringePartition, as_rng

NOAH = "noah"
NOAH_CF = "noah_cf"
MODES = (NOAH, NOAH_CF)

AFFINITY_FLOOR = 1e-6


def normalize_mode(mode: str) -> str:
    mode = mode.replace("-", "_").lower()
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    return mode


@dataclass(frozen=True, eq=False)
class NoahParams:
    """Seed distribution over the core plus per-attribute 2x2 affinity tables.

    ``p_seed[i]`` refers to the i-th core node in ascending id order.
    ``theta_core[l, a, b]`` is the affinity between a seed with value ``a``
    and a candidate core node with value ``b`` on attribute ``l``;
    ``theta_fringe[l, a, b]`` is the same between the mixed core-group value
    ``a`` and a fringe candidate's value ``b``.
    """

    p_seed: np.ndarray
    theta_core: np.ndarray
    theta_fringe: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p_seed, dtype=float).reshape(-1)
        tc = np.asarray(self.theta_core, dtype=float)
        tf = np.asarray(self.theta_fringe, dtype=float)
        if p.size == 0 or np.any(p < 0) or np.any(p > 1):
            raise ValueError("p_seed entries must lie in [0, 1]")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValueError(f"p_seed must sum to 1 (got {p.sum():.12g})")
        for name, t in (("theta_core", tc), ("theta_fringe", tf)):
            if t.ndim != 3 or t.shape[1:] != (2, 2):
                raise ValueError(f"{name} must have shape (k, 2, 2), got {t.shape}")
            if np.any(t <= 0) or np.any(t >= 1):
                raise ValueError(f"{name} entries must lie strictly inside (0, 1)")
        if tc.shape != tf.shape:
            raise ValueError("theta_core and theta_fringe disagree on k")
        for name, arr in (("p_seed", p), ("theta_core", tc), ("theta_fringe", tf)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def num_attributes(self) -> int:
        return self.theta_core.shape[0]

    def to_dict(self) -> dict:
        return {
            "p_seed": self.p_seed.tolist(),
            "theta_core": self.theta_core.tolist(),
            "theta_fringe": self.theta_fringe.tolist(),
        }

    @classmethod
    def from_dict(cls, d) -> "NoahParams":
        p = np.asarray(d["p_seed"], dtype=float)
        # JSON round trips can drift the sum by an ulp or two
        return cls(p / p.sum(), d["theta_core"], d["theta_fringe"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text) -> "NoahParams":
        return cls.from_dict(json.loads(text))

    @classmethod
    def uniform(cls, n_core, k, core_value=0.5, fringe_value=0.5) -> "NoahParams":
        return cls(
            np.full(n_core, 1.0 / n_core),
            np.full((k, 2, 2), core_value),
            np.full((k, 2, 2), fringe_value),
        )


def log_affinity(theta) -> np.ndarray:
    return np.log(np.clip(theta, AFFINITY_FLOOR, 1.0 - AFFINITY_FLOOR))


def log_attach_matrix(log_theta, X_src, X_dst) -> np.ndarray:
    """``out[i, j] = sum_l log_theta[l, X_src[i, l], X_dst[j, l]]``."""
    S1 = np.asarray(X_src, dtype=float)
    S0 = 1.0 - S1
    D1 = np.asarray(X_dst, dtype=float)
    D0 = 1.0 - D1
    A = S0 * log_theta[:, 0, 0] + S1 * log_theta[:, 1, 0]
    B = S0 * log_theta[:, 0, 1] + S1 * log_theta[:, 1, 1]
    return A @ D0.T + B @ D1.T


def core_attach_prob(params: NoahParams, X, v_s: int, v_c: int) -> float:
    """Probability that core node ``v_c`` joins a group seeded by ``v_s``."""
    if v_s == v_c:
        raise ValueError("seed and candidate must differ")
    X = np.asarray(X)
    lt = log_affinity(params.theta_core)
    k = lt.shape[0]
    return float(np.exp(lt[np.arange(k), X[v_s], X[v_c]].sum()))


def mix_core_attributes(X, core_group, rng=None) -> np.ndarray:
    """Draw each attribute as Bernoulli(fraction of the group having it)."""
    rng = as_rng(rng)
    members = np.fromiter(core_group, dtype=np.int64)
    if members.size == 0:
        raise ValueError("core group must be nonempty")
    frac = np.asarray(X, dtype=float)[members].mean(axis=0)
    return (rng.random(frac.shape[0]) < frac).astype(np.int8)


def fringe_attach_prob(params: NoahParams, x_mix, v_f: int, X) -> float:
    lt = log_affinity(params.theta_fringe)
    k = lt.shape[0]
    return float(np.exp(lt[np.arange(k), np.asarray(x_mix), np.asarray(X)[v_f]].sum()))


class HyperedgeDraw(NamedTuple):
    seed: int
    core_group: tuple
    fringe_group: tuple

    @property
    def nodes(self) -> tuple:
        return tuple(sorted(self.core_group + self.fringe_group))


class NoahSampler:
    """Precomputes the core attachment table once for repeated draws.

    In ``noah_cf`` mode every node is treated as a core node, so the seed is
    drawn over all of V and the remaining nodes attach by pairwise affinity
    with it; ``theta_fringe`` is unused.
    """

    def __init__(self, params: NoahParams, partition: CoreFringePartition | None, X,
                 mode: str = NOAH, shared_mix: bool = False):
        self.mode = normalize_mode(mode)
        X = np.asarray(X)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if self.mode == NOAH_CF:
            partition = CoreFringePartition.all_core(X.shape[0])
        elif partition is None:
            raise ValueError("mode 'noah' needs a core/fringe partition")
        self.core = partition.core_ids
        self.fringe = partition.fringe_ids
        if params.p_seed.shape[0] != self.core.size:
            raise ValueError(
                f"p_seed has {params.p_seed.shape[0]} entries but the core has {self.core.size} nodes"
            )
        if params.num_attributes != X.shape[1]:
            raise ValueError("params and attribute matrix disagree on k")
        self.params = params
        self.X = X
        self.k = X.shape[1]
        self.shared_mix = shared_mix
        self.p_seed = params.p_seed / params.p_seed.sum()
        self.core_prob = np.exp(log_attach_matrix(log_affinity(params.theta_core), X[self.core], X[self.core]))
        self.log_tf = log_affinity(params.theta_fringe)
        self.Xf = X[self.fringe].astype(np.int64)
        self.Xc = X[self.core].astype(float)

    def draw(self, rng) -> HyperedgeDraw:
        # draw order: seed, core candidates (ascending id), fringe mixes, fringe uniforms
        nc = self.core.size
        s = int(rng.choice(nc, p=self.p_seed)) if nc > 1 else 0
        u = rng.random(nc - 1)
        others = np.delete(np.arange(nc), s)
        joined = others[u < self.core_prob[s, others]]
        members = np.concatenate(([s], joined))
        fringe_group = ()
        nf = self.fringe.size
        if nf:
            frac = self.Xc[members].mean(axis=0)
            if self.shared_mix:
                mix = np.broadcast_to(rng.random(self.k) < frac, (nf, self.k))
            else:
                mix = rng.random((nf, self.k)) < frac
            logp = self.log_tf[np.arange(self.k), mix.astype(np.int64), self.Xf].sum(axis=1)
            hit = rng.random(nf) < np.exp(logp)
            fringe_group = tuple(int(v) for v in self.fringe[hit])
        core_group = tuple(sorted(int(v) for v in self.core[members]))
        return HyperedgeDraw(int(self.core[s]), core_group, fringe_group)


def sample_hyperedge(params, partition, X, rng=None, mode=NOAH, shared_mix=False) -> HyperedgeDraw:
    """Single draw that also reports the seed and the core/fringe split."""
    return NoahSampler(params, partition, X, mode, shared_mix).draw(as_rng(rng))


def generate_hyperedge(params, partition, X, rng=None, mode=NOAH, shared_mix=False) -> tuple:
    return sample_hyperedge(params, partition, X, rng, mode, shared_mix).nodes


def generate(params: NoahParams, partition: CoreFringePartition | None, X, m: int, rng=None,
             mode: str = NOAH, shared_mix: bool = False) -> AttributedHypergraph:
    """Sample ``m`` independent hyperedges over the original node set.

    Parameters
    ----------
    params : NoahParams
        Fitted or hand-set parameters. In ``noah_cf`` mode ``p_seed`` spans V.
    partition : CoreFringePartition or None
        Ignored in ``noah_cf`` mode.
    X : array_like, shape (|V|, k)
        Binary attribute matrix, attached unchanged to the output.
    m : int
        Number of hyperedges, at least 1.
    rng : int, Generator or None
    mode : {"noah", "noah_cf"}
    shared_mix : bool
        Draw one mixed attribute vector per hyperedge instead of one per
        fringe candidate.

    Returns
    -------
    AttributedHypergraph
        Duplicate hyperedges are not filtered.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = as_rng(rng)
    sampler = NoahSampler(params, partition, X, mode, shared_mix)
    edges = tuple(sampler.draw(rng).nodes for _ in range(m))
    return AttributedHypergraph(sampler.X.shape[0], edges, sampler.X)
