"""Structure-attribute interplay measures and generator-vs-real discrepancies.

Covers type-(s, t) affinity scores and their random baselines, hyperedge
entropy (plain and after label propagation), node homophily, 1-D
Wasserstein distance, and structural summaries (degrees, sizes, singular
values of the incidence matrix). Entropies use the natural logarithm.
Undefined quantities are reported as ``nan``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import svds
from scipy.special import gammaln

from .hgraph import AttributedHypergraph, degree_vector, size_vector

LOG_FLOOR = 1e-8
DEFAULT_S_LIST = (2, 3, 4)
DEFAULT_HOHE_ROUNDS = 1


def _label_counts(H: AttributedHypergraph, l: int):
    """Per-hyperedge (size, number of members with attribute l == 1)."""
    sizes = size_vector(H)
    x = H.attributes[:, l].astype(np.int64)
    ones = np.array([x[list(e)].sum() for e in H.hyperedges], dtype=np.int64)
    return sizes, ones


def affinity_score(H: AttributedHypergraph, l: int, Y: int, s: int, t: int) -> float:
    """Type-(s, t) affinity score of value ``Y`` on attribute ``l``.

    Fraction of the total degree of nodes labeled ``Y`` that is spent in
    size-``s`` hyperedges holding exactly ``t`` nodes labeled ``Y``.
    """
    if not 1 <= t <= s:
        raise ValueError(f"need 1 <= t <= s, got s={s}, t={t}")
    sizes, ones = _label_counts(H, l)
    cnt = ones if Y == 1 else sizes - ones
    return _affinity_from_counts(sizes, cnt, s, t)


def _affinity_from_counts(sizes, cnt, s, t):
    denom = cnt.sum()
    if denom == 0:
        return math.nan
    # each qualifying hyperedge contributes once for each of its t labeled members
    return float(t * np.count_nonzero((sizes == s) & (cnt == t)) / denom)


def _log_binom(a, b):
    if b < 0 or b > a or a < 0:
        return -math.inf
    return gammaln(a + 1) - gammaln(b + 1) - gammaln(a - b + 1)


def baseline_score(n: int, nY: int, s: int, t: int) -> float:
    """Probability that s-1 uniformly chosen companions include exactly t-1 of label Y."""
    if not 1 <= t <= s <= n:
        raise ValueError(f"need 1 <= t <= s <= n, got n={n}, s={s}, t={t}")
    lg = _log_binom(nY - 1, t - 1) + _log_binom(n - nY, s - t) - _log_binom(n - 1, s - 1)
    return 0.0 if lg == -math.inf else float(math.exp(lg))


def affinity_ratio(H: AttributedHypergraph, l: int, Y: int, s: int, t: int) -> float:
    h = affinity_score(H, l, Y, s, t)
    nY = int(np.count_nonzero(H.attributes[:, l] == Y))
    if s > H.node_count:
        return math.nan
    b = baseline_score(H.node_count, nY, s, t)
    if b == 0 or math.isnan(h):
        return math.nan
    return h / b


def affinity_ratio_table(H: AttributedHypergraph, s: int) -> np.ndarray:
    """Ratios for every attribute, value and t, shape (k, 2, s); nan where undefined."""
    k = H.num_attributes
    out = np.full((k, 2, s), np.nan)
    if s > H.node_count:
        return out
    sizes = size_vector(H)
    for l in range(k):
        _, ones = _label_counts(H, l)
        for Y in (0, 1):
            cnt = ones if Y == 1 else sizes - ones
            nY = int(np.count_nonzero(H.attributes[:, l] == Y))
            for t in range(1, s + 1):
                h = _affinity_from_counts(sizes, cnt, s, t)
                b = baseline_score(H.node_count, nY, s, t)
                if b > 0 and not math.isnan(h):
                    out[l, Y, t - 1] = h / b
    return out


def _binary_entropy(q):
    q = np.asarray(q, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(q > 0, -q * np.log(q), 0.0)
        b = np.where(q < 1, -(1 - q) * np.log1p(-q), 0.0)
    return a + b


def hyperedge_entropy(H: AttributedHypergraph, l: int) -> np.ndarray:
    """Binary entropy of attribute ``l`` inside each hyperedge."""
    sizes, ones = _label_counts(H, l)
    return _binary_entropy(ones / sizes)


def higher_order_hyperedge_entropy(H: AttributedHypergraph, l: int, rounds: int = DEFAULT_HOHE_ROUNDS) -> np.ndarray:
    """Hyperedge entropy after ``rounds`` of hyperedge/node label averaging.

    Each round sets every hyperedge's label distribution to the mean over its
    members, then every node's to the mean over its incident hyperedges
    (isolated nodes keep their own). Entropy is taken from hyperedge means
    recomputed from the final node distributions.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    B = H.incidence()  # |V| x |E|
    sizes = np.asarray(B.sum(axis=0)).ravel()
    deg = np.asarray(B.sum(axis=1)).ravel()
    node = H.attributes[:, l].astype(float)
    for _ in range(rounds):
        edge = (B.T @ node) / sizes
        spread = B @ edge
        node = np.where(deg > 0, spread / np.maximum(deg, 1), node)
    return _binary_entropy(np.clip((B.T @ node) / sizes, 0.0, 1.0))


def node_homophily(H: AttributedHypergraph, l: int) -> np.ndarray:
    """Per-node share of co-members that match the node's attribute ``l``.

    Nodes whose incident hyperedges contain no other member are left out, so
    the result is indexed by the qualifying nodes only (see
    :func:`node_homophily_nodes`).
    """
    return _node_homophily(H, l)[1]


def node_homophily_nodes(H: AttributedHypergraph, l: int) -> np.ndarray:
    return _node_homophily(H, l)[0]


def _node_homophily(H, l):
    sizes, ones = _label_counts(H, l)
    B = H.incidence()
    x = H.attributes[:, l]
    same_if_1 = B @ (ones - 1).astype(float)
    same_if_0 = B @ (sizes - ones - 1).astype(float)
    others = B @ (sizes - 1).astype(float)
    same = np.where(x == 1, same_if_1, same_if_0)
    keep = np.flatnonzero(others > 0)
    return keep, same[keep] / others[keep]


def wasserstein1(a, b) -> float:
    """W1 distance between two empirical distributions on the real line."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("wasserstein1 needs two nonempty samples")
    if a.size == b.size:
        return float(np.mean(np.abs(a - b)))
    # integrate |F_a - F_b| between consecutive support points
    pts = np.concatenate([a, b])
    pts.sort(kind="mergesort")
    gaps = np.diff(pts)
    Fa = np.searchsorted(a, pts[:-1], side="right") / a.size
    Fb = np.searchsorted(b, pts[:-1], side="right") / b.size
    return float(np.sum(np.abs(Fa - Fb) * gaps))


# -- reports -------------------------------------------------------------------

@dataclass
class MetricReport:
    """Per-attribute measures of one hypergraph, or discrepancies between two."""

    affinity_ratios: dict = field(default_factory=dict)   # s -> (k, 2, s) array
    hyperedge_entropy: list = field(default_factory=list)
    higher_order_entropy: list = field(default_factory=list)
    node_homophily: list = field(default_factory=list)
    discrepancies: dict = field(default_factory=dict)     # "T2", ..., "NHS"
    skipped_ratios: dict = field(default_factory=dict)    # "T2" -> count
    hohe_rounds: int = DEFAULT_HOHE_ROUNDS

    def to_dict(self) -> dict:
        def arr(x):
            return np.where(np.isnan(x), None, x).tolist() if isinstance(x, np.ndarray) else x

        return {
            "hohe_rounds": self.hohe_rounds,
            "affinity_ratios": {str(s): arr(v) for s, v in self.affinity_ratios.items()},
            "hyperedge_entropy": [v.tolist() for v in self.hyperedge_entropy],
            "higher_order_entropy": [v.tolist() for v in self.higher_order_entropy],
            "node_homophily": [v.tolist() for v in self.node_homophily],
            "discrepancies": dict(self.discrepancies),
            "skipped_ratios": dict(self.skipped_ratios),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d) -> "MetricReport":
        def arr(x):
            return np.array([[[np.nan if v is None else v for v in row] for row in lay] for lay in x], dtype=float)

        return cls(
            affinity_ratios={int(s): arr(v) for s, v in d.get("affinity_ratios", {}).items()},
            hyperedge_entropy=[np.asarray(v, dtype=float) for v in d.get("hyperedge_entropy", [])],
            higher_order_entropy=[np.asarray(v, dtype=float) for v in d.get("higher_order_entropy", [])],
            node_homophily=[np.asarray(v, dtype=float) for v in d.get("node_homophily", [])],
            discrepancies=dict(d.get("discrepancies", {})),
            skipped_ratios=dict(d.get("skipped_ratios", {})),
            hohe_rounds=int(d.get("hohe_rounds", DEFAULT_HOHE_ROUNDS)),
        )

    @classmethod
    def from_json(cls, text) -> "MetricReport":
        return cls.from_dict(json.loads(text))


def interplay_report(H: AttributedHypergraph, s_list=DEFAULT_S_LIST, hohe_rounds=DEFAULT_HOHE_ROUNDS) -> MetricReport:
    k = H.num_attributes
    return MetricReport(
        affinity_ratios={s: affinity_ratio_table(H, s) for s in s_list},
        hyperedge_entropy=[hyperedge_entropy(H, l) for l in range(k)],
        higher_order_entropy=[higher_order_hyperedge_entropy(H, l, hohe_rounds) for l in range(k)],
        node_homophily=[node_homophily(H, l) for l in range(k)],
        hohe_rounds=hohe_rounds,
    )


def _w1_sum(xs, ys):
    total = 0.0
    for a, b in zip(xs, ys):
        if a.size and b.size:
            total += wasserstein1(a, b)
    return total


def interplay_discrepancy(H_real: AttributedHypergraph, H_gen: AttributedHypergraph,
                          s_list=DEFAULT_S_LIST, hohe_rounds=DEFAULT_HOHE_ROUNDS) -> MetricReport:
    """Aggregate differences between a real and a generated hypergraph.

    ``Ts`` sums ``|ln(r_gen + 1e-8) - ln(r_real + 1e-8)|`` over attributes,
    both attribute values and ``t = 1..s``, skipping undefined ratios. HE,
    HOHE and NHS sum per-attribute W1 distances between distributions (an
    attribute with an empty distribution on either side contributes 0).
    """
    if H_real.node_count != H_gen.node_count or not np.array_equal(H_real.attributes, H_gen.attributes):
        raise ValueError("hypergraphs must share the node set and attribute matrix")
    real = interplay_report(H_real, s_list, hohe_rounds)
    gen = interplay_report(H_gen, s_list, hohe_rounds)
    disc, skipped = {}, {}
    for s in s_list:
        a, b = real.affinity_ratios[s], gen.affinity_ratios[s]
        ok = ~(np.isnan(a) | np.isnan(b))
        disc[f"T{s}"] = float(np.abs(np.log(b[ok] + LOG_FLOOR) - np.log(a[ok] + LOG_FLOOR)).sum())
        skipped[f"T{s}"] = int((~ok).sum())
    disc["HE"] = _w1_sum(real.hyperedge_entropy, gen.hyperedge_entropy)
    disc["HOHE"] = _w1_sum(real.higher_order_entropy, gen.higher_order_entropy)
    disc["NHS"] = _w1_sum(real.node_homophily, gen.node_homophily)
    gen.discrepancies = disc
    gen.skipped_ratios = skipped
    return gen


@dataclass
class StructuralReport:
    degrees: np.ndarray
    sizes: np.ndarray
    singular_values: np.ndarray

    def to_dict(self):
        return {"degrees": self.degrees.tolist(), "sizes": self.sizes.tolist(),
                "singular_values": self.singular_values.tolist()}


def top_singular_values(H: AttributedHypergraph, k: int) -> np.ndarray:
    B = H.incidence()
    r = min(B.shape)
    if not 1 <= k <= r:
        raise ValueError(f"top_k_singular must lie in [1, {r}]")
    if k >= r - 1 or r <= 32:
        sv = np.linalg.svd(B.toarray(), compute_uv=False)
    else:
        v0 = np.ones(r) / math.sqrt(r)
        sv = svds(B.astype(float), k=k, tol=0, v0=v0, return_singular_vectors=False)
    return np.sort(sv)[::-1][:k]


def structural_report(H: AttributedHypergraph, top_k_singular: int = 10) -> StructuralReport:
    """Descending degree and size sequences plus the leading singular values."""
    k = min(top_k_singular, H.node_count, H.num_edges)
    return StructuralReport(
        np.sort(degree_vector(H))[::-1],
        np.sort(size_vector(H))[::-1],
        top_singular_values(H, k),
    )
