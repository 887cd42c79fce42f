"""Maximum-likelihood fitting of NoAH parameters (NoAHFit).

The per-hyperedge likelihood splits into a core term (a mixture over which
member of the observed core group was the seed) and a fringe term (each
fringe node attaches independently with the mixed-attribute marginal). The
loss adds sorted-MSE penalties between observed and expected degrees and
core/fringe subset sizes. Everything is evaluated for all hyperedges at once
with dense ``|C| x m`` and ``|F| x m`` arrays; gradients are closed form.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import expit, logit, logsumexp

from .generator import AFFINITY_FLOOR, NoahParams, log_affinity, log_attach_matrix
from .hgraph import AttributedHypergraph, _atomic_write_text
from .partition import CoreFringePartition, as_rng

logger = logging.getLogger(__name__)


class FitDivergedError(FloatingPointError):
    def __init__(self, msg, edge_index=None):
        super().__init__(msg)
        self.edge_index = edge_index


@dataclass
class FitConfig:
    """Optimizer settings.

    Defaults: 500 full-batch Adam steps at learning rate 0.01, unit weights on
    the degree and cardinality losses, affinities kept inside
    ``[prob_floor, 1 - prob_floor]``, and the core likelihood divided by the
    total seed mass of the observed core group.
    """

    epochs: int = 500
    learning_rate: float = 0.01
    w_deg: float = 1.0
    w_card: float = 1.0
    prob_floor: float = 1e-6
    grad_check: bool = False
    normalize_core: bool = True
    init_noise: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise ValueError("epochs must be an integer >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.w_deg < 0 or self.w_card < 0:
            raise ValueError("loss weights must be >= 0")
        if not 0 < self.prob_floor < 0.5:
            raise ValueError("prob_floor must lie in (0, 0.5)")
        self.epochs = int(self.epochs)

    @classmethod
    def from_mapping(cls, d) -> "FitConfig":
        known = cls.__dataclass_fields__
        unknown = set(d) - set(known)
        if unknown:
            raise ValueError(f"unknown FitConfig keys: {sorted(unknown)}")
        kw = {}
        for key, val in d.items():
            typ = known[key].type
            if typ == "bool" and isinstance(val, str):
                val = val.strip().lower() in ("1", "true", "yes", "on")
            elif typ == "int":
                val = int(val)
            elif typ == "float":
                val = float(val)
            kw[key] = val
        return cls(**kw)

    @classmethod
    def parse(cls, text: str) -> "FitConfig":
        """Read either a JSON object or ``key=value`` lines."""
        import json

        stripped = text.strip()
        if stripped.startswith("{"):
            return cls.from_mapping(json.loads(stripped))
        d = {}
        for line in stripped.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise ValueError(f"expected key=value, got {line!r}")
            d[key.strip().replace("-", "_")] = val.strip()
        return cls.from_mapping(d)


@dataclass
class FitTrace:
    l_edge: list = field(default_factory=list)
    l_deg: list = field(default_factory=list)
    l_card: list = field(default_factory=list)
    total: list = field(default_factory=list)
    skipped_edges: list = field(default_factory=list)
    grad_check_error: float | None = None
    grad_check_ties: bool = False

    def record(self, terms):
        self.total.append(terms[0])
        self.l_edge.append(terms[1])
        self.l_deg.append(terms[2])
        self.l_card.append(terms[3])

    def __len__(self):
        return len(self.total)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epoch", "L_edge", "L_deg", "L_card", "L"])
        for i in range(len(self)):
            w.writerow([i + 1, repr(self.l_edge[i]), repr(self.l_deg[i]),
                        repr(self.l_card[i]), repr(self.total[i])])
        return buf.getvalue()

    def write_csv(self, path):
        _atomic_write_text(path, self.to_csv())


@dataclass
class ParamLogits:
    """Unconstrained parameters.

    ``p_seed = softmax(seed)``; every affinity is
    ``floor + (1 - 2 floor) * sigmoid(logit)``, which keeps it strictly inside
    ``(floor, 1 - floor)`` while staying smooth.
    """

    seed: np.ndarray
    core: np.ndarray
    fringe: np.ndarray

    def to_params(self, floor=AFFINITY_FLOOR) -> NoahParams:
        logp = self.seed - logsumexp(self.seed)
        return NoahParams(np.exp(logp), squash(self.core, floor), squash(self.fringe, floor))

    @classmethod
    def from_params(cls, params: NoahParams, floor=AFFINITY_FLOOR) -> "ParamLogits":
        return cls(np.log(params.p_seed), unsquash(params.theta_core, floor),
                   unsquash(params.theta_fringe, floor))

    def flat(self) -> np.ndarray:
        return np.concatenate([self.seed.ravel(), self.core.ravel(), self.fringe.ravel()])

    def unflat(self, vec) -> "ParamLogits":
        a, b = self.seed.size, self.core.size
        return ParamLogits(vec[:a].copy(), vec[a:a + b].reshape(self.core.shape).copy(),
                           vec[a + b:].reshape(self.fringe.shape).copy())

    def copy(self) -> "ParamLogits":
        return ParamLogits(self.seed.copy(), self.core.copy(), self.fringe.copy())


def squash(g, floor):
    return floor + (1.0 - 2.0 * floor) * expit(g)


def unsquash(theta, floor):
    t = (np.clip(theta, floor, 1.0 - floor) - floor) / (1.0 - 2.0 * floor)
    return logit(np.clip(t, 1e-15, 1.0 - 1e-15))


def _log1mexp(x):
    # log(1 - exp(x)) for x < 0
    return np.where(x > -0.693, np.log(-np.expm1(x)), np.log1p(-np.exp(x)))


# -- sorted MSE --------------------------------------------------------------

def _desc_order(x):
    return np.argsort(-np.asarray(x, dtype=float), kind="stable")


def sorted_mse(observed, expected) -> float:
    """MSE between the two vectors after sorting each in descending order."""
    o = np.asarray(observed, dtype=float)
    x = np.asarray(expected, dtype=float)
    if o.shape != x.shape:
        raise ValueError(f"length mismatch: {o.shape} vs {x.shape}")
    if o.size == 0:
        return 0.0
    return float(np.mean((o[_desc_order(o)] - x[_desc_order(x)]) ** 2))


def sorted_mse_grad(observed, expected) -> np.ndarray:
    """Gradient with respect to ``expected``, sort order held fixed."""
    o = np.asarray(observed, dtype=float)
    x = np.asarray(expected, dtype=float)
    g = np.zeros_like(x)
    if x.size == 0:
        return g
    ox = _desc_order(x)
    g[ox] = 2.0 * (x[ox] - o[_desc_order(o)]) / x.size
    return g


# -- problem setup -------------------------------------------------------------

def sorted_mse_tied(observed, expected) -> bool:
    """True when equal expected values are matched to different observed ones.

    At such points the sorted MSE has a kink: the stable-sort gradient is one
    of its one-sided derivatives, and central differences land in between.
    """
    o = np.sort(np.asarray(observed, dtype=float))[::-1]
    e = np.asarray(expected, dtype=float)[_desc_order(expected)]
    same = e[1:] == e[:-1]
    return bool(np.any(same & (o[1:] != o[:-1])))


class FitProblem:
    """Observed data arranged for vectorized likelihood evaluation.

    Hyperedges that miss the core entirely cannot be produced by the model;
    they are dropped from every loss term and listed in ``skipped``.
    """

    def __init__(self, node_count, hyperedges, X, partition: CoreFringePartition):
        X = np.asarray(X)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        self.node_count = node_count
        self.core = partition.core_ids
        self.fringe = partition.fringe_ids
        if self.core.size == 0:
            raise ValueError("core set is empty")
        cpos = np.full(node_count, -1)
        cpos[self.core] = np.arange(self.core.size)
        fpos = np.full(node_count, -1)
        fpos[self.fringe] = np.arange(self.fringe.size)

        keep, self.skipped = [], []
        for j, e in enumerate(hyperedges):
            (keep if any(cpos[v] >= 0 for v in e) else self.skipped).append(j)
        if self.skipped:
            logger.warning("%d hyperedge(s) contain no core node and are excluded", len(self.skipped))
        self.edge_index = np.array(keep, dtype=np.int64)
        m = len(keep)
        M = np.zeros((self.core.size, m))
        MF = np.zeros((self.fringe.size, m))
        for col, j in enumerate(keep):
            e = np.asarray(hyperedges[j])
            c, f = cpos[e], fpos[e]
            M[c[c >= 0], col] = 1.0
            MF[f[f >= 0], col] = 1.0
        self.M, self.MF = M, MF
        self.X = X
        self.XC = X[self.core].astype(float)
        self.XF = X[self.fringe].astype(float)
        self.k = X.shape[1]
        # p_e: attribute means over each observed core group, shape (k, m)
        self.pe = (self.XC.T @ M) / M.sum(axis=0)
        self.deg_core = M.sum(axis=1)
        self.deg_fringe = MF.sum(axis=1)
        self.card_core = M.sum(axis=0)
        self.card_fringe = MF.sum(axis=0)

    @classmethod
    def from_hypergraph(cls, H: AttributedHypergraph, partition) -> "FitProblem":
        return cls(H.node_count, H.hyperedges, H.attributes, partition)

    @property
    def num_edges(self):
        return self.M.shape[1]


@dataclass
class _Eval:
    terms: tuple
    edge_ll: np.ndarray
    core_ll: np.ndarray
    fringe_ll: np.ndarray
    exp_deg_core: np.ndarray
    exp_deg_fringe: np.ndarray
    exp_card_core: np.ndarray
    exp_card_fringe: np.ndarray
    grad: tuple | None = None


def _evaluate(prob: FitProblem, logp, theta_c, theta_f, cfg: FitConfig, need_grad=False) -> _Eval:
    """Loss terms and, optionally, gradients w.r.t. (log p_seed, theta_c, theta_f)."""
    M, MF = prob.M, prob.MF
    on = M > 0
    nc = M.shape[0]
    norm = 1.0 if cfg.normalize_core else 0.0

    # core: ell[s, e] = log P(C_e \ {s} | s)
    ltc = np.log(theta_c)
    logPC = log_attach_matrix(ltc, prob.XC, prob.XC)
    PC = np.exp(logPC)
    L1 = _log1mexp(logPC)
    diag = np.eye(nc, dtype=bool)
    LPz = np.where(diag, 0.0, logPC)
    L1z = np.where(diag, 0.0, L1)
    ell = LPz @ M + (L1z.sum(axis=1)[:, None] - L1z @ M)
    A = np.where(on, logp[:, None] + ell, -np.inf)
    lse_core = logsumexp(A, axis=0)
    lse_seed = logsumexp(np.where(on, logp[:, None], -np.inf), axis=0)
    core_ll = lse_core - norm * lse_seed
    Phat = np.where(on, np.exp(logp[:, None] - lse_seed), 0.0)

    # fringe: marginal attachment over the mixed attribute vector
    pe = prob.pe
    mix0 = theta_f[:, 0, 0][:, None] * (1 - pe) + theta_f[:, 1, 0][:, None] * pe
    mix1 = theta_f[:, 0, 1][:, None] * (1 - pe) + theta_f[:, 1, 1][:, None] * pe
    Q0, Q1 = np.log(mix0), np.log(mix1)
    logPF = (1.0 - prob.XF) @ Q0 + prob.XF @ Q1
    PF = np.exp(logPF)
    L1F = _log1mexp(logPF)
    fringe_ll = (MF * logPF + (1.0 - MF) * L1F).sum(axis=0)

    edge_ll = core_ll + fringe_ll
    if not np.all(np.isfinite(edge_ll)):
        bad = int(np.flatnonzero(~np.isfinite(edge_ll))[0])
        j = int(prob.edge_index[bad])
        raise FitDivergedError(f"non-finite log-likelihood at hyperedge {j}", edge_index=j)
    l_edge = -float(edge_ll.sum())

    # expected degrees / subset sizes, conditional on the observed core groups
    PCz = np.where(diag, 0.0, PC)
    w = Phat.sum(axis=1)
    rho = PCz.sum(axis=1)
    ed_c = w + PCz.T @ w
    ec_c = 1.0 + rho @ Phat
    ed_f = PF.sum(axis=1)
    ec_f = PF.sum(axis=0)
    l_deg = sorted_mse(prob.deg_core, ed_c) + sorted_mse(prob.deg_fringe, ed_f)
    l_card = sorted_mse(prob.card_core, ec_c) + sorted_mse(prob.card_fringe, ec_f)
    total = l_edge + cfg.w_deg * l_deg + cfg.w_card * l_card
    out = _Eval((total, l_edge, l_deg, l_card), edge_ll, core_ll, fringe_ll, ed_c, ed_f, ec_c, ec_f)
    if not need_grad:
        return out

    g_dc = cfg.w_deg * sorted_mse_grad(prob.deg_core, ed_c)
    g_df = cfg.w_deg * sorted_mse_grad(prob.deg_fringe, ed_f)
    g_cc = cfg.w_card * sorted_mse_grad(prob.card_core, ec_c)
    g_cf = cfg.w_card * sorted_mse_grad(prob.card_fringe, ec_f)

    # seed posterior under the (unnormalized) core mixture
    R = np.where(on, np.exp(A - lse_core), 0.0)
    g_logp = -(R - norm * Phat).sum(axis=1)

    RM = R @ M.T
    dLPz = -RM
    dL1z = -(R.sum(axis=1)[:, None] - RM)
    G_log = dLPz + dL1z * (-PC / -np.expm1(logPC))
    dPCz = np.outer(w, g_dc) + (Phat @ g_cc)[:, None]
    G_log = G_log + dPCz * PC
    G_log[diag] = 0.0

    dw = g_dc + PCz @ g_dc
    Gp = np.where(on, dw[:, None] + rho[:, None] * g_cc[None, :], 0.0)
    g_logp = g_logp + (Phat * (Gp - (Phat * Gp).sum(axis=0))).sum(axis=1)

    S1 = prob.XC
    S0 = 1.0 - S1
    GU0 = G_log @ S0
    GU1 = G_log @ S1
    d_ltc = np.empty_like(ltc)
    d_ltc[:, 0, 0] = (S0 * GU0).sum(axis=0)
    d_ltc[:, 0, 1] = (S0 * GU1).sum(axis=0)
    d_ltc[:, 1, 0] = (S1 * GU0).sum(axis=0)
    d_ltc[:, 1, 1] = (S1 * GU1).sum(axis=0)
    g_tc = d_ltc / theta_c

    GF = -(MF - (1.0 - MF) * PF / -np.expm1(logPF)) + (g_df[:, None] + g_cf[None, :]) * PF
    dQ0 = (1.0 - prob.XF).T @ GF
    dQ1 = prob.XF.T @ GF
    g_tf = np.empty_like(theta_f)
    g_tf[:, 0, 0] = (dQ0 * (1 - pe) / mix0).sum(axis=1)
    g_tf[:, 1, 0] = (dQ0 * pe / mix0).sum(axis=1)
    g_tf[:, 0, 1] = (dQ1 * (1 - pe) / mix1).sum(axis=1)
    g_tf[:, 1, 1] = (dQ1 * pe / mix1).sum(axis=1)
    out.grad = (g_logp, g_tc, g_tf)
    return out


def _evaluate_logits(prob, logits: ParamLogits, cfg, need_grad=False):
    f = cfg.prob_floor
    logp = logits.seed - logsumexp(logits.seed)
    sc, sf = expit(logits.core), expit(logits.fringe)
    tc = f + (1 - 2 * f) * sc
    tf = f + (1 - 2 * f) * sf
    ev = _evaluate(prob, logp, tc, tf, cfg, need_grad)
    if not need_grad:
        return ev, None
    g_logp, g_tc, g_tf = ev.grad
    g_seed = g_logp - np.exp(logp) * g_logp.sum()
    g_core = g_tc * (1 - 2 * f) * sc * (1 - sc)
    g_fringe = g_tf * (1 - 2 * f) * sf * (1 - sf)
    return ev, ParamLogits(g_seed, g_core, g_fringe)


def _params_arrays(params: NoahParams, cfg):
    f = cfg.prob_floor
    p = params.p_seed / params.p_seed.sum()
    with np.errstate(divide="ignore"):
        logp = np.log(p)
    return logp, np.clip(params.theta_core, f, 1 - f), np.clip(params.theta_fringe, f, 1 - f)


# -- public per-hyperedge likelihoods ------------------------------------------

def _split(e, partition):
    e = set(int(v) for v in e)
    return sorted(e & partition.core), sorted(e & partition.fringe)


def core_likelihood(e, partition: CoreFringePartition, X, params: NoahParams, normalize=True) -> float:
    """Log-likelihood of hyperedge ``e``'s core group.

    Mixture over the seed: for each core member ``s`` of ``e``,
    ``p_seed(s)`` times the probability that exactly the other core members
    of ``e`` attach to ``s``. With ``normalize`` the result is divided by the
    seed mass of the core group.
    """
    X = np.asarray(X)
    core = partition.core_ids
    ce, _ = _split(e, partition)
    if not ce:
        raise ValueError("hyperedge has no core node")
    pos = {int(v): i for i, v in enumerate(core)}
    idx = np.array([pos[v] for v in ce])
    lt = log_affinity(params.theta_core)
    logPC = log_attach_matrix(lt, X[core[idx]], X[core])  # (|C_e|, |C|)
    inc = np.zeros(core.size, dtype=bool)
    inc[idx] = True
    terms = []
    for row, s in enumerate(idx):
        others = inc.copy()
        others[s] = False
        rest = ~inc
        lp = logPC[row]
        terms.append(math.log(params.p_seed[s]) + lp[others].sum() + _log1mexp(lp[rest]).sum())
    ll = float(logsumexp(terms))
    if normalize:
        ll -= float(logsumexp(np.log(params.p_seed[idx])))
    return ll


def fringe_marginal(params: NoahParams, pe, x_f) -> float:
    """Attachment probability of a fringe node averaged over the mixed vector."""
    tf = np.clip(params.theta_fringe, AFFINITY_FLOOR, 1 - AFFINITY_FLOOR)
    k = tf.shape[0]
    x_f = np.asarray(x_f, dtype=np.int64)
    l = np.arange(k)
    pe = np.asarray(pe, dtype=float)
    return float(np.prod((1 - pe) * tf[l, 0, x_f] + pe * tf[l, 1, x_f]))


def fringe_likelihood(e, partition: CoreFringePartition, X, params: NoahParams) -> float:
    """Log-probability that exactly ``e``'s fringe members attach to its core group."""
    X = np.asarray(X)
    ce, fe = _split(e, partition)
    if not ce:
        raise ValueError("hyperedge has no core node")
    pe = X[ce].mean(axis=0)
    fe = set(fe)
    ll = 0.0
    for f in partition.fringe_ids:
        q = fringe_marginal(params, pe, X[f])
        ll += math.log(q) if f in fe else math.log1p(-q)
    return ll


def hyperedge_log_likelihood(e, partition, X, params, normalize=True) -> float:
    return core_likelihood(e, partition, X, params, normalize) + fringe_likelihood(e, partition, X, params)


# -- expectations and losses ---------------------------------------------------

def _problem(partition, X, E_observed):
    X = np.asarray(X)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    return FitProblem(X.shape[0], [tuple(e) for e in E_observed], X, partition)


def expected_degrees(partition, X, params: NoahParams, E_observed, config: FitConfig | None = None):
    """Expected degrees (core, fringe) given the observed core groups.

    Entries follow ``partition.core_ids`` / ``partition.fringe_ids`` order.
    """
    cfg = config or FitConfig()
    prob = _problem(partition, X, E_observed)
    ev = _evaluate(prob, *_params_arrays(params, cfg), cfg)
    return ev.exp_deg_core, ev.exp_deg_fringe


def expected_cardinalities(partition, X, params: NoahParams, E_observed, config: FitConfig | None = None):
    """Expected (core-subset, fringe-subset) sizes for every hyperedge with a core node."""
    cfg = config or FitConfig()
    prob = _problem(partition, X, E_observed)
    ev = _evaluate(prob, *_params_arrays(params, cfg), cfg)
    return ev.exp_card_core, ev.exp_card_fringe


def total_loss(H: AttributedHypergraph, partition, params: NoahParams, config: FitConfig | None = None):
    """``(L, L_edge, L_deg, L_card)`` at the given parameters."""
    cfg = config or FitConfig()
    prob = FitProblem.from_hypergraph(H, partition)
    return _evaluate(prob, *_params_arrays(params, cfg), cfg).terms


def loss_gradients(H_or_problem, partition, logits: ParamLogits, config: FitConfig | None = None) -> ParamLogits:
    cfg = config or FitConfig()
    prob = (H_or_problem if isinstance(H_or_problem, FitProblem)
            else FitProblem.from_hypergraph(H_or_problem, partition))
    return _evaluate_logits(prob, logits, cfg, need_grad=True)[1]


def numerical_gradients(prob: FitProblem, logits: ParamLogits, config: FitConfig, h=1e-5) -> ParamLogits:
    """Central finite differences of the total loss over every logit."""
    base = logits.flat()
    out = np.empty_like(base)
    for i in range(base.size):
        v = base.copy()
        v[i] += h
        hi = _evaluate_logits(prob, logits.unflat(v), config)[0].terms[0]
        v[i] -= 2 * h
        lo = _evaluate_logits(prob, logits.unflat(v), config)[0].terms[0]
        out[i] = (hi - lo) / (2 * h)
    return logits.unflat(out)


def gradient_check(prob: FitProblem, logits: ParamLogits, config: FitConfig, h=1e-5, scale_floor=1.0) -> float:
    """Largest ``|analytic - numeric| / max(|analytic|, |numeric|, scale_floor)``."""
    ana = _evaluate_logits(prob, logits, config, need_grad=True)[1].flat()
    num = numerical_gradients(prob, logits, config, h).flat()
    denom = np.maximum(np.maximum(np.abs(ana), np.abs(num)), scale_floor)
    return float(np.max(np.abs(ana - num) / denom))


def initial_logits(prob: FitProblem, config: FitConfig, rng=None) -> ParamLogits:
    """Uniform seed distribution; every affinity near ``p0 ** (1/k)``.

    ``p0`` is the mean observed hyperedge size over |V|, so the k-fold product
    starts close to the empirical attachment rate.
    """
    rng = as_rng(rng)
    f = config.prob_floor
    k = max(prob.k, 1)
    sizes = prob.card_core + prob.card_fringe
    p0 = float(np.clip(sizes.mean() / prob.node_count if sizes.size else 0.5, f, 1 - f))
    base = p0 ** (1.0 / k)
    noise = config.init_noise * base

    def draw():
        t = base + rng.uniform(-noise, noise, size=(prob.k, 2, 2))
        return unsquash(np.clip(t, 2 * f, 1 - 2 * f), f)

    return ParamLogits(np.zeros(prob.core.size), draw(), draw())


def fit(H: AttributedHypergraph, partition: CoreFringePartition, config: FitConfig | None = None,
        rng=None, init: ParamLogits | None = None, callback=None):
    """Fit NoAH to ``H`` by full-batch Adam on the unconstrained logits.

    Returns
    -------
    params : NoahParams
    trace : FitTrace
        One record per epoch, evaluated before that epoch's update.
    """
    cfg = config or FitConfig()
    rng = as_rng(rng)
    prob = FitProblem.from_hypergraph(H, partition)
    trace = FitTrace(skipped_edges=list(prob.skipped))
    if prob.num_edges == 0:
        raise ValueError("no hyperedge intersects the core")
    logits = init.copy() if init is not None else initial_logits(prob, cfg, rng)
    if cfg.grad_check:
        trace.grad_check_error = gradient_check(prob, logits, cfg)
        logger.info("max relative gradient error: %.3e", trace.grad_check_error)
        ev = _evaluate_logits(prob, logits, cfg)[0]
        if any(sorted_mse_tied(o, e) for o, e in (
                (prob.deg_core, ev.exp_deg_core), (prob.deg_fringe, ev.exp_deg_fringe),
                (prob.card_core, ev.exp_card_core), (prob.card_fringe, ev.exp_card_fringe))):
            trace.grad_check_ties = True
            logger.warning("tied expected degrees or sizes at the check point: the sorted-MSE "
                           "loss is not differentiable there, so finite differences may disagree")

    theta = logits.flat()
    m1 = np.zeros_like(theta)
    m2 = np.zeros_like(theta)
    b1, b2 = cfg.beta1, cfg.beta2
    for t in range(1, cfg.epochs + 1):
        ev, grad = _evaluate_logits(prob, logits.unflat(theta), cfg, need_grad=True)
        if not np.isfinite(ev.terms[0]):
            raise FitDivergedError(f"non-finite loss at epoch {t}")
        trace.record(ev.terms)
        g = grad.flat()
        m1 = b1 * m1 + (1 - b1) * g
        m2 = b2 * m2 + (1 - b2) * g * g
        step = cfg.learning_rate * (m1 / (1 - b1 ** t)) / (np.sqrt(m2 / (1 - b2 ** t)) + cfg.adam_eps)
        theta = theta - step
        if callback is not None:
            callback(t, ev.terms)
    return logits.unflat(theta).to_params(cfg.prob_floor), trace
