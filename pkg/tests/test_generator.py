import numpy as np
import pytest
from scipy import stats

from noah.generator import (
    NoahParams,
    NoahSampler,
    core_attach_prob,
    fringe_attach_prob,
    generate,
    generate_hyperedge,
    mix_core_attributes,
    sample_hyperedge,
)
from noah.hgraph import degree_vector, size_vector
from noah.partition import CoreFringePartition

from oracles import attach_prob


def _theta(k, diag, off):
    t = np.empty((k, 2, 2))
    t[:, 0, 0] = t[:, 1, 1] = diag
    t[:, 0, 1] = t[:, 1, 0] = off
    return t


class TestAttachProbabilities:
    def test_half_entries(self):
        params = NoahParams.uniform(2, 2)
        X = np.array([[0, 1], [1, 1]])
        assert core_attach_prob(params, X, 0, 1) == pytest.approx(0.25)

    def test_single_lookup(self):
        t = np.array([[[0.9, 0.1], [0.1, 0.9]]])
        params = NoahParams([0.5, 0.5], t, t)
        assert core_attach_prob(params, np.array([[1], [1]]), 0, 1) == pytest.approx(0.9)

    def test_two_of_three_agree(self):
        t = _theta(3, 0.8, 0.2)
        params = NoahParams([0.5, 0.5], t, t)
        X = np.array([[1, 0, 1], [1, 0, 0]])
        assert core_attach_prob(params, X, 0, 1) == pytest.approx(0.8 * 0.8 * 0.2)

    def test_same_node_rejected(self):
        with pytest.raises(ValueError):
            core_attach_prob(NoahParams.uniform(1, 1), np.array([[0]]), 0, 0)

    def test_fringe_half(self):
        params = NoahParams.uniform(1, 3)
        assert fringe_attach_prob(params, [0, 1, 1], 0, np.zeros((1, 3), int)) == pytest.approx(0.125)

    def test_fringe_lookup(self):
        tf = np.array([[[0.2, 0.6], [0.3, 0.7]]])
        params = NoahParams([1.0], np.full((1, 2, 2), 0.5), tf)
        assert fringe_attach_prob(params, [0], 0, np.array([[1]])) == pytest.approx(0.6)

    def test_fringe_matches_product(self):
        rng = np.random.default_rng(0)
        tf = rng.uniform(0.05, 0.95, size=(2, 2, 2))
        params = NoahParams([1.0], np.full((2, 2, 2), 0.5), tf)
        X = np.array([[0, 1], [1, 0], [1, 1]])
        for mix in ([0, 0], [0, 1], [1, 0], [1, 1]):
            for f in range(3):
                assert fringe_attach_prob(params, mix, f, X) == pytest.approx(attach_prob(tf, mix, X[f]))


class TestMixing:
    def test_all_ones_and_zeros(self):
        X = np.array([[1, 0], [1, 0], [1, 0]])
        for seed in range(20):
            np.testing.assert_array_equal(mix_core_attributes(X, {0, 1, 2}, seed), [1, 0])

    def test_frequency(self):
        X = np.array([[1], [1], [0]])
        rng = np.random.default_rng(1)
        draws = [mix_core_attributes(X, [0, 1, 2], rng)[0] for _ in range(100_000)]
        assert np.mean(draws) == pytest.approx(2 / 3, abs=0.01)

    def test_empty_group(self):
        with pytest.raises(ValueError):
            mix_core_attributes(np.zeros((2, 1)), set(), 0)


class TestParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            NoahParams([0.5, 0.6], np.full((1, 2, 2), 0.5), np.full((1, 2, 2), 0.5))
        with pytest.raises(ValueError):
            NoahParams([1.0], np.full((1, 2, 2), 1.0), np.full((1, 2, 2), 0.5))
        with pytest.raises(ValueError):
            NoahParams([1.0], np.full((1, 2, 3), 0.5), np.full((1, 2, 3), 0.5))

    def test_json_round_trip(self):
        rng = np.random.default_rng(3)
        p = rng.dirichlet(np.ones(7))
        params = NoahParams(p, rng.uniform(0.1, 0.9, (3, 2, 2)), rng.uniform(0.1, 0.9, (3, 2, 2)))
        back = NoahParams.from_json(params.to_json())
        np.testing.assert_allclose(back.p_seed, params.p_seed, rtol=1e-15)
        np.testing.assert_array_equal(back.theta_core, params.theta_core)


def _setup(n_core=3, n_fringe=4, k=2, seed=0, diag=0.7, off=0.3):
    rng = np.random.default_rng(seed)
    n = n_core + n_fringe
    X = (rng.random((n, k)) < 0.5).astype(int)
    P = CoreFringePartition(frozenset(range(n_core)), frozenset(range(n_core, n)))
    p = rng.dirichlet(np.ones(n_core))
    params = NoahParams(p, _theta(k, diag, off), _theta(k, diag * 0.9, off * 1.1))
    return X, P, params


class TestGenerateHyperedge:
    def test_vanishing_affinity_gives_seed_only(self):
        X, P, _ = _setup(4, 5)
        params = NoahParams(np.full(4, 0.25), np.full((2, 2, 2), 1e-6), np.full((2, 2, 2), 1e-6))
        rng = np.random.default_rng(0)
        lone = sum(len(generate_hyperedge(params, P, X, rng)) == 1 for _ in range(10_000))
        # union bound: P(any attachment) <= |V| * 1e-6 per draw
        assert lone >= 10_000 * (1 - 9 * 1e-6) - 3

    def test_near_identity_affinity(self):
        eps = 0.05
        k, nc = 2, 6
        X = np.zeros((nc + 2, k), dtype=int)
        P = CoreFringePartition(frozenset(range(nc)), frozenset({nc, nc + 1}))
        params = NoahParams(np.full(nc, 1 / nc), _theta(k, 1 - eps, eps), _theta(k, 0.5, 0.5))
        sampler = NoahSampler(params, P, X)
        rng = np.random.default_rng(2)
        sizes = [len(sampler.draw(rng).core_group) for _ in range(20_000)]
        expected = (nc - 1) * (1 - eps) ** k + 1
        sd = np.sqrt((nc - 1) * (1 - eps) ** k * (1 - (1 - eps) ** k) / 20_000)
        assert abs(np.mean(sizes) - expected) < 4 * sd

    def test_single_core_seed_deterministic(self):
        X, P, _ = _setup(1, 4)
        params = NoahParams([1.0], _theta(2, 0.5, 0.5), _theta(2, 0.5, 0.5))
        rng = np.random.default_rng(0)
        assert {sample_hyperedge(params, P, X, rng).seed for _ in range(50)} == {0}

    def test_always_contains_seed(self):
        X, P, params = _setup(5, 10, seed=4)
        sampler = NoahSampler(params, P, X)
        rng = np.random.default_rng(0)
        for _ in range(500):
            d = sampler.draw(rng)
            assert d.seed in d.core_group
            assert set(d.core_group) <= P.core and set(d.fringe_group) <= P.fringe

    def test_cf_mode_uses_all_nodes(self):
        X, _, _ = _setup(3, 3)
        n = X.shape[0]
        params = NoahParams(np.full(n, 1 / n), _theta(2, 0.3, 0.1), _theta(2, 0.3, 0.1))
        rng = np.random.default_rng(0)
        seeds = {sample_hyperedge(params, None, X, rng, mode="noah-cf").seed for _ in range(400)}
        assert seeds == set(range(n))

    def test_wrong_p_seed_length(self):
        X, P, _ = _setup(3, 3)
        with pytest.raises(ValueError):
            NoahSampler(NoahParams.uniform(4, 2), P, X)


class TestGenerate:
    def test_m_validation(self):
        X, P, params = _setup()
        with pytest.raises(ValueError):
            generate(params, P, X, 0, 0)
        assert generate(params, P, X, 1, 0).num_edges == 1

    def test_deterministic(self):
        X, P, params = _setup(seed=7)
        a = generate(params, P, X, 200, 42)
        b = generate(params, P, X, 200, 42)
        assert a == b
        np.testing.assert_array_equal(a.attributes, X)

    def test_every_edge_hits_core(self):
        X, P, params = _setup(4, 8, seed=3)
        H = generate(params, P, X, 300, 0)
        assert all(set(e) & P.core for e in H.hyperedges)

    def test_constant_theta_size_distribution(self):
        nc, nf, k = 5, 8, 3
        pc, pf = 0.4, 0.25
        X = (np.random.default_rng(0).random((nc + nf, k)) < 0.5).astype(int)
        P = CoreFringePartition(frozenset(range(nc)), frozenset(range(nc, nc + nf)))
        params = NoahParams(np.full(nc, 1 / nc), np.full((k, 2, 2), pc ** (1 / k)), np.full((k, 2, 2), pf ** (1 / k)))
        sizes = size_vector(generate(params, P, X, 20_000, 1))
        # 1 + Binomial(nc-1, pc) + Binomial(nf, pf), by convolution
        pmf = np.convolve(stats.binom.pmf(np.arange(nc), nc - 1, pc), stats.binom.pmf(np.arange(nf + 1), nf, pf))
        observed = np.bincount(sizes - 1, minlength=pmf.size)[: pmf.size]
        keep = pmf * sizes.size >= 5
        exp = pmf[keep] * sizes.size
        obs = observed[keep]
        chi2 = stats.chisquare(obs, exp * obs.sum() / exp.sum())
        assert chi2.pvalue > 0.001

    def test_shared_mix_flag(self):
        X, P, params = _setup(3, 6, seed=2)
        a = generate(params, P, X, 50, 5, shared_mix=True)
        b = generate(params, P, X, 50, 5, shared_mix=False)
        assert a.num_edges == b.num_edges == 50

    def test_heavy_tail_with_zipf_seeds(self):
        # Zipf seed law and near-deterministic affinities that never attach anyone:
        # degree sequence inherits the seed law's heavy tail
        nc, k = 200, 1
        X = np.zeros((nc, k), dtype=int)
        P = CoreFringePartition(frozenset(range(nc)), frozenset())
        w = 1 / np.arange(1, nc + 1) ** 1.2
        params = NoahParams(w / w.sum(), np.full((k, 2, 2), 1e-6), np.full((k, 2, 2), 1e-6))
        deg = np.sort(degree_vector(generate(params, P, X, 20_000, 0)))[::-1]
        ccdf = np.arange(1, deg.size + 1) / deg.size
        # log-log CCDF is close to a straight line over two decades of degree
        top = deg > 10
        slope, _, r, _, _ = stats.linregress(np.log(deg[top]), np.log(ccdf[top]))
        assert r ** 2 > 0.95 and -2.0 < slope < -0.5
        assert deg[0] > 50 * np.median(deg)
