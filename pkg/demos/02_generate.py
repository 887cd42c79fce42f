"""Sample hyperedges from hand-set parameters.

A seed is drawn from the core, core nodes join with a probability that
multiplies one affinity per attribute, and fringe nodes join according to
a random mixture of the core group's attributes. A steep seed distribution
gives a heavy-tailed degree sequence.
"""
import numpy as np

from noah import NoahParams, degree_vector, generate, size_vector
from noah.datasets import zipf_probs
from noah.partition import CoreFringePartition

rng = np.random.default_rng(1)
n_core, n_fringe, k = 40, 60, 2
X = (rng.random((n_core + n_fringe, k)) < 0.5).astype(int)
partition = CoreFringePartition(frozenset(range(n_core)), frozenset(range(n_core, n_core + n_fringe)))

theta = np.empty((k, 2, 2))
theta[:, 0, 0] = theta[:, 1, 1] = 0.3 ** (1 / k)   # same value: likely to join
theta[:, 0, 1] = theta[:, 1, 0] = 0.02 ** (1 / k)  # different value: rarely
params = NoahParams(zipf_probs(n_core, 1.2), theta, theta * 0.3)

H = generate(params, partition, X, m=5000, rng=2)
deg = np.sort(degree_vector(H))[::-1]
sizes = size_vector(H)
vals, counts = np.unique(sizes, return_counts=True)
print("hyperedge sizes:", dict(zip(vals.tolist(), counts.tolist())))
print("top degrees:", deg[:8].tolist(), " median degree:", int(np.median(deg)))

# same parameters with all nodes in the core: the all-core ablation
Hcf = generate(NoahParams(zipf_probs(X.shape[0], 1.2), theta, theta), None, X, m=5000, rng=2, mode="noah-cf")
print("all-core variant, mean size:", round(float(size_vector(Hcf).mean()), 2))
