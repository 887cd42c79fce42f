"""Runtime as the data grow.

Duplicating every hyperedge multiplies m; duplicating every attribute
column multiplies k. Generation should grow about linearly in m, while a
fit epoch is dominated by core-group terms that do not depend on k.
"""
import time

import numpy as np

from noah import FitConfig, fit, generate, umhs_partition
from noah.datasets import duplicate_attributes, workspace_like

H = workspace_like(0)
P = umhs_partition(H, 10, rng=0)
cfg = FitConfig(epochs=5)
params, _ = fit(H, P, cfg, rng=0)

ms, gen_t = [], []
for f in (1, 4, 16, 64):
    t0 = time.perf_counter()
    generate(params, P, H.attributes, H.num_edges * f, rng=0)
    ms.append(H.num_edges * f)
    gen_t.append(time.perf_counter() - t0)
    print(f"generate m = {ms[-1]:>6}: {gen_t[-1]:.3f}s")

ks, fit_t = [], []
for f in (1, 4, 16, 64):
    Hk = duplicate_attributes(H, f)
    t0 = time.perf_counter()
    fit(Hk, P, cfg, rng=0)
    ks.append(Hk.num_attributes)
    fit_t.append(time.perf_counter() - t0)
    print(f"fit k = {ks[-1]:>3}: {fit_t[-1]:.3f}s")

print("log-log slope, generation vs m:", np.polyfit(np.log(ms), np.log(gen_t), 1)[0].round(2))
print("log-log slope, fit vs k:", np.polyfit(np.log(ks), np.log(fit_t), 1)[0].round(2))
