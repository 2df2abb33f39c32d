"""
Approximating a Gaussian kernel matrix
======================================

Compare spherical-radial features with random Fourier features on a
synthetic data set, at equal numbers of frequencies.
"""

import numpy as np

from srff import KernelSpec, build_map, gram_exact, gram_hat, rel_frobenius
from srff.datasets import median_heuristic, synthetic_gaussian

d = 8
data = synthetic_gaussian(500, d, seed=0)
spec = KernelSpec(d, median_heuristic(data))
K = gram_exact(spec, data)
print(f"sigma (median heuristic) = {spec.sigma:.3f}")

print(" M     SR_OMC    SR_OKQ_OMC  RFF       ORF       QMC")
for M in (d, 2 * d, 4 * d, 8 * d):
    row = []
    for method in ("SR_OMC", "SR_OKQ_OMC", "RFF", "ORF", "QMC_HALTON"):
        errs = [rel_frobenius(K, gram_hat(build_map(method, spec, M_R=1, M_S=M, M=M, seed=s), data))
                for s in range(10)]
        row.append(np.mean(errs))
    print(f"{M:3d}  " + "  ".join(f"{e:.5f}" for e in row))
