"""
The radial rule
===============

The Gaussian kernel's spectral measure splits into a radius and a direction.
After the substitution xi = sigma^2 r^2 / 2 the radius follows a Gamma(d/2, 1)
law, and a generalized Gauss-Laguerre rule integrates it.
"""

import math

import numpy as np

from srff import KernelSpec, gauss_laguerre, radial_quadrature_error, radii

# A one-node rule sits at the mean of Gamma(d/2, 1).
rule = gauss_laguerre(4, 1)
print("d=4, M_R=1:", rule.xi, rule.a)

# Larger rules are exact for moments up to degree 2 M_R - 1.
d, M_R = 8, 5
rule = gauss_laguerre(d, M_R)
for p in range(2 * M_R + 1):
    exact = math.exp(math.lgamma(d / 2 + p) - math.lgamma(d / 2))
    print(f"p={p:2d}  rule {rule.moment(p):.12e}  exact {exact:.12e}")

spec = KernelSpec(d, sigma=1.0)
print("radii:", np.round(radii(rule, spec), 4))

# With the sphere average done exactly, only the radial error remains.
# It falls off super-exponentially in M_R.
spec = KernelSpec(4, 1.0)
for M_R in range(1, 8):
    err = radial_quadrature_error(gauss_laguerre(4, M_R), spec, dist=1.0)
    print(f"M_R={M_R}  radial error {err: .3e}")
