"""
Monte Carlo versus orthogonal nodes on the sphere
=================================================

For the spherical stage the mean-square error of plain Monte Carlo is a
series in the Gegenbauer coefficients lambda_k. Orthogonal nodes cancel
the k=2 term exactly, which is why they win at small M_S.
"""

from srff.analysis import mc_error_series, spherical_stage_mse
from srff.orthopoly import lambda_coeffs

beta = 1.0
for d in (3, 4, 8):
    lam = lambda_coeffs(d, beta, 6).as_array()
    print(f"d={d}: lambda_0..6 =", " ".join(f"{v:+.3e}" for v in lam))

reps = 50_000
for d in (4, 8):
    mc, se_mc = spherical_stage_mse("mc", d, beta, d, reps, seed=0, stream_id=1)
    omc, se_omc = spherical_stage_mse("omc", d, beta, d, reps, seed=0, stream_id=2)
    print(f"d={d}, M_S={d}")
    print(f"  MC : {mc:.3e} +- {se_mc:.1e}   series {mc_error_series(d, beta, d):.3e}")
    print(f"  OMC: {omc:.3e} +- {se_omc:.1e}   bound  "
          f"{mc_error_series(d, beta, d, k_min=4, factor=3):.3e}")
