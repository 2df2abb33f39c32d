"""Spherical-radial Fourier features for the Gaussian kernel."""

from .analysis import (ErrorReport, bound_thm1, bound_thm2, mc_error_series, parseval_sum,
                       rel_frobenius, replicate_mse, spectral_deviation, spherical_stage_mse)
from .exceptions import ConvergenceError, DataError, DomainError, PreconditionError, SRFFError
from .features import (Dataset, FeatureMap, build_map, build_orf, build_qmc_halton, build_rff,
                       build_sr, feature_matrix, gram_exact, gram_hat, kappa_hat)
from .io import dumps_rule, loads_rule, read_rule, write_rule
from .orthopoly import gegenbauer, harmonic_dim, lambda_coeffs, lambda_k
from .radial import KernelSpec, RadialRule, f_bar, gauss_laguerre, radial_quadrature_error, radii
from .spherical import (SphericalRule, okq_weights, sample_haar_orthogonal, sample_sphere,
                        sample_sphere_mc, sample_sphere_omc, sample_sphere_somc)

__version__ = "0.1.0"
