"""Certified Gaussian-sum kernels, operator splittings, and solvers
for Coulomb-type problems in the anisotropic Gauss-Hermite algebra."""

from .expsum import (ExpSum, ExpSumParams, build_exp_sum, error_bound,
                     validate_phi)
from .gaussalg import (GaussFactor, GaussHermiteTerm, GaussianExpansion,
                       compress, dump_expansion, evaluate_batch,
                       expansion_l2_inner, expansion_of, fourier, gram_matrix,
                       h1_norm, inverse_fourier, load_expansion, product,
                       prune, seminorm_inner, sobolev_inner)
from .operators import (ContractionEstimate, MolecularSystem, OperatorConfig,
                        contraction_constants, gamma_threshold, select_gamma,
                        theta_const)
from .solver import (PerturbationCertificate, SolveReport, build_schedule,
                     neumann_solve, perturbation_certificate)
from .eigensolver import (InverseIterationConfig, IterationHistory,
                          default_initial_guess, invit_step, rayleigh,
                          run_inverse_iteration)

__version__ = "0.1.0"
