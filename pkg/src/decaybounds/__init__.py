"""Certified decay bounds for entries of functions of banded non-Hermitian
matrices, with a dense oracle and an inexact Arnoldi driver."""
from .bounds import (CROUZEIX, MU_INVERSE, MU_PHI1, StieltjesMeasure, exp_bound, expsqrt_bound,
                     invsqrt_bound, kron_phi1_bound, laplace_stieltjes_bound, phi1_bound)
from .faber import (DecayEnvelope, faber_coefficients, faber_poly_apply, generic_bound_thm2,
                    optimize_tau, phi, psi, tail_bound_thm1)
from .krylov import (ArnoldiDecomposition, ExactOperator, InexactSchedule, PerturbedOperator,
                     apriori_residual_bound, arnoldi, inexact_arnoldi_run, krylov_approx,
                     relaxation_schedule, residual_rm)
from .matrices import BandedMatrix, ToeplitzSpec, band_distance, kron_sum, toeplitz
from .oracle import MatrixFunctionKind, eval_matfun
from .regions import DiskRegion, EllipseRegion, fit_disk, fit_ellipse, fov_boundary

__version__ = "0.1.0"
