"""Schur-Nevanlinna recursion, model-space kernel geometry and operator diagnostics on the disc."""
from .disc import (DiscSequence, blaschke_factor, blaschke_partial, blaschke_product,
                   carleson_constant, generate_sequence, moebius, pseudohyperbolic,
                   thinness_profile)
from .errors import *  # noqa: F401,F403
from .kernels import (DistanceTrace, KernelFamilySpec, completeness_trace, dist_excluded_node,
                      dist_mw, dist_nrk, dist_nrk_gamma_form, dist_plmu, gram_kernels,
                      malmquist_walsh, model_kernel, szego_gram, verify_useful_identity)
from .operators import (HankelSection, SpectralReport, aos_tail_constants, compactness_profile,
                        cross_basis_experiment, gram_tail_deviation, hankel_section,
                        hankel_section_rational, nehari_lower_bound, orthogonalizer_norm_trace,
                        riesz_bounds)
from .oracle import (CircleGrid, GridFn, adjoint_eigen_check, gram_distance, kernel_gram_distance,
                     lemma_g_check, model_projection, szego_distance)
from .schur import (AtomicSingular, BlaschkeNode, Constant, LowerStep, MoebiusCompose,
                    ParamSeq, Product, RaiseStep, SchurFn, inverse_process_I,
                    inverse_process_II, inverse_process_III, schur_forward)

__version__ = "0.1.0"
