"""Korn-type inequalities on thin domains: geometry, finite elements,
generalized eigenproblems and quadrature checks of explicit-constant bounds."""

__version__ = "0.1.0"

from .errors import (BadInterval, BoundaryConditionViolated, CutoffMissing, EmptySelector,
                     KornLabError, MixedTermsPresent, NoConvergence, NonPositiveInput,
                     NonPositiveThickness, NotElliptic, PeriodicIncompatibleProfiles,
                     SingularSystem, UnknownDescriptor)
from .geometry import (AXIAL_FACES, FACES, PROFILE_FACES, Affine, BoundarySelector, Constant,
                       Cosine, DistanceFunction, Polynomial, Profile, Sum, ThinDomain2D,
                       distance_to_gamma1, domain_metrics, eval_profile, rectangle)
from .operators import (ConstCoeffOperator, ShearMap, VarCoeffOperatorLa, corrected_sheared_lambda,
                        ellipticity_constants, flatten_operator, lambda_a, laplacian,
                        shear_transform)
from .discretize import Mesh2D, assemble, build_mesh, constrain
from .solve import (Pencil, dense_generalized_eig, korn_first_constant, smallest_generalized_eig,
                    solve_elliptic, strong_ratio_sup)
from .ansatz import AnalyticVectorField, cosh_sine_field, rigid_field, shear_ansatz
from .report import RunConfig, emit_report
