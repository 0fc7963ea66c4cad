"""L^p controls, absolutely continuous curves and their evolutions in matrix Lie groups."""
from . import controls
from .ac_curve import ACCurve, C1Map, glue_ac, pushforward_c1, split_ac, weak_integral
from .errors import *  # noqa: F401,F403
from .evolution import (EvolConfig, EvolResult, convergence_study, directional_derivative_evol,
                        evol_endpoint, evolve, lp_lq_consistency, residual)
from .group_curve import (GroupACCurve, delta_homomorphism, glue_group, inverse, left_translate,
                          product, push_homomorphism, reparam_group, split_group)
from .lebesgue import (LpElement, glue, inclusion_check, lp_seminorm, reparam_affine, split,
                       subdivide, subdivision_norms)
from .lie import (GL, SE2, SO3, Heisenberg, PositiveScalars, Translations, exp_alg, hom_det,
                  log_grp, make_group, maurer_cartan)
from .measurable import (EUCLIDEAN, FROBENIUS, CompactSet, Interval, PiecewiseCurve, Seminorm,
                         ae_equal, from_borel_samples, lusin_compact_approx, lusin_exhaustion)
from .quadrature import QuadratureConfig

__version__ = "0.1.0"
