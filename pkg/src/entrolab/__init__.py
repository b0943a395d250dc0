"""Numerical experiments on topological entropy, dominated splittings and homology growth.

The function API lives in the submodules (``dynamics``, ``entropy``,
``hyperbolicity``, ``homology``, ``metric_entropy``).  The scikit-learn
style wrappers are in ``estimators``, and ``cli`` runs experiments from
config files.
"""

__version__ = "0.1.0"

from .dynamics import (Henon, MapSpec, PerturbedToral, Rotation, StandardMap, ToralAutomorphism,
                       cat_map, identity_map, lift_matrix, make_map, map_eval, map_inverse,
                       map_jacobian, orbit)
from .entropy import (BallSpec, CountCurve, EntropyEstimate, PointCloud, box_cover,
                      cover_entropy, entropy_estimate, expansiveness_profile, growth_rate,
                      in_dynamical_ball, separated_count, spanning_count, tail_entropy)
from .exceptions import (ConfigError, EntrolabError, EscapedError, NotInvertibleError,
                         NotPeriodicError, PreconditionError, UnavailableError)
from .homology import (ConjectureReport, HomologyAction, conjecture_report, exterior_power,
                       homology_action, spectral_radius)
from .hyperbolicity import (PeriodicAnalysis, PlissParams, PlissResult, SplittingEstimate,
                            averaged_contraction, cocycle_product, domination_margin,
                            estimate_splitting, finite_time_exponents, periodic_orbit_analysis,
                            pliss_theta, pliss_times)
from .metric_entropy import (BoxPartition, EmpiricalMeasure, metric_entropy_estimate,
                             partition_entropy, refine_partition, variational_check)
