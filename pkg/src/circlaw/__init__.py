"""circlaw: random sign matrices with fixed row sums, their spectra, and the
anticoncentration machinery behind their circular-law behavior."""

__version__ = "0.1.0"

from .sampler import (FIXED_SUM, IID, UNION_S, CollapsedLaw, SignVector,
                      SkewedBernoulli, UnionSetS, collapse_vector,
                      collapsed_coordinate_law, sample_fixed_sum_vector,
                      sample_row_sum_matrix, sample_skewed_bernoulli_vector,
                      sample_union_S_vector, type_split_probabilities)
from .spectral import (EsdFunction, SpectrumSample, circular_cdf,
                       eigenvalues_dense, esd_from_reduction,
                       ks_distance_to_circular, normalized_esd,
                       spectrum_via_reduction)
from .logdet import (LogDetDecomposition, default_split_index,
                     distance_to_span, logdet_via_distances,
                     replacement_statistic, split_logdet)
from .singular import (SingularSpectrum, cofactor_identity_check,
                       interlacing_check, least_singular_tail,
                       negative_second_moment_check, singular_values)
from .smallball import (SmallBallQuery, collapsed_ball_probability,
                        erdos_extremal_bound, rho_iid, rho_relation_check,
                        rho_star)
from .gaps import (Gap, express_generators, gap_closeness, gap_enumerate,
                   gap_pigeonhole_bound)
from .distance import (DistanceDecomposition, ProjectionOperator,
                       decompose_distance, moment_bound_check,
                       projection_complement, talagrand_tail_experiment)
from .experiments import ExperimentConfig, run
