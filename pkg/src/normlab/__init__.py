"""normlab: a numerical laboratory for a random projection-plus-l1 norm.

Builds the norm |x|_A + (eta / sqrt n) * sum |x_i| from a rotation-invariant
half-rank projection, measures how close points and 2-D subspaces come to
being Euclidean and norm-one complemented, and checks every quantitative
estimate the construction leans on, down to an exact-arithmetic audit of the
parameter chain.
"""

from .exactparams import (
    ChainResult,
    ConditionResult,
    ParameterSet,
    RatInterval,
    UndecidableConditionError,
    check_parameter_chain,
    pi_interval,
    sqrt_interval,
)
from .lemmas import (
    LemmaReport,
    mc_subspace_volume,
    run_parameter_chain,
    small_support_incidence,
    support_bracket,
    verify_approx_eigenvector,
    verify_frame_escape,
    verify_goodness_equivalence,
    verify_goodness_floor,
    verify_range_support_gap,
    verify_shear_collinearity,
    verify_sign_continuity,
    verify_sign_vector_separation,
    verify_sigma_spread,
    verify_support_characterization,
    verify_typicality_probability,
)
from .linalg import (
    Frame,
    GammaNet,
    NetBudgetError,
    ProjectionPair,
    Seed,
    distance_to_subspace,
    gamma_net,
    principal_sine,
    sample_frame,
    sample_projection,
    sample_unit_sphere,
    subspace_incidence_probability,
)
from .norms import (
    DualNormError,
    GoodnessCertificate,
    NormSpec,
    SupportFunctional,
    dual_norm,
    dual_norm_upper_bound,
    goodness,
    make_norm_spec,
    norm,
    norm_A,
    norm_subgradient,
    projection_ratio_norm,
    spec_from_projection,
    support_functional,
)
from .subspaces import (
    EuclideanEstimate,
    SignDecomposition,
    SignSetAnalysis,
    SubspaceReport,
    TwoDSubspace,
    WorstGoodness,
    closeness_to_eigenspaces,
    cyclic_interval_signs,
    e_set,
    euclidean_constant,
    probe_subspace,
    projection_op_norm,
    prune_separated,
    sample_two_d_subspace,
    sign_decomposition,
    sigma_set,
    span_two,
    two_d_subspace,
    typical_check,
    worst_goodness,
)

__version__ = "0.1.0"

__all__ = [
    "ChainResult",
    "ConditionResult",
    "DualNormError",
    "EuclideanEstimate",
    "Frame",
    "GammaNet",
    "GoodnessCertificate",
    "LemmaReport",
    "NetBudgetError",
    "NormSpec",
    "ParameterSet",
    "ProjectionPair",
    "RatInterval",
    "Seed",
    "SignDecomposition",
    "SignSetAnalysis",
    "SubspaceReport",
    "SupportFunctional",
    "TwoDSubspace",
    "UndecidableConditionError",
    "WorstGoodness",
    "check_parameter_chain",
    "closeness_to_eigenspaces",
    "cyclic_interval_signs",
    "distance_to_subspace",
    "dual_norm",
    "dual_norm_upper_bound",
    "e_set",
    "euclidean_constant",
    "gamma_net",
    "goodness",
    "make_norm_spec",
    "mc_subspace_volume",
    "norm",
    "norm_A",
    "norm_subgradient",
    "pi_interval",
    "principal_sine",
    "probe_subspace",
    "projection_op_norm",
    "projection_ratio_norm",
    "prune_separated",
    "run_parameter_chain",
    "sample_frame",
    "sample_projection",
    "sample_two_d_subspace",
    "sample_unit_sphere",
    "sigma_set",
    "sign_decomposition",
    "small_support_incidence",
    "span_two",
    "spec_from_projection",
    "sqrt_interval",
    "subspace_incidence_probability",
    "support_bracket",
    "support_functional",
    "two_d_subspace",
    "typical_check",
    "verify_approx_eigenvector",
    "verify_frame_escape",
    "verify_goodness_equivalence",
    "verify_goodness_floor",
    "verify_range_support_gap",
    "verify_shear_collinearity",
    "verify_sign_continuity",
    "verify_sign_vector_separation",
    "verify_sigma_spread",
    "verify_support_characterization",
    "verify_typicality_probability",
    "worst_goodness",
]
