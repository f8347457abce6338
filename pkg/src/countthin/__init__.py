"""Count splitting for negative binomial data.

Decomposes a nonnegative-integer count matrix into mutually independent
folds under a negative binomial model, and provides the downstream tools
built on that: dispersion estimation, NB regression with Wald tests,
cluster-number selection, differential expression, and cluster
reproducibility checks.
"""

from .errors import (
    ConvergenceWarning,
    CountThinError,
    DataError,
    EstimationError,
    ParameterError,
    SingularDesignError,
)
from .rng import RngStream, derive_stream_id, uniform_block
from .distributions import (
    NBParams,
    nb_log_pmf,
    sample_beta,
    sample_beta_binomial,
    sample_dirichlet,
    sample_dirichlet_multinomial,
    sample_gamma,
    sample_multinomial,
    sample_nb,
    sample_poisson,
)
from .matrix import CountMatrix
from .thinning import (
    FoldSet,
    ThinPlan,
    correlation_at_infinite_bprime,
    fisher_information_nb,
    fold_complement,
    fold_information,
    nb_count_split,
    poisson_count_split,
    thinning_moments,
)
from .glm import GlmFit, fit_nb_glm, wald_pvalue
from .dispersion import DispersionEstimate, estimate_dispersions, nb_profile_mle_dispersion
from .evaluation import (
    ClusterModel,
    ConfusionResult,
    KSelectionResult,
    adjusted_rand_index,
    best_diagonal_permutation,
    de_test,
    intradataset_cv_naive,
    intradataset_cv_split,
    kmeans_log,
    nbcv_select_k,
    sample_split_baseline,
    select_k,
)
from .simgen import SimTruth, generate_dataset, generate_toy

__version__ = "0.1.0"
