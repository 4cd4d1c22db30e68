"""Two-path assessment of classifiers as posterior-probability estimators.

Construct a Gaussian-mixture generative model, compute its exact category
posteriors, train a softmax classifier on samples from it, and measure how
the two disagree as a function of local density and inter-category
sparsity.
"""

from ._version import __version__
from .mixtures import (
    Gaussian1D,
    Gaussian2D,
    LabeledDataset,
    Mixture1D,
    Mixture2D,
    pdf_1d,
    pdf_2d,
    preset,
    sample_labeled_1d,
    sample_labeled_2d,
)
from .oracle import (
    FactorReport,
    factor_report,
    posterior_1d,
    posterior_2d,
    sparsity_hg,
    sparsity_two_cluster,
)
from .embedding import (
    ComponentWarp,
    IsometricLift,
    PlanarBijection,
    ReconstructiveMap,
    bijection_jacobian,
    embed,
    invert,
    make_lift,
    posterior_via_embedding,
)
from .metrics import abs_difference, bin_average, kl_divergence, rank_correlation
from .mlp import MLPConfig, MLPModel, TrainReport, forward, gradient, loss, predict_posterior, train
from .sweep import (
    EvalRecord,
    EvalSpec,
    GridSpec,
    PathSpec,
    enumerate_grid,
    marginalize,
    run_grid_point,
    run_path,
    run_sweep,
    scatter_factors,
)

__all__ = [name for name in dir() if not name.startswith("_")]
