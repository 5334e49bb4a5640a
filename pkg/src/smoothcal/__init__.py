"""smoothcal: exact smooth calibration error and calibration-aware training.

The package computes the empirical smooth calibration error (and its dual
over logits) exactly via a chain linear program, provides three learners
whose training dynamics are driven by functional gradients (gradient
boosting trees, kernel boosting, a symmetric two-layer network), evaluates
the closed-form training-side calibration bounds, and ships a declarative
sweep runner for the desk-scale experiments.
"""

from .bounds import (
    BoundInputs,
    bound_report,
    gbt_training_bound,
    kernel_training_bound,
    l1_grad_norm,
    misclassification_rate,
    nn_training_bound,
    verify_stump_margin,
)
from .chain_lp import ChainLpProblem, chain_lp_grid_value, solve_chain_lp
from .data import (
    CsvLoadError,
    Dataset,
    SplitSpec,
    gen_gaussian_toy,
    gen_mirrored_toy,
    load_csv,
    save_csv,
    split,
    standardize,
)
from .experiment import (
    ExperimentConfig,
    SweepResult,
    load_config,
    metrics_cmd,
    run_sweep,
    run_verification,
    trend_correlation,
    write_sweep_csvs,
)
from .gbt import GbtConfig, GbtModel, RegressionTree, fit_tree, functional_gradient, gbt_predict_logit, gbt_train
from .kernel_boost import KernelModel, KernelSpec, kb_predict_logit, kb_train, kernel_matrix, rkhs_grad_norm
from .metrics import (
    LogitSet,
    MetricReport,
    PredictionSet,
    binned_ece,
    build_chain_problem,
    dual_smooth_ce,
    interval_ce,
    metric_report,
    mmce,
    smooth_ce,
    smooth_ce_grid_oracle,
)
from .two_layer_nn import (
    ACTIVATIONS,
    NnConfig,
    NnModel,
    NnParams,
    nn_forward,
    nn_init_symmetric,
    nn_param_gradient,
    nn_train,
)

__version__ = "0.1.0"
