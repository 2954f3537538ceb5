"""Pruning-at-initialization for sigmoid MLPs and autoencoders.

Four dropout strategies over binary weight masks -- random, k random
starts, dissipating gradients, and their combination -- plus the
from-scratch network/optimizer stack and a seeded experiment harness that
reproduces the sparsity-vs-accuracy studies on MNIST-family data.
"""

from .data import BatchPlan, DataError, Dataset, IdxFormatError, load_idx_images, load_idx_labels, normalize, one_hot, subset
from .experiment import (
    AggregateResult,
    ConfigError,
    ExperimentConfig,
    TrialResult,
    gradcheck_suite,
    learning_curve,
    run_experiment,
    run_trial,
    sweep_k,
    sweep_p,
    table1,
)
from .masks import SparseMask, generate_mask, intersect, sparsity
from .matrix import Matrix, ShapeMismatchError
from .network import (
    DegenerateTargetError,
    ForwardTrace,
    Gradients,
    LayerParams,
    MlpNetwork,
    accuracy,
    backward,
    forward,
    gradient_check,
    init_network,
    l1_penalty,
    nmse,
    sigmoid,
    sigmoid_prime,
)
from .optimizer import AdamState, adam_step, masked_step
from .strategies import (
    DissipationState,
    FitnessVariant,
    KStartsState,
    combination_step,
    dissipate_accumulate,
    dissipate_prune,
    fitness,
    kstarts_select,
    random_dropout,
)

__version__ = "0.1.0"
