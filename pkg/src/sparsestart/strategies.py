"""The four weight-dropout strategies: random, k-starts, dissipating
gradients, and their combination.

All strategies prune weight matrices only; biases always survive. Each
layer is treated independently: k-starts keeps a per-layer population of
candidate masks and dissipating gradients keeps a per-layer gradient
accumulator.

k-starts works like a tiny evolutionary loop. Each training iteration the
current weights (or gradients, depending on the fitness variant) are
multiplied with every surviving candidate mask; the highest-fitness
candidate is applied to the weights, and on a fixed cadence the
lowest-fitness candidate is eliminated, until a single survivor remains.

Dissipating gradients sums dW over each of the first few epochs and, at
the epoch boundary, prunes the weights whose accumulated gradient
magnitude stayed below a threshold -- the weights the optimizer is not
bothering to update.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .masks import SparseMask, all_ones_mask, generate_mask, intersect
from .matrix import Matrix, ShapeMismatchError
from .network import Gradients


class FitnessVariant(enum.Enum):
    """What the candidate masks are scored against."""

    MAGNITUDE = "magnitude"
    GRADIENT = "gradient"
    SUM_OF_GRADIENTS = "sumgrad"

    @classmethod
    def parse(cls, name: str) -> "FitnessVariant":
        for variant in cls:
            if variant.value == name:
                return variant
        raise ValueError(f"unknown fitness variant {name!r}; expected one of "
                         f"{[v.value for v in cls]}")


def fitness(member: Matrix, absolute: bool = True) -> float:
    """Score of one masked candidate: the (absolute-value) sum of its entries.

    The raw signed sum (``absolute=False``) is kept for fidelity
    experiments; it ranks masks keeping large-negative weights below an
    empty mask, so the absolute sum is the default.
    """
    if absolute:
        return float(np.abs(member).sum())
    return float(member.sum())


@dataclass
class KStartsState:
    """Surviving per-layer candidate masks plus the elimination policy."""

    populations: list[list[SparseMask]]
    initial_k: int
    elimination_interval: int = 5
    fitness_variant: FitnessVariant = FitnessVariant.MAGNITUDE
    absolute_fitness: bool = True
    grad_accumulators: list[Matrix] = field(default_factory=list)
    last_grads: list[Matrix] | None = None

    @classmethod
    def initialize(
        cls,
        shapes: list[tuple[int, int]],
        k: int,
        p: float,
        rng: np.random.Generator,
        elimination_interval: int = 5,
        fitness_variant: FitnessVariant = FitnessVariant.MAGNITUDE,
        absolute_fitness: bool = True,
        exact_masks: bool = False,
    ) -> "KStartsState":
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        if elimination_interval < 1:
            raise ValueError(f"elimination_interval must be >= 1, got {elimination_interval}")
        populations = [
            [generate_mask(r, c, p, rng, exact=exact_masks) for _ in range(k)]
            for (r, c) in shapes
        ]
        return cls(
            populations=populations,
            initial_k=k,
            elimination_interval=elimination_interval,
            fitness_variant=fitness_variant,
            absolute_fitness=absolute_fitness,
            grad_accumulators=[np.zeros((r, c)) for (r, c) in shapes],
        )

    def population_size(self) -> int:
        return len(self.populations[0])


def _fitness_source(state: KStartsState, weights: list[Matrix], layer: int) -> Matrix:
    if state.fitness_variant is FitnessVariant.MAGNITUDE:
        return weights[layer]
    if state.fitness_variant is FitnessVariant.GRADIENT:
        if state.last_grads is None:
            return np.zeros_like(weights[layer])
        return state.last_grads[layer]
    return state.grad_accumulators[layer]


def kstarts_select(
    weights: list[Matrix],
    state: KStartsState,
    iteration: int,
    grads: Gradients | None = None,
) -> list[SparseMask]:
    """Pick each layer's fittest mask, apply it to W, and run elimination.

    ``iteration`` is the 1-based training-step count; every
    ``elimination_interval`` iterations the lowest-fitness candidate is
    dropped (never below one survivor). ``iteration=0`` selects and
    applies without eliminating, which is how a run applies its initial
    mask before the first update. For the gradient-based fitness variants
    pass this step's gradients; the sum-of-gradients accumulator grows
    each call and resets whenever an elimination happens.
    """
    if len(weights) != len(state.populations):
        raise ShapeMismatchError(
            f"kstarts: {len(weights)} weight layers vs {len(state.populations)} populations"
        )
    if grads is not None:
        state.last_grads = grads.weight_grads
        for acc, g in zip(state.grad_accumulators, grads.weight_grads):
            acc += g

    eliminate = (
        iteration > 0
        and iteration % state.elimination_interval == 0
        and state.population_size() > 1
    )
    chosen: list[SparseMask] = []
    for layer, population in enumerate(state.populations):
        if len(population) == 1:
            mask = population[0]
        else:
            source = _fitness_source(state, weights, layer)
            scores = [fitness(source * m.bits, state.absolute_fitness) for m in population]
            mask = population[int(np.argmax(scores))]
            if eliminate:
                population.pop(int(np.argmin(scores)))
        weights[layer] *= mask.bits
        chosen.append(mask)
    if eliminate:
        for acc in state.grad_accumulators:
            acc[:] = 0.0
    return chosen


@dataclass
class DissipationState:
    """Per-epoch gradient accumulators and the epoch-boundary pruning policy.

    Two pruning modes: the default thresholds |accumulated dW| against
    ``epsilon``; setting ``target_p`` instead prunes the smallest-magnitude
    accumulations so the cumulative zero-fraction reaches ``target_p`` by
    the end of the active epochs (the knob sparsity sweeps use, since the
    raw threshold gives no direct control over realized sparsity).
    """

    accumulated: list[Matrix]
    epsilon: float = 1e-6
    active_epochs: int = 2
    epochs_pruned: int = 0
    cumulative_masks: list[SparseMask] = field(default_factory=list)
    target_p: float | None = None

    @classmethod
    def initialize(
        cls,
        shapes: list[tuple[int, int]],
        epsilon: float = 1e-6,
        active_epochs: int = 2,
        target_p: float | None = None,
    ) -> "DissipationState":
        if epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {epsilon}")
        if active_epochs < 1:
            raise ValueError(f"active_epochs must be >= 1, got {active_epochs}")
        if target_p is not None and not 0.0 <= target_p <= 1.0:
            raise ValueError(f"target_p must be in [0, 1], got {target_p}")
        return cls(
            accumulated=[np.zeros((r, c)) for (r, c) in shapes],
            epsilon=epsilon,
            active_epochs=active_epochs,
            cumulative_masks=[all_ones_mask(r, c) for (r, c) in shapes],
            target_p=target_p,
        )


def dissipate_accumulate(state: DissipationState, grads: Gradients) -> None:
    """Add this iteration's dW into the per-epoch running sums."""
    if len(grads.weight_grads) != len(state.accumulated):
        raise ShapeMismatchError(
            f"dissipation: {len(grads.weight_grads)} gradient layers vs "
            f"{len(state.accumulated)} accumulators"
        )
    for acc, g in zip(state.accumulated, grads.weight_grads):
        if g.shape != acc.shape:
            raise ShapeMismatchError(f"dissipation: gradient {g.shape} vs accumulator {acc.shape}")
        acc += g


def _quantile_bits(acc: Matrix, prev_bits: Matrix, cumulative_goal: float) -> np.ndarray:
    """Epoch mask that prunes the smallest-|acc| live entries up to the goal."""
    flat_prev = prev_bits.reshape(-1)
    alive = np.flatnonzero(flat_prev == 1.0)
    extra = round(cumulative_goal * flat_prev.size) - (flat_prev.size - alive.size)
    bits = np.ones_like(acc)
    if extra > 0 and alive.size:
        order = np.argsort(np.abs(acc).reshape(-1)[alive], kind="stable")
        bits.reshape(-1)[alive[order[: min(extra, alive.size)]]] = 0.0
    return bits


def dissipate_prune(weights: list[Matrix], state: DissipationState) -> list[SparseMask]:
    """At an epoch boundary, zero the weights with dissipated gradients.

    The default mode prunes where |accumulated dW| < epsilon; with
    ``target_p`` set it instead prunes the lowest-magnitude accumulations
    so the cumulative zero-fraction ramps to target_p across the active
    epochs. Returns this epoch's masks; the state's cumulative masks are
    ANDed with them so the pruned set only ever grows. Accumulators reset
    afterwards. Only valid within the first ``active_epochs`` epochs.
    """
    if state.epochs_pruned >= state.active_epochs:
        raise ValueError(
            f"dissipate_prune called after {state.epochs_pruned} epochs; "
            f"only the first {state.active_epochs} prune"
        )
    goal = None
    if state.target_p is not None:
        goal = state.target_p * (state.epochs_pruned + 1) / state.active_epochs
    epoch_masks: list[SparseMask] = []
    for layer, acc in enumerate(state.accumulated):
        if goal is None:
            bits = (np.abs(acc) >= state.epsilon).astype(np.float64)
        else:
            bits = _quantile_bits(acc, state.cumulative_masks[layer].bits, goal)
        mask = SparseMask(bits, float((bits == 0.0).mean()))
        weights[layer] *= bits
        state.cumulative_masks[layer] = intersect(state.cumulative_masks[layer], mask)
        acc[:] = 0.0
        epoch_masks.append(mask)
    state.epochs_pruned += 1
    return epoch_masks


def combination_step(
    weights: list[Matrix],
    kstate: KStartsState,
    dstate: DissipationState,
    iteration: int,
    grads: Gradients | None = None,
) -> list[SparseMask]:
    """Combine k-starts with dissipating gradients: prune with both.

    Runs the k-starts selection, then intersects the chosen masks with the
    dissipation survivors, so realized sparsity is at least the k-starts
    target p. Epoch-boundary dissipation pruning itself is driven by the
    caller via :func:`dissipate_prune`.
    """
    kmasks = kstarts_select(weights, kstate, iteration, grads)
    effective = [intersect(km, dm) for km, dm in zip(kmasks, dstate.cumulative_masks)]
    for layer, mask in enumerate(effective):
        weights[layer] *= mask.bits
    return effective


def random_dropout(
    weights: list[Matrix],
    p: float,
    rng: np.random.Generator,
    exact_masks: bool = False,
) -> list[SparseMask]:
    """Draw one fixed mask per layer, apply it, and return the masks.

    The baseline strategy: masks are generated once at initialization and
    held for the whole run.
    """
    masks = [
        generate_mask(w.shape[0], w.shape[1], p, rng, exact=exact_masks) for w in weights
    ]
    for w, mask in zip(weights, masks):
        w *= mask.bits
    return masks
