"""Continual-learning update strategies over a domain stream.

Three ways to train on the next domain:

- ``naive``: plain sequential fine-tuning; nothing protects old domains.
- ``replay``: rehearsal; each epoch shuffles the current domain's
  training set together with everything in episodic memory.
- ``gem``: gradient-constrained steps; each batch gradient is checked
  against per-domain memory gradients, and when it would increase any
  stored domain's loss it is replaced by the nearest gradient (in the
  regularized dual sense) whose dot product with every memory gradient
  is nonnegative.

The projection solves a small dual QP: minimize
``1/2 v' (G G' + ridge*I) v + (G g)' v`` subject to ``v >= lambda_margin``,
then returns ``g + G' v*``. Gradients flatten as W row-major followed by
the bias.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from streamcl.classifier import Gradient, LinearModel, TrainConfig, gradient, train_epochs
from streamcl.memory import EpisodicMemory


class Strategy(str, Enum):
    NAIVE = "naive"
    REPLAY = "replay"
    GEM = "gem"

    @property
    def uses_memory(self) -> bool:
        return self is not Strategy.NAIVE


@dataclass(frozen=True)
class StrategyKind:
    """A strategy plus whether examples carry domain-tag tokens."""

    kind: Strategy
    ttokens: bool = False

    def describe(self) -> str:
        return self.kind.value + ("+tt" if self.ttokens else "")


@dataclass(frozen=True)
class GemConfig:
    lambda_margin: float = 0.5
    ridge: float = 1e-3
    tolerance: float = 1e-7
    max_iterations: int = 10000

    def __post_init__(self) -> None:
        if self.lambda_margin < 0.0:
            raise ValueError(f"lambda_margin must be >= 0, got {self.lambda_margin}")
        if self.ridge < 0.0:
            raise ValueError(f"ridge must be >= 0, got {self.ridge}")
        if self.tolerance <= 0.0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")


class QpSolverError(RuntimeError):
    """Raised when the QP solver exhausts its iteration budget."""

    def __init__(self, message: str, iterations: int, residual: float):
        super().__init__(f"{message} (iterations={iterations}, residual={residual:.3e})")
        self.iterations = iterations
        self.residual = residual


def _solve_free_subsystem(
    quad: np.ndarray, lin: np.ndarray, lower: np.ndarray, active: np.ndarray
) -> np.ndarray:
    """Stationary point with ``active`` coordinates clamped at their bounds."""
    v = lower.astype(np.float64).copy()
    free = ~active
    if free.any():
        quad_ff = quad[np.ix_(free, free)]
        rhs = -(lin[free] + quad[np.ix_(free, active)] @ lower[active])
        try:
            v[free] = np.linalg.solve(quad_ff, rhs)
        except np.linalg.LinAlgError:
            v[free] = np.linalg.lstsq(quad_ff, rhs, rcond=None)[0]
    return v


def solve_qp_small(
    quad: np.ndarray,
    lin: np.ndarray,
    lower_bounds: np.ndarray,
    tolerance: float = 1e-7,
    max_iterations: int = 10000,
) -> np.ndarray:
    """Minimize ``1/2 v'Qv + q'v`` subject to ``v >= lower_bounds``.

    Active-set iteration: solve the equality-constrained subproblem for
    the current clamp pattern, clamp the worst primal violator, release
    the worst negative multiplier, repeat. Exact linear solves mean the
    returned point satisfies the KKT conditions to within ``tolerance``.
    Raises QpSolverError with iteration diagnostics if the clamp pattern
    fails to settle within ``max_iterations``.
    """
    quad = np.asarray(quad, dtype=np.float64)
    lin = np.asarray(lin, dtype=np.float64)
    lower = np.asarray(lower_bounds, dtype=np.float64)
    k = lin.shape[0]
    if quad.shape != (k, k):
        raise ValueError(f"quadratic term must be ({k}, {k}), got {quad.shape}")
    if lower.shape != (k,):
        raise ValueError(f"lower_bounds must be ({k},), got {lower.shape}")

    active = np.zeros(k, dtype=bool)
    residual = np.inf
    for iteration in range(1, max_iterations + 1):
        v = _solve_free_subsystem(quad, lin, lower, active)
        shortfall = lower - v
        shortfall[active] = 0.0
        worst_primal = int(np.argmax(shortfall))
        if shortfall[worst_primal] > tolerance:
            active[worst_primal] = True
            continue
        grad = quad @ v + lin
        multipliers = np.where(active, grad, np.inf)
        worst_dual = int(np.argmin(multipliers))
        residual = float(max(shortfall.max(initial=0.0), -min(multipliers.min(), 0.0)))
        if multipliers[worst_dual] < -tolerance:
            active[worst_dual] = False
            continue
        return np.maximum(v, lower)
    raise QpSolverError("QP active-set iteration did not converge", max_iterations, residual)


def flatten_gradient(grad: Gradient) -> np.ndarray:
    """Concatenate (dW, db) as W row-major followed by the bias."""
    grad_w, grad_b = grad
    return np.concatenate([grad_w.ravel(order="C"), grad_b])


def unflatten_gradient(flat: np.ndarray, num_classes: int, dimension: int) -> Gradient:
    split = num_classes * dimension
    if flat.shape[0] != split + num_classes:
        raise ValueError(
            f"flat gradient has {flat.shape[0]} entries, expected {split + num_classes}"
        )
    return flat[:split].reshape(num_classes, dimension), flat[split:].copy()


def compute_memory_gradients(model: LinearModel, memory: EpisodicMemory) -> np.ndarray:
    """One flattened loss gradient per stored domain, stacked in commit order."""
    slots = memory.per_domain_samples()
    if not slots:
        raise ValueError("memory is empty; no gradients to compute")
    rows = [flatten_gradient(gradient(model, features, labels)) for _, (features, labels) in slots]
    return np.stack(rows, axis=0)


def project_gradient(flat_grad: np.ndarray, memory_grads: np.ndarray, config: GemConfig) -> np.ndarray:
    """Correct ``flat_grad`` so its dot with every memory gradient is nonnegative.

    Dual QP over one multiplier per memory gradient (see module
    docstring); with ``lambda_margin=0`` and ``ridge=0`` this is the
    Euclidean projection onto the feasible cone.
    """
    rows = memory_grads.shape[0]
    quad = memory_grads @ memory_grads.T
    if config.ridge > 0.0:
        quad = quad + config.ridge * np.eye(rows)
    lin = memory_grads @ flat_grad
    lower = np.full(rows, config.lambda_margin, dtype=np.float64)
    v = solve_qp_small(quad, lin, lower, config.tolerance, config.max_iterations)
    return flat_grad + memory_grads.T @ v


def train_domain_naive(
    model: LinearModel,
    train_set: tuple[np.ndarray, np.ndarray],
    config: TrainConfig,
    rng: Optional[np.random.Generator] = None,
) -> LinearModel:
    features, labels = train_set
    return train_epochs(model, features, labels, config, rng=rng)


def train_domain_replay(
    model: LinearModel,
    train_set: tuple[np.ndarray, np.ndarray],
    memory: EpisodicMemory,
    config: TrainConfig,
    rng: Optional[np.random.Generator] = None,
) -> LinearModel:
    features, labels = train_set
    if memory.size > 0:
        stored_features, stored_labels = memory.all_samples()
        features = np.concatenate([features, stored_features], axis=0)
        labels = np.concatenate([labels, stored_labels], axis=0)
    return train_epochs(model, features, labels, config, rng=rng)


def train_domain_gem(
    model: LinearModel,
    train_set: tuple[np.ndarray, np.ndarray],
    memory: EpisodicMemory,
    config: TrainConfig,
    gem_config: GemConfig,
    rng: Optional[np.random.Generator] = None,
) -> LinearModel:
    features, labels = train_set

    def hook(current: LinearModel, grad_w: np.ndarray, grad_b: np.ndarray) -> Gradient:
        if memory.size == 0:
            return grad_w, grad_b
        memory_grads = compute_memory_gradients(current, memory)
        flat = flatten_gradient((grad_w, grad_b))
        # Only strict violations trigger a projection; a zero dot is fine.
        if float(np.min(memory_grads @ flat)) >= 0.0:
            return grad_w, grad_b
        corrected = project_gradient(flat, memory_grads, gem_config)
        return unflatten_gradient(corrected, current.num_classes, current.dimension)

    return train_epochs(model, features, labels, config, hook=hook, rng=rng)


def train_domain(
    model: LinearModel,
    train_set: tuple[np.ndarray, np.ndarray],
    memory: EpisodicMemory,
    strategy: Strategy,
    config: TrainConfig,
    gem_config: GemConfig,
    rng: Optional[np.random.Generator] = None,
) -> LinearModel:
    """Dispatch to the strategy-specific trainer."""
    if strategy is Strategy.NAIVE:
        return train_domain_naive(model, train_set, config, rng=rng)
    if strategy is Strategy.REPLAY:
        return train_domain_replay(model, train_set, memory, config, rng=rng)
    if strategy is Strategy.GEM:
        return train_domain_gem(model, train_set, memory, config, gem_config, rng=rng)
    raise ValueError(f"unknown strategy {strategy!r}")
