"""Iterative recovery of group-sparse signals from linear measurements.

Four variants share one loop, differing in how the measurement residual
is pulled back to signal space and how the candidate is projected:

* ``model-iht``: adjoint pullback, exact model projection;
* ``meiht``: median-operator pullback (expander matrices), exact projection;
* ``am-iht``: adjoint pullback through a greedy head approximation, then
  an LP-rounding tail approximation;
* ``am-eiht``: the same with the median pullback.

All variants start from zero and stop when the step norm drops below
the tolerance or the iteration cap is reached.
"""

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .approx import head_greedy, tail_lp_round
from .model import (
    GroupModel,
    apply_support,
    brute_force_projection,
    frequency,
    weights_from_signal,
)
from .project_benders import benders_project
from .project_dp import dp_project
from .sensing import ExpanderMatrix, apply_adjoint, apply_matrix, median_op

__all__ = [
    "RecoveryConfig",
    "RecoveryResult",
    "recover",
    "check_amiht_condition",
    "relative_error",
]

log = logging.getLogger(__name__)

VARIANTS = ("model-iht", "meiht", "am-iht", "am-eiht")
PROJECTORS = {
    "dp": dp_project,
    "benders": benders_project,
    "brute": brute_force_projection,
}
_DIVERGENCE_LIMIT = 1e100


def check_amiht_condition(alpha: float, beta: float) -> bool:
    """Head/tail accuracy gate for the approximate variants:
    alpha^2 > 1 - (1+beta)^-2."""
    if not 0 < alpha <= 1:
        raise ValueError("alpha must be in (0, 1]")
    if beta < 1:
        raise ValueError("beta must be at least 1")
    return alpha * alpha > 1.0 - (1.0 + beta) ** -2


def relative_error(x, x_hat, p: int = 2) -> float:
    """||x - x_hat||_p / ||x||_p; the ground truth must be non-zero."""
    x = np.asarray(x, dtype=float)
    x_hat = np.asarray(x_hat, dtype=float)
    denom = np.linalg.norm(x, ord=p)
    if denom == 0:
        raise ValueError("ground-truth signal has zero norm")
    return float(np.linalg.norm(x - x_hat, ord=p) / denom)


@dataclass(frozen=True)
class RecoveryConfig:
    """Knobs of the recovery loop.

    ``p`` defaults to 1 for the expander variants and 2 otherwise,
    matching how weights are derived for the projection.  ``alpha`` and
    ``beta`` are the head/tail accuracies of the approximate variants;
    setting both to 1 degrades am-iht/am-eiht to their exact
    counterparts (identity head, exact-projection tail).
    """

    variant: str = "model-iht"
    projector: str = "dp"
    max_iterations: int = 1000
    step_tolerance: float = 1e-5
    p: int | None = None
    alpha: float = 0.95
    beta: float = 1.05
    check_membership: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.projector not in PROJECTORS:
            raise ValueError(f"unknown projector {self.projector!r}")

    @property
    def norm_p(self) -> int:
        if self.p is not None:
            return self.p
        return 1 if self.variant in ("meiht", "am-eiht") else 2

    def head_eps(self) -> float:
        return 1.0 - self.alpha**2 if self.norm_p == 2 else 1.0 - self.alpha

    def tail_eps(self) -> float:
        return self.beta**2 - 1.0 if self.norm_p == 2 else self.beta - 1.0


@dataclass(frozen=True)
class RecoveryResult:
    x_hat: np.ndarray
    iterations: int
    converged: bool
    step_norms: np.ndarray
    relative_error: float | None = None
    diverged: bool = False


def _step_norm(delta: np.ndarray, p: int) -> float:
    return float(np.linalg.norm(delta, ord=p))


def recover(
    a,
    y,
    model: GroupModel,
    config: RecoveryConfig | None = None,
    x_true=None,
) -> RecoveryResult:
    """Run one recovery variant on measurements ``y`` of a model-sparse signal."""
    config = config or RecoveryConfig()
    y = np.asarray(y, dtype=float)
    n = model.ground_size
    expander_pullback = config.variant in ("meiht", "am-eiht")
    if expander_pullback and not isinstance(a, ExpanderMatrix):
        raise TypeError(f"{config.variant} needs an ExpanderMatrix")
    m = a.m if isinstance(a, ExpanderMatrix) else np.asarray(a).shape[0]
    if len(y) != m:
        raise ValueError("measurement vector does not match the matrix")
    am_variant = config.variant in ("am-iht", "am-eiht")
    if am_variant and not check_amiht_condition(config.alpha, config.beta):
        warnings.warn(
            f"head/tail accuracies ({config.alpha}, {config.beta}) fail the "
            "convergence condition; continuing anyway",
            stacklevel=2,
        )
    p = config.norm_p
    project = PROJECTORS[config.projector]

    # an exact head (alpha=1) must capture all coverable weight, which on a
    # covering model is the identity; an exact tail (beta=1) is the projector
    greedy_head = am_variant and config.alpha < 1.0
    lp_tail = am_variant and config.beta > 1.0
    head_budget = eps_h = eps_t = None
    tail_state = None
    if am_variant:
        eps_t = config.tail_eps()
        if lp_tail:
            g_tail = int(
                np.ceil((1.0 + 1.0 / eps_t) * frequency(model) * model.budget_g)
            )
        else:
            g_tail = model.budget_g
        if greedy_head:
            eps_h = config.head_eps()
            head_budget = min(model.num_groups, g_tail + model.budget_g)

    x = np.zeros(n)
    step_norms = []
    converged = diverged = False
    iterations = 0
    for it in range(1, config.max_iterations + 1):
        iterations = it
        residual = y - apply_matrix(a, x)
        pullback = (
            median_op(a, residual) if expander_pullback else apply_adjoint(a, residual)
        )
        if greedy_head:
            head = head_greedy(
                model, weights_from_signal(pullback, p), head_budget, eps_h
            )
            target = x + apply_support(pullback, head.support)
        else:
            target = x + pullback
        if not np.all(np.isfinite(target)) or np.abs(target).max() > _DIVERGENCE_LIMIT:
            diverged = True
            log.debug("%s diverged at iteration %d", config.variant, it)
            break
        if lp_tail:
            tail = tail_lp_round(
                model,
                weights_from_signal(target, p),
                model.budget_g,
                eps_t,
                warm_state=tail_state,
            )
            tail_state = tail.state
            x_new = apply_support(target, tail.support)
        else:
            proj = project(model, weights_from_signal(target, p))
            if not proj.optimal:
                log.warning(
                    "projection stopped at its iteration cap in recovery step %d", it
                )
            if config.check_membership:
                _assert_member(model, proj)
            x_new = apply_support(target, proj.support)
        step = _step_norm(x_new - x, p)
        step_norms.append(step)
        x = x_new
        if step < config.step_tolerance:
            converged = True
            break

    rel = None
    if x_true is not None:
        rel = relative_error(x_true, x, p)
    return RecoveryResult(
        x, iterations, converged, np.asarray(step_norms), rel, diverged
    )


def _assert_member(model: GroupModel, proj) -> None:
    if len(proj.selected_groups) > model.budget_g:
        raise AssertionError("projection used more groups than the budget")
    union = set()
    for j in proj.selected_groups:
        union |= model.groups[j]
    if not set(proj.support) <= union:
        raise AssertionError("projection support not covered by its groups")
    if model.k_active and len(proj.support) > model.sparsity_k:
        raise AssertionError("projection support exceeds the element budget")
