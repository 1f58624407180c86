"""Derivative-free parameter search: seeded hill climbing plus a grid mode.

The primary scheme proposes Gaussian perturbations around the incumbent and
accepts only strict improvements, halving all step scales after every 50
consecutive rejections.  A deterministic coordinate-wise grid refinement is
available as an alternative for reproducibility studies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = ["OptimizeResult", "optimize_params", "grid_refine"]

HALVING_PATIENCE = 50


@dataclass
class OptimizeResult:
    """Best point found plus the trace needed to audit the run."""

    vector: np.ndarray
    value: float
    initial_value: float
    accepted: list = field(default_factory=list)
    evaluations: int = 0


def _prepare(objective, init, scale, project):
    v = np.array(init, dtype=np.float64).copy()
    if v.ndim != 1 or v.size == 0:
        raise ValueError("init must be a non-empty 1-D vector")
    if project is not None:
        v = project(v)
    f = float(objective(v))
    if not np.isfinite(f):
        raise ValueError(f"objective is not finite at the initial point: {f!r}")
    if scale is None:
        s = 0.1 * np.maximum(1.0, np.abs(v))
    else:
        s = np.broadcast_to(np.asarray(scale, dtype=np.float64), v.shape).copy()
    if np.any(s <= 0.0):
        raise ValueError("perturbation scales must be positive")
    return v, f, s


def optimize_params(
    objective: Callable,
    init: Sequence[float],
    iterations: int,
    seed: int,
    scale=None,
    project: Callable | None = None,
) -> OptimizeResult:
    """Seeded random-perturbation hill climbing, accepting strict decreases only.

    ``project``, when given, maps each proposal (and the initial point) back
    onto the feasible region before evaluation; the training pipeline uses
    it to keep the GARCH coordinates in {omega >= 1e-8, alpha1 >= 0,
    beta1 >= 0}.  The returned ``accepted`` list is the strictly decreasing
    sequence of accepted objective values.
    """
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    v, f, s = _prepare(objective, init, scale, project)
    result = OptimizeResult(vector=v, value=f, initial_value=f, evaluations=1)
    rng = np.random.default_rng(seed)
    rejections = 0
    for _ in range(iterations):
        candidate = v + rng.standard_normal(v.size) * s
        if project is not None:
            candidate = project(candidate)
        fc = float(objective(candidate))
        result.evaluations += 1
        if np.isfinite(fc) and fc < f:
            v, f = candidate, fc
            result.accepted.append(fc)
            rejections = 0
        else:
            rejections += 1
            if rejections >= HALVING_PATIENCE:
                s *= 0.5
                rejections = 0
    result.vector = v
    result.value = f
    return result


def grid_refine(
    objective: Callable,
    init: Sequence[float],
    iterations: int,
    scale=None,
    project: Callable | None = None,
    shrink: float = 0.5,
) -> OptimizeResult:
    """Deterministic coordinate-wise refinement with the same acceptance rule.

    Sweeps coordinates in order trying +/- the per-coordinate step; a full
    sweep without improvement shrinks every step by ``shrink``.  The budget
    counts objective evaluations, matching ``optimize_params``.
    """
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    v, f, s = _prepare(objective, init, scale, project)
    result = OptimizeResult(vector=v, value=f, initial_value=f, evaluations=1)
    budget = iterations
    while budget > 0:
        improved = False
        for i in range(v.size):
            for direction in (1.0, -1.0):
                if budget <= 0:
                    break
                candidate = v.copy()
                candidate[i] += direction * s[i]
                if project is not None:
                    candidate = project(candidate)
                fc = float(objective(candidate))
                result.evaluations += 1
                budget -= 1
                if np.isfinite(fc) and fc < f:
                    v, f = candidate, fc
                    result.accepted.append(fc)
                    improved = True
                    break
        if not improved:
            s *= shrink
    result.vector = v
    result.value = f
    return result
