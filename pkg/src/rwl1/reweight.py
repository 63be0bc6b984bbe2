"""Iteratively reweighted l1 minimization.

Start from unit weights, solve the weighted program, set
``w_i = 1 / (|xhat_i| + a_k)`` from the k-th iterate and repeat.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .solver import SolverOptions, Workspace, solve_weighted_l1
from .validation import check_vector

A_SCHEDULES = ("paper_linear", "constant", "decaying")


@dataclass(frozen=True)
class ReweightConfig:
    """Outer-loop settings.

    The stability parameter used after iterate k (k = 1, 2, ...) is

    * ``paper_linear``: ``a_k = k / 1000``
    * ``constant``: ``a_k = a0``
    * ``decaying``: ``a_k = a0 * ratio**k``
    """

    max_outer_iterations: int = 10
    a_schedule: str = "paper_linear"
    a0: float = 0.1
    ratio: float = 0.5
    convergence_tol: float = 1e-5

    def __post_init__(self):
        if int(self.max_outer_iterations) < 1:
            raise ValueError("max_outer_iterations must be positive")
        if self.a_schedule not in A_SCHEDULES:
            raise ValueError(f"a_schedule must be one of {A_SCHEDULES}, got {self.a_schedule!r}")
        if not self.a0 > 0:
            raise ValueError("a0 must be positive")
        if not 0 < self.ratio < 1:
            raise ValueError("ratio must lie in (0, 1)")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be positive")

    def stability(self, k):
        if self.a_schedule == "paper_linear":
            return k / 1000.0
        if self.a_schedule == "constant":
            return float(self.a0)
        return float(self.a0 * self.ratio ** k)


@dataclass
class ReweightTrace:
    """Record of one reweighted run.

    ``a_values[k-1]`` is the stability parameter applied to iterate k when
    forming the next weights (the last entry is unused when the loop stops).
    """

    iterates: List[np.ndarray] = field(default_factory=list)
    a_values: List[float] = field(default_factory=list)
    solver_flags: List[bool] = field(default_factory=list)
    errors_vs_truth: Optional[List[float]] = None
    stopped_early: bool = False

    @property
    def final(self):
        return self.iterates[-1]

    @property
    def n_iterations(self):
        return len(self.iterates)

    @property
    def all_converged(self):
        return all(self.solver_flags)


def update_weights(xhat, a):
    """w_i = 1 / (|xhat_i| + a)."""
    if not a > 0:
        raise ValueError(f"stability parameter a must be positive, got {a!r}")
    xhat = check_vector(xhat, name="xhat")
    return 1.0 / (np.abs(xhat) + a)


def reweighted_l1(instance, cfg=None, solver_opts=None):
    """Run reweighted l1 minimization on `instance`.

    Stops after ``cfg.max_outer_iterations`` solves or once
    ``||x_{k+1} - x_k|| <= cfg.convergence_tol * max(1, ||x_k||)``.
    """
    cfg = cfg or ReweightConfig()
    solver_opts = solver_opts or SolverOptions()
    workspace = Workspace(instance.phi)
    trace = ReweightTrace(errors_vs_truth=[] if instance.truth is not None else None)

    w = None
    prev = None
    for k in range(1, cfg.max_outer_iterations + 1):
        result = solve_weighted_l1(instance, w, solver_opts, workspace=workspace, x0=prev)
        xk = result.xhat
        a_k = cfg.stability(k)
        trace.iterates.append(xk)
        trace.a_values.append(a_k)
        trace.solver_flags.append(result.converged)
        if trace.errors_vs_truth is not None:
            trace.errors_vs_truth.append(float(np.linalg.norm(instance.truth - xk)))
        if prev is not None and np.linalg.norm(xk - prev) <= cfg.convergence_tol * max(
                1.0, np.linalg.norm(prev)):
            trace.stopped_early = k < cfg.max_outer_iterations
            break
        prev = xk
        w = update_weights(xk, a_k)
    return trace
