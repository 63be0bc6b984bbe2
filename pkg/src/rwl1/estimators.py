"""scikit-learn style wrappers around the recovery routines.

``X`` is the measurement matrix (one row per measurement) and ``y`` the
measurement vector, so ``fit(X, y)`` recovers a coefficient vector ``coef_``
with ``||X @ coef_ - y||_2 <= epsilon`` and ``predict(X)`` returns
``X @ coef_``.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .core import MeasurementInstance
from .reweight import ReweightConfig, reweighted_l1
from .solver import SolverOptions, solve_weighted_l1
from .validation import check_matrix, check_nonnegative, check_vector, check_weights


class _L1RecoveryBase(RegressorMixin, BaseEstimator):

    def _instance(self, X, y):
        X = check_matrix(X, name="X")
        y = check_vector(y, X.shape[0], name="y")
        eps = check_nonnegative(self.epsilon, "epsilon")
        return MeasurementInstance(X, y, eps)

    def _solver_options(self):
        return SolverOptions(max_iterations=self.max_iter, tol_primal=self.tol,
                             tol_dual=self.tol, step_parameter=self.step)

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_matrix(X, name="X")
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} columns, expected {self.n_features_in_}")
        return X @ self.coef_


class WeightedL1Recovery(_L1RecoveryBase):
    """Weighted basis pursuit denoising.

    Parameters
    ----------
    epsilon : float
        Radius of the measurement-misfit ball.
    weights : array_like or None
        Positive per-coordinate weights; ``None`` means plain l1.
    max_iter, tol, step : solver settings, see :class:`SolverOptions`.
    """

    def __init__(self, epsilon=0.0, weights=None, max_iter=5000, tol=1e-7, step=1.0):
        self.epsilon = epsilon
        self.weights = weights
        self.max_iter = max_iter
        self.tol = tol
        self.step = step

    def fit(self, X, y):
        inst = self._instance(X, y)
        d = inst.phi.shape[1]
        w = None if self.weights is None else check_weights(self.weights, d)
        result = solve_weighted_l1(inst, w, self._solver_options())
        self.coef_ = result.xhat
        self.objective_ = result.objective
        self.feasibility_gap_ = result.feasibility_gap
        self.n_iter_ = result.iterations_used
        self.converged_ = result.converged
        self.n_features_in_ = d
        return self


class ReweightedL1Recovery(_L1RecoveryBase):
    """Iteratively reweighted l1 recovery.

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
        Final iterate.
    coef_path_ : ndarray of shape (n_outer, n_features)
        All iterates; row 0 is the plain l1 solution.
    trace_ : ReweightTrace
    """

    def __init__(self, epsilon=0.0, max_outer_iter=10, a_schedule="paper_linear",
                 a0=0.1, ratio=0.5, convergence_tol=1e-5, max_iter=5000, tol=1e-7,
                 step=1.0):
        self.epsilon = epsilon
        self.max_outer_iter = max_outer_iter
        self.a_schedule = a_schedule
        self.a0 = a0
        self.ratio = ratio
        self.convergence_tol = convergence_tol
        self.max_iter = max_iter
        self.tol = tol
        self.step = step

    def fit(self, X, y):
        inst = self._instance(X, y)
        cfg = ReweightConfig(max_outer_iterations=self.max_outer_iter,
                             a_schedule=self.a_schedule, a0=self.a0, ratio=self.ratio,
                             convergence_tol=self.convergence_tol)
        self.trace_ = reweighted_l1(inst, cfg, self._solver_options())
        self.coef_path_ = np.vstack(self.trace_.iterates)
        self.coef_ = self.trace_.final
        self.n_iter_ = self.trace_.n_iterations
        self.converged_ = self.trace_.all_converged
        self.n_features_in_ = inst.phi.shape[1]
        return self
