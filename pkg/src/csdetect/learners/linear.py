"""Multinomial logistic regression for the stacking meta-learner.

Minimizes unregularized softmax cross-entropy from a zero initialization
with L-BFGS, stopping at gradient norm <= tol or the iteration cap. The
fit is deterministic; hitting the cap raises a warning, not an error.
"""

from __future__ import annotations

import warnings as _warnings

import numpy as np
from scipy.optimize import minimize

from ..errors import DimensionMismatch, EmptyInput, NonConvergenceWarning
from .boosting import softmax

N_CLASSES = 4


class MultinomialLogit:
    def __init__(
        self,
        max_iterations: int = 2000,
        tol: float = 1e-6,
        n_classes: int = N_CLASSES,
        fit_intercept: bool = True,
    ):
        self.max_iterations = max_iterations
        self.tol = tol
        self.n_classes = n_classes
        self.fit_intercept = fit_intercept
        self.weights_: np.ndarray | None = None  # (d [+1], C)
        self.loss_history_: list[float] = []

    def _design(self, X: np.ndarray) -> np.ndarray:
        if self.fit_intercept:
            return np.hstack([X, np.ones((X.shape[0], 1))])
        return X

    def fit(self, X, y):
        X = np.ascontiguousarray(np.atleast_2d(X), dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if X.shape[0] == 0:
            raise EmptyInput("training set is empty")
        Xb = self._design(X)
        n, d = Xb.shape
        C = self.n_classes
        onehot = (y[:, None] == np.arange(C)).astype(np.float64)

        def objective(w_flat):
            W = w_flat.reshape(d, C)
            P = softmax(Xb @ W)
            loss = -np.mean(np.sum(onehot * np.log(np.clip(P, 1e-300, None)), axis=1))
            grad = Xb.T @ (P - onehot) / n
            return loss, grad.ravel()

        self.loss_history_ = []

        def record(w_flat):
            self.loss_history_.append(objective(w_flat)[0])

        result = minimize(
            objective,
            np.zeros(d * C),
            jac=True,
            method="L-BFGS-B",
            callback=record,
            options={
                "maxiter": self.max_iterations,
                "gtol": self.tol,
                "ftol": 1e-14,
            },
        )
        if not result.success and result.nit >= self.max_iterations:
            _warnings.warn(
                f"L-BFGS stopped at the {self.max_iterations}-iteration cap",
                NonConvergenceWarning,
                stacklevel=2,
            )
        self.weights_ = result.x.reshape(d, C)
        return self

    def predict_proba(self, X) -> np.ndarray:
        X = np.ascontiguousarray(np.atleast_2d(X), dtype=np.float64)
        W = self.weights_
        expected = W.shape[0] - (1 if self.fit_intercept else 0)
        if X.shape[1] != expected:
            raise DimensionMismatch(
                f"model expects {expected} features, got {X.shape[1]}"
            )
        return softmax(self._design(X) @ W)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)
