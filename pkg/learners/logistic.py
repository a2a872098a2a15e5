from typing import Tuple

import numpy as np
from scipy.special import expit, logit

from learners.base import TrainedModel
from schemas.learner import LearnerKind


def with_intercept(Z: np.ndarray) -> np.ndarray:
    return np.column_stack([np.ones(len(Z)), Z])


def loss_and_gradient(theta: np.ndarray, Zb: np.ndarray, y: np.ndarray, lam: float) -> Tuple[float, np.ndarray]:
    """
    Mean log-loss plus (lam/2)*||w||^2 and its gradient.

    theta = [intercept, w...]; Zb carries a leading column of ones.
    The intercept is not penalized.
    """
    n = len(y)
    margin = Zb @ theta
    w = theta[1:]
    loss = float(np.mean(np.logaddexp(0.0, margin) - y * margin) + 0.5 * lam * (w @ w))
    residual = (expit(margin) - y) / n
    grad = Zb.T @ residual
    grad[1:] += lam * w
    return loss, grad


def base_rate_logit(y: np.ndarray) -> float:
    rate = float(np.clip(y.mean(), 1e-6, 1.0 - 1e-6))
    return float(logit(rate))


class LogisticRegressionModel(TrainedModel):
    """L2-penalized logistic regression fitted by full-batch gradient descent"""
    kind = LearnerKind.logreg

    def fit(self, Z: np.ndarray, y: np.ndarray, rng: np.random.Generator) -> None:
        lam = self.spec.reg.value
        epochs = int(self.spec.param("epochs"))
        tolerance = self.spec.param("tolerance")

        Zb = with_intercept(Z)
        # fixed step 1/L, L = Lipschitz constant of the gradient; keeps the loss nonincreasing
        lipschitz = 0.25 * np.linalg.norm(Zb, 2) ** 2 / len(y) + lam
        step = self.spec.param("learning_rate") / lipschitz

        theta = np.zeros(Zb.shape[1])
        theta[0] = base_rate_logit(y)
        self.converged = False
        for epoch in range(epochs):
            loss, grad = loss_and_gradient(theta, Zb, y, lam)
            self.loss_history.append(loss)
            if np.max(np.abs(grad)) < tolerance:
                self.converged = True
                break
            theta = theta - step * grad
        self.epochs_run = len(self.loss_history)
        self.theta = theta

    @property
    def intercept(self) -> float:
        return float(self.theta[0])

    @property
    def coefficients(self) -> np.ndarray:
        return self.theta[1:]

    def _proba(self, Z: np.ndarray) -> np.ndarray:
        return expit(with_intercept(Z) @ self.theta)
