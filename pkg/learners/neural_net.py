from typing import Dict, Tuple

import numpy as np
from scipy.special import expit

from learners.base import TrainedModel
from learners.logistic import base_rate_logit
from schemas.learner import LearnerKind


def unpack(theta: np.ndarray, n_inputs: int, hidden: int) -> Dict[str, np.ndarray]:
    """Views into the flat parameter vector: W1 (p x h), b1 (h), w2 (h), b2 (1)"""
    cut1 = n_inputs * hidden
    cut2 = cut1 + hidden
    cut3 = cut2 + hidden
    return {
        "W1": theta[:cut1].reshape(n_inputs, hidden),
        "b1": theta[cut1:cut2],
        "w2": theta[cut2:cut3],
        "b2": theta[cut3:cut3 + 1],
    }


def n_params(n_inputs: int, hidden: int) -> int:
    return n_inputs * hidden + 2 * hidden + 1


def loss_and_gradient(
    theta: np.ndarray, Z: np.ndarray, y: np.ndarray, alpha: float, hidden: int
) -> Tuple[float, np.ndarray]:
    """Mean log-loss plus (alpha/2)*(||W1||^2 + ||w2||^2), with its analytic gradient"""
    n, p = Z.shape
    params = unpack(theta, p, hidden)
    W1, b1, w2, b2 = params["W1"], params["b1"], params["w2"], params["b2"]

    H = expit(Z @ W1 + b1)
    margin = H @ w2 + b2[0]
    loss = float(
        np.mean(np.logaddexp(0.0, margin) - y * margin)
        + 0.5 * alpha * (np.sum(W1 * W1) + w2 @ w2)
    )

    residual = (expit(margin) - y) / n
    grad = np.empty_like(theta)
    g = unpack(grad, p, hidden)
    g["w2"][:] = H.T @ residual + alpha * w2
    g["b2"][:] = residual.sum()
    delta = np.outer(residual, w2) * H * (1.0 - H)
    g["W1"][:] = Z.T @ delta + alpha * W1
    g["b1"][:] = delta.sum(axis=0)
    return loss, grad


class _Workspace:
    """Buffers for repeated loss/gradient evaluation on one training matrix"""

    def __init__(self, Z: np.ndarray, y: np.ndarray, alpha: float, hidden: int):
        n, p = Z.shape
        self.Z, self.ZT, self.y = Z, np.ascontiguousarray(Z.T), y
        self.alpha, self.hidden, self.p, self.n = alpha, hidden, p, n
        self.A = np.empty((n, hidden))
        self.D = np.empty((n, hidden))
        self.margin = np.empty(n)
        self.scratch = np.empty(n)
        self.grad = np.empty(n_params(p, hidden))
        self.g = unpack(self.grad, p, hidden)

    def evaluate(self, theta: np.ndarray) -> float:
        """Same values as loss_and_gradient; the gradient is left in self.grad"""
        params = unpack(theta, self.p, self.hidden)
        W1, b1, w2, b2 = params["W1"], params["b1"], params["w2"], params["b2"]
        A, D, margin, scratch, g = self.A, self.D, self.margin, self.scratch, self.g

        np.matmul(self.Z, W1, out=A)
        A += b1
        H = expit(A, out=A)
        np.matmul(H, w2, out=margin)
        margin += b2[0]
        loss = float(
            (np.logaddexp(0.0, margin, out=scratch).sum() - self.y @ margin) / self.n
            + 0.5 * self.alpha * (np.sum(W1 * W1) + w2 @ w2)
        )

        residual = expit(margin, out=scratch)
        residual -= self.y
        residual /= self.n
        np.matmul(residual, H, out=g["w2"])
        g["w2"] += self.alpha * w2
        g["b2"][0] = residual.sum()
        np.multiply(H, H, out=D)
        np.subtract(H, D, out=D)
        D *= residual[:, None]
        D *= w2
        np.matmul(self.ZT, D, out=g["W1"])
        g["W1"] += self.alpha * W1
        D.sum(axis=0, out=g["b1"])
        return loss


class NeuralNetModel(TrainedModel):
    """One hidden layer of logistic units, full-batch gradient descent"""
    kind = LearnerKind.neural_net

    def fit(self, Z: np.ndarray, y: np.ndarray, rng: np.random.Generator) -> None:
        alpha = self.spec.reg.value
        hidden = int(self.spec.param("hidden_units"))
        epochs = int(self.spec.param("epochs"))
        tolerance = self.spec.param("tolerance")
        learning_rate = self.spec.param("learning_rate")
        # step capped near 1/alpha so a heavy penalty cannot blow the weights up
        step = learning_rate / (1.0 + learning_rate * alpha)

        p = Z.shape[1]
        theta = np.zeros(n_params(p, hidden))
        params = unpack(theta, p, hidden)
        params["W1"][:] = rng.normal(0.0, 1.0 / np.sqrt(p), size=(p, hidden))
        params["w2"][:] = rng.normal(0.0, 1.0 / np.sqrt(hidden), size=hidden)
        params["b2"][:] = base_rate_logit(y)

        self.hidden = hidden
        self.converged = False
        workspace = _Workspace(Z, y, alpha, hidden)
        for epoch in range(epochs):
            self.loss_history.append(workspace.evaluate(theta))
            if np.max(np.abs(workspace.grad)) < tolerance:
                self.converged = True
                break
            theta -= step * workspace.grad
        self.epochs_run = len(self.loss_history)
        self.theta = theta

    def _proba(self, Z: np.ndarray) -> np.ndarray:
        params = unpack(self.theta, Z.shape[1], self.hidden)
        H = expit(Z @ params["W1"] + params["b1"])
        return expit(H @ params["w2"] + params["b2"][0])
