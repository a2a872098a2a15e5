import numpy as np
from scipy.special import logsumexp

from learners.base import TrainedModel
from schemas.learner import LearnerKind


class GaussianNBModel(TrainedModel):
    """
    Gaussian naive Bayes.

    Each class-conditional variance is smoothed by epsilon times the largest
    feature variance.
    """
    kind = LearnerKind.gaussian_nb

    def fit(self, Z: np.ndarray, y: np.ndarray, rng: np.random.Generator) -> None:
        epsilon = self.spec.reg.value
        smoothing = epsilon * float(np.max(Z.var(axis=0))) if Z.size else 0.0

        self.classes = np.unique(y).astype(np.int8)
        self.log_prior = np.log(np.array([(y == c).mean() for c in self.classes]))
        self.means = np.array([Z[y == c].mean(axis=0) for c in self.classes])
        variances = np.array([Z[y == c].var(axis=0) for c in self.classes]) + smoothing
        self.variances = np.maximum(variances, np.finfo(np.float64).tiny)

    def _joint_log_likelihood(self, Z: np.ndarray) -> np.ndarray:
        jll = []
        for i in range(len(self.classes)):
            log_norm = -0.5 * np.sum(np.log(2.0 * np.pi * self.variances[i]))
            quad = -0.5 * np.sum((Z - self.means[i]) ** 2 / self.variances[i], axis=1)
            jll.append(self.log_prior[i] + log_norm + quad)
        return np.column_stack(jll)

    def _proba(self, Z: np.ndarray) -> np.ndarray:
        if len(self.classes) == 1:
            return np.full(len(Z), float(self.classes[0]))
        jll = self._joint_log_likelihood(Z)
        positive = int(np.flatnonzero(self.classes == 1)[0])
        return np.exp(jll[:, positive] - logsumexp(jll, axis=1))
