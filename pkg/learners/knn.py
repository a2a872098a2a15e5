import numpy as np
from scipy.spatial.distance import cdist

from learners.base import TrainedModel
from schemas.learner import LearnerKind

_CHUNK = 1024


class KNNModel(TrainedModel):
    """
    k nearest neighbours; P(Y=1) is the positive vote fraction.

    When the k-th nearest training row is an exact match, every exact match
    votes, so duplicated training rows score the same regardless of their order.
    """
    kind = LearnerKind.knn

    def fit(self, Z: np.ndarray, y: np.ndarray, rng: np.random.Generator) -> None:
        self.Z_train = Z.copy()
        self.y_train = y.astype(np.float64)
        self.k = min(int(self.spec.reg.value), len(y))

    def _proba(self, Z: np.ndarray) -> np.ndarray:
        proba = np.empty(len(Z))
        for start in range(0, len(Z), _CHUNK):
            block = Z[start:start + _CHUNK]
            distances = cdist(block, self.Z_train, metric="euclidean")
            nearest = np.argsort(distances, axis=1, kind="stable")[:, : self.k]
            votes = self.y_train[nearest].mean(axis=1)

            exact = distances == 0.0
            n_exact = exact.sum(axis=1)
            saturated = n_exact >= self.k
            if saturated.any():
                votes[saturated] = (exact[saturated] @ self.y_train) / n_exact[saturated]
            proba[start:start + len(block)] = votes
        return proba
