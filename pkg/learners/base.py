from abc import ABC, abstractmethod
from typing import List, Union

import numpy as np

from models.dataset import Dataset
from schemas.learner import LearnerKind, LearnerSpec
from services.exceptions import ArityMismatch


class Standardizer:
    """Per-column mean/scale captured on the training design matrix"""

    def __init__(self, mean: np.ndarray, scale: np.ndarray):
        self.mean = mean
        self.scale = scale

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        return cls(mean=mean, scale=np.where(std > 0, std, 1.0))

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.scale


class TrainedModel(ABC):
    """
    Fitted binary classifier.

    Inputs are design rows: dataset features, plus S as the last column
    when the model was trained with include_sensitive.
    """
    kind: LearnerKind

    def __init__(self, spec: LearnerSpec, standardizer: Standardizer, include_sensitive: bool):
        self.spec = spec
        self.standardizer = standardizer
        self.include_sensitive = include_sensitive
        self.n_inputs = len(standardizer.mean)
        self.converged = True
        self.epochs_run = 0
        self.loss_history: List[float] = []

    @abstractmethod
    def fit(self, Z: np.ndarray, y: np.ndarray, rng: np.random.Generator) -> None:
        """Fit on standardized inputs Z and float labels y"""

    @abstractmethod
    def _proba(self, Z: np.ndarray) -> np.ndarray:
        """P(Y=1) for standardized rows"""

    def predict_proba(self, x: Union[np.ndarray, List[float]]) -> Union[float, np.ndarray]:
        """P(Y=1) for one design row (returns float) or a matrix of rows"""
        X = np.asarray(x, dtype=np.float64)
        single = X.ndim == 1
        X2 = X.reshape(1, -1) if single else X
        if X2.shape[1] != self.n_inputs:
            raise ArityMismatch(self.n_inputs, X2.shape[1])
        proba = np.clip(self._proba(self.standardizer.transform(X2)), 0.0, 1.0)
        return float(proba[0]) if single else proba

    def predict(self, x: Union[np.ndarray, List[float]]) -> Union[int, np.ndarray]:
        proba = self.predict_proba(x)
        if isinstance(proba, float):
            return int(proba >= 0.5)
        return (proba >= 0.5).astype(np.int8)

    def predict_proba_dataset(self, d: Dataset) -> np.ndarray:
        return self.predict_proba(d.design_matrix(self.include_sensitive))  # type: ignore[return-value]

    def predict_dataset(self, d: Dataset) -> np.ndarray:
        return (self.predict_proba_dataset(d) >= 0.5).astype(np.int8)

    def __repr__(self) -> str:
        return f"<{type(self).__name__}({self.spec.label()}, converged={self.converged})>"
