from typing import Dict, Type

from schemas.learner import LearnerKind

from .base import Standardizer, TrainedModel
from .knn import KNNModel
from .logistic import LogisticRegressionModel
from .naive_bayes import GaussianNBModel
from .neural_net import NeuralNetModel
from .tree import DecisionTreeModel

MODEL_CLASSES: Dict[LearnerKind, Type[TrainedModel]] = {
    LearnerKind.logreg: LogisticRegressionModel,
    LearnerKind.gaussian_nb: GaussianNBModel,
    LearnerKind.knn: KNNModel,
    LearnerKind.decision_tree: DecisionTreeModel,
    LearnerKind.neural_net: NeuralNetModel,
}

__all__ = [
    "Standardizer",
    "TrainedModel",
    "LogisticRegressionModel",
    "GaussianNBModel",
    "KNNModel",
    "DecisionTreeModel",
    "NeuralNetModel",
    "MODEL_CLASSES",
]
