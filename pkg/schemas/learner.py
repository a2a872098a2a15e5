from enum import Enum
from typing import Dict, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class LearnerKind(str, Enum):
    logreg = "logreg"
    gaussian_nb = "gaussian_nb"
    knn = "knn"
    decision_tree = "decision_tree"
    neural_net = "neural_net"


# What RegKnob.value means for each learner
REG_SEMANTICS: Dict[LearnerKind, str] = {
    LearnerKind.logreg: "l2_lambda",
    LearnerKind.neural_net: "l2_alpha",
    LearnerKind.decision_tree: "max_depth",
    LearnerKind.knn: "k_neighbors",
    LearnerKind.gaussian_nb: "var_smoothing",
}

DEFAULT_REG: Dict[LearnerKind, float] = {
    LearnerKind.logreg: 1e-4,
    LearnerKind.neural_net: 1e-4,
    LearnerKind.decision_tree: 5,
    LearnerKind.knn: 15,
    LearnerKind.gaussian_nb: 1e-9,
}

DEFAULT_TRAIN_PARAMS: Dict[LearnerKind, Dict[str, float]] = {
    LearnerKind.logreg: {"learning_rate": 1.0, "epochs": 3000, "tolerance": 1e-6},
    LearnerKind.neural_net: {"learning_rate": 0.1, "epochs": 5000, "tolerance": 1e-6, "hidden_units": 8},
    LearnerKind.decision_tree: {},
    LearnerKind.knn: {},
    LearnerKind.gaussian_nb: {},
}

# CLI / API aliases
KIND_ALIASES: Dict[str, LearnerKind] = {
    "logreg": LearnerKind.logreg,
    "lr": LearnerKind.logreg,
    "gnb": LearnerKind.gaussian_nb,
    "gaussian_nb": LearnerKind.gaussian_nb,
    "nb": LearnerKind.gaussian_nb,
    "knn": LearnerKind.knn,
    "tree": LearnerKind.decision_tree,
    "decision_tree": LearnerKind.decision_tree,
    "mlp": LearnerKind.neural_net,
    "nn": LearnerKind.neural_net,
    "neural_net": LearnerKind.neural_net,
}


class RegKnob(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float = Field(..., ge=0.0)


class LearnerSpec(BaseModel):
    """Learner kind, its regularization knob and training parameters"""
    model_config = ConfigDict(frozen=True)

    kind: LearnerKind
    reg: RegKnob
    train_params: Dict[str, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_knob(self) -> "LearnerSpec":
        value = self.reg.value
        if self.kind in (LearnerKind.decision_tree, LearnerKind.knn):
            if value < 1 or value != int(value):
                raise ValueError(f"{REG_SEMANTICS[self.kind]} must be an integer >= 1, got {value}")
        for name, param in self.train_params.items():
            if param <= 0:
                raise ValueError(f"train parameter {name} must be positive, got {param}")
        return self

    @classmethod
    def default(cls, kind: LearnerKind, reg: Optional[float] = None, **train_params: float) -> "LearnerSpec":
        return cls(
            kind=kind,
            reg=RegKnob(value=DEFAULT_REG[kind] if reg is None else reg),
            train_params=train_params,
        )

    def with_reg(self, value: float) -> "LearnerSpec":
        return LearnerSpec(kind=self.kind, reg=RegKnob(value=value), train_params=dict(self.train_params))

    def param(self, name: str) -> float:
        if name in self.train_params:
            return self.train_params[name]
        return DEFAULT_TRAIN_PARAMS[self.kind][name]

    @property
    def semantics(self) -> str:
        return REG_SEMANTICS[self.kind]

    def strength(self) -> float:
        """Regularization strength; larger means a more constrained model"""
        if self.kind == LearnerKind.decision_tree:
            return -self.reg.value
        return self.reg.value

    def label(self) -> str:
        return f"{self.kind.value}({self.semantics}={self.reg.value:g})"
