import logging
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from learners import MODEL_CLASSES, Standardizer, TrainedModel
from models.dataset import Dataset
from schemas.learner import KIND_ALIASES, LearnerKind, LearnerSpec
from services.dataset_service import stratified_kfold
from services.exceptions import SingleClassTrainingSet
from services.metrics_service import balanced_accuracy
from services.sampling import child_seed

logger = logging.getLogger(__name__)

_NEEDS_BOTH_CLASSES = (LearnerKind.logreg, LearnerKind.neural_net, LearnerKind.decision_tree)

_CV_GRIDS: Dict[LearnerKind, Tuple[float, ...]] = {
    LearnerKind.logreg: (1e-4, 1e-2, 1.0),
    LearnerKind.neural_net: (1e-4, 1e-2, 1.0),
    LearnerKind.decision_tree: (2, 4, 6, 8),
    LearnerKind.knn: (5, 15, 45),
    LearnerKind.gaussian_nb: (1e-9,),
}

_REG_GRIDS: Dict[LearnerKind, Tuple[float, ...]] = {
    LearnerKind.logreg: tuple(float(v) for v in np.logspace(-3, 3, 7)),
    LearnerKind.decision_tree: tuple(float(d) for d in range(1, 11)),
    LearnerKind.neural_net: tuple(float(v) for v in np.logspace(-4, 2, 7)),
}


def parse_kind(name: Union[str, LearnerKind]) -> LearnerKind:
    if isinstance(name, LearnerKind):
        return name
    try:
        return KIND_ALIASES[name.strip().lower()]
    except KeyError:
        raise ValueError(f"Unknown learner '{name}'; choose from {sorted(KIND_ALIASES)}") from None


def default_cv_grid(spec: LearnerSpec) -> List[LearnerSpec]:
    """Hyperparameter grid searched on balanced accuracy"""
    return [spec.with_reg(v) for v in _CV_GRIDS[spec.kind]]


def default_reg_grid(kind: LearnerKind) -> List[float]:
    """Regularization axis for the regularization sweep"""
    if kind not in _REG_GRIDS:
        raise ValueError(f"No regularization sweep for {kind.value}")
    return list(_REG_GRIDS[kind])


def fit(spec: LearnerSpec, train: Dataset, include_sensitive: bool = True, seed: int = 0) -> TrainedModel:
    """Fit a learner; standardization statistics come from the training rows only"""
    if train.n == 0:
        raise SingleClassTrainingSet("training set is empty")
    if spec.kind in _NEEDS_BOTH_CLASSES and len(np.unique(train.target)) < 2:
        raise SingleClassTrainingSet(f"{spec.kind.value} needs both classes in the training set")

    X = train.design_matrix(include_sensitive)
    standardizer = Standardizer.fit(X)
    model = MODEL_CLASSES[spec.kind](spec, standardizer, include_sensitive)
    model.fit(standardizer.transform(X), train.target.astype(np.float64), np.random.default_rng(seed))

    if not model.converged:
        logger.warning(f"{spec.label()} stopped at the epoch cap ({model.epochs_run}) before converging")
    return model


def predict_proba(m: TrainedModel, x) -> Union[float, np.ndarray]:
    """P(Y=1) for one design row or a matrix of rows"""
    return m.predict_proba(x)


def cross_validated_scores(
    spec_grid: Sequence[LearnerSpec],
    train: Dataset,
    k: int,
    seed: int,
    include_sensitive: bool = True,
) -> List[float]:
    """Mean validation balanced accuracy of each grid element over shared folds"""
    folds = stratified_kfold(train, k, seed)
    scores = []
    for i, spec in enumerate(spec_grid):
        fold_scores = []
        for f, (train_idx, valid_idx) in enumerate(folds):
            model = fit(spec, train.subset(train_idx), include_sensitive, seed=child_seed(seed, i, f))
            valid = train.subset(valid_idx)
            fold_scores.append(balanced_accuracy(valid.target, model.predict_dataset(valid)))
        scores.append(float(np.mean(fold_scores)))
    return scores


def tune_balanced_accuracy(
    spec_grid: Sequence[LearnerSpec],
    train: Dataset,
    k: int,
    seed: int,
    include_sensitive: bool = True,
) -> LearnerSpec:
    """
    Grid element with the best mean CV balanced accuracy.

    Ties go to the more strongly regularized element.
    """
    if not spec_grid:
        raise ValueError("spec_grid must not be empty")
    if len(spec_grid) == 1:
        return spec_grid[0]

    scores = cross_validated_scores(spec_grid, train, k, seed, include_sensitive)
    best_score = max(scores)
    tied = [spec for spec, score in zip(spec_grid, scores) if score >= best_score - 1e-12]
    chosen = max(tied, key=lambda spec: spec.strength())
    logger.debug(f"CV balanced accuracy {dict(zip([s.label() for s in spec_grid], scores))} -> {chosen.label()}")
    return chosen
