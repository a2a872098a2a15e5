import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence

import numpy as np

from models.dataset import Dataset
from schemas.dataset import StratifyOn
from schemas.learner import LearnerSpec
from schemas.repair import AMOUNT_GRID, AmountScore, RepairSpec, RepairStrategy
from services.augment_service import DEFAULT_K_NEIGHBORS, MIN_SMOTE_SEEDS, repair_dataset
from services.dataset_service import Fold, partition_groups, stratified_kfold
from services.exceptions import AllAmountsUndefined, StratumTooSmall
from services.learner_service import fit
from services.metrics_service import audit
from services.sampling import child_seed

logger = logging.getLogger(__name__)

DEFAULT_TUNE_FOLDS = 5

FoldObserver = Callable[[Dataset, Dataset], None]


def _check_folds(d_train: Dataset, folds: List[Fold], strategy: RepairStrategy) -> None:
    """
    Every fold-training portion must contain all four (S, Y) cells, and
    SMOTE_F needs enough S0Y1 seeds to interpolate between.
    """
    for f, (train_idx, _) in enumerate(folds):
        sizes = partition_groups(d_train.subset(train_idx)).sizes()
        for cell, size in sizes.items():
            needed = MIN_SMOTE_SEEDS if strategy == RepairStrategy.smote_f and cell == "s0y1" else 1
            if size < needed:
                raise StratumTooSmall(f"{cell} (training portion of fold {f})", size, needed=needed)


def _score_amount(
    d_train: Dataset,
    folds: List[Fold],
    strategy: RepairStrategy,
    amount: float,
    learner: LearnerSpec,
    seed: int,
    include_sensitive: bool,
    k_neighbors: int,
    on_fold: Optional[FoldObserver],
) -> AmountScore:
    us_values, ba_values = [], []
    for f, (train_idx, valid_idx) in enumerate(folds):
        fold_train = d_train.subset(train_idx)
        fold_valid = d_train.subset(valid_idx)
        # repair and fit seeds depend on the fold only, so candidates share random draws
        repair = RepairSpec(strategy=strategy, amount=amount, seed=child_seed(seed, f, 0))
        augmented = repair_dataset(fold_train, repair, k_neighbors)
        if on_fold is not None:
            on_fold(augmented, fold_valid)
        model = fit(learner, augmented, include_sensitive, seed=child_seed(seed, f, 1))
        report = audit(model, fold_valid)
        if report.us_s is not None:
            us_values.append(report.us_s)
        if report.balanced_accuracy is not None:
            ba_values.append(report.balanced_accuracy)

    median_us = float(np.median(us_values)) if us_values else None
    return AmountScore(
        amount=amount,
        median_us_s=median_us,
        median_balanced_accuracy=float(np.median(ba_values)) if ba_values else None,
        objective=abs(median_us - 1.0) if median_us is not None else None,
        defined_folds=len(us_values),
        folds=len(folds),
    )


def evaluate_amounts(
    d_train: Dataset,
    strategy: RepairStrategy,
    learner: LearnerSpec,
    k: int = DEFAULT_TUNE_FOLDS,
    seed: int = 0,
    amounts: Sequence[float] = AMOUNT_GRID,
    include_sensitive: bool = True,
    k_neighbors: int = DEFAULT_K_NEIGHBORS,
    on_fold: Optional[FoldObserver] = None,
    n_jobs: int = 1,
) -> List[AmountScore]:
    """
    Cross-validated score of every candidate amount.

    Only the fold-training portion is augmented; validation rows are real
    rows of d_train, audited untouched.
    """
    if strategy == RepairStrategy.no_repair:
        raise ValueError("tuning needs a repair strategy other than no_repair")

    folds = stratified_kfold(d_train, k, seed, stratify_on=StratifyOn.class_and_group)
    _check_folds(d_train, folds, strategy)

    def _run(amount: float) -> AmountScore:
        return _score_amount(
            d_train, folds, strategy, amount, learner, seed, include_sensitive, k_neighbors, on_fold
        )

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as executor:
            return list(executor.map(_run, amounts))
    return [_run(amount) for amount in amounts]


def select_amount(scores: Sequence[AmountScore]) -> AmountScore:
    """Smallest |US_S - 1|, then higher balanced accuracy, then smaller amount"""
    scored = [s for s in scores if s.objective is not None]
    if not scored:
        raise AllAmountsUndefined("US_S was undefined on every validation fold for every amount")

    def _key(score: AmountScore):
        ba = score.median_balanced_accuracy if score.median_balanced_accuracy is not None else -math.inf
        return (score.objective, -ba, score.amount)

    return min(scored, key=_key)


def tune_amount(
    d_train: Dataset,
    strategy: RepairStrategy,
    learner: LearnerSpec,
    k: int = DEFAULT_TUNE_FOLDS,
    seed: int = 0,
    amounts: Sequence[float] = AMOUNT_GRID,
    include_sensitive: bool = True,
    k_neighbors: int = DEFAULT_K_NEIGHBORS,
    on_fold: Optional[FoldObserver] = None,
    n_jobs: int = 1,
) -> RepairSpec:
    """Pick the augmentation amount whose validation US_S lands closest to 1"""
    if strategy == RepairStrategy.no_repair:
        raise ValueError("tuning needs a repair strategy other than no_repair")
    if len(amounts) == 1:
        return RepairSpec(strategy=strategy, amount=amounts[0], seed=seed)

    scores = evaluate_amounts(
        d_train, strategy, learner, k, seed, amounts, include_sensitive, k_neighbors, on_fold, n_jobs
    )
    best = select_amount(scores)
    logger.info(
        f"Tuned {strategy.value} amount={best.amount:.2f} "
        f"(median US_S={best.median_us_s:.3f}, {best.defined_folds}/{best.folds} folds defined)"
    )
    return RepairSpec(strategy=strategy, amount=best.amount, seed=seed)
