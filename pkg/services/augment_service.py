import logging
from typing import Union

import numpy as np
from scipy.spatial.distance import cdist

from learners.base import TrainedModel
from models.dataset import Dataset
from schemas.learner import LearnerSpec
from schemas.repair import STRATEGY_ALIASES, RepairSpec, RepairStrategy
from services.dataset_service import partition_groups
from services.exceptions import EmptySourcePool, TooFewMinorityPositives
from services.learner_service import fit
from services.sampling import round_half_up
from services.synth_service import standardize_columns

logger = logging.getLogger(__name__)

DEFAULT_K_NEIGHBORS = 5
MIN_SMOTE_SEEDS = 2


def parse_strategy(name: Union[str, RepairStrategy]) -> RepairStrategy:
    if isinstance(name, RepairStrategy):
        return name
    try:
        return STRATEGY_ALIASES[name.strip().lower()]
    except KeyError:
        raise ValueError(f"Unknown strategy '{name}'; choose from {sorted(STRATEGY_ALIASES)}") from None


def source_pool(d: Dataset, strategy: RepairStrategy) -> np.ndarray:
    """Rows a counterfactual strategy samples from"""
    groups = partition_groups(d)
    if strategy == RepairStrategy.counterfactual_f:
        return groups.s1y1
    if strategy == RepairStrategy.counterfactual_l:
        return groups.s0y0
    raise ValueError(f"{strategy.value} is not a counterfactual strategy")


def counterfactual_augment(d: Dataset, spec: RepairSpec) -> Dataset:
    """
    Append N = round(amount * |pool|) counterfactual rows, sampled with replacement.

    cf_f samples S1Y1 and sets S=0; cf_l samples S0Y0 and sets Y=1.
    Original rows are kept as the prefix of the output.
    """
    pool = source_pool(d, spec.strategy)
    if len(pool) == 0:
        raise EmptySourcePool(f"{spec.strategy.value} source pool is empty")

    n_new = round_half_up(spec.amount * len(pool))
    if n_new == 0:
        return d

    rng = np.random.default_rng(spec.seed)
    sampled = d.subset(rng.choice(pool, size=n_new, replace=True))
    if spec.strategy == RepairStrategy.counterfactual_f:
        counterfactuals = Dataset(
            features=sampled.features,
            target=sampled.target,
            sensitive=np.zeros(n_new, dtype=np.int8),
            feature_names=d.feature_names,
        )
    else:
        counterfactuals = Dataset(
            features=sampled.features,
            target=np.ones(n_new, dtype=np.int8),
            sensitive=sampled.sensitive,
            feature_names=d.feature_names,
        )
    logger.debug(f"{spec.strategy.value}: added {n_new} rows from a pool of {len(pool)}")
    return d.concat(counterfactuals)


def smote_f(d: Dataset, spec: RepairSpec, k_neighbors: int = DEFAULT_K_NEIGHBORS) -> Dataset:
    """
    SMOTE restricted to minority positives (S0Y1).

    Adds round(amount * (|S1Y1| - |S0Y1|)) rows, each interpolated between an
    S0Y1 seed row and one of its k nearest S0Y1 neighbours.
    """
    if k_neighbors < 1:
        raise ValueError("k_neighbors must be at least 1")
    groups = partition_groups(d)
    pool = groups.s0y1
    if len(pool) < MIN_SMOTE_SEEDS:
        raise TooFewMinorityPositives(f"SMOTE_F needs at least {MIN_SMOTE_SEEDS} S0Y1 rows, found {len(pool)}")

    gap = len(groups.s1y1) - len(pool)
    if gap <= 0:
        logger.warning(f"NothingToAdd: |S1Y1|={len(groups.s1y1)} <= |S0Y1|={len(pool)}, dataset returned unchanged")
        return d
    n_new = round_half_up(spec.amount * gap)
    if n_new == 0:
        return d

    k = min(k_neighbors, len(pool) - 1)
    scaled = standardize_columns(d.features)[pool]
    distances = cdist(scaled, scaled, metric="euclidean")
    np.fill_diagonal(distances, np.inf)
    neighbors = np.argsort(distances, axis=1, kind="stable")[:, :k]

    rng = np.random.default_rng(spec.seed)
    seed_pos = rng.integers(len(pool), size=n_new)
    neighbor_pos = neighbors[seed_pos, rng.integers(k, size=n_new)]
    gap_fraction = rng.random(n_new)[:, None]

    seeds = d.features[pool[seed_pos]]
    partners = d.features[pool[neighbor_pos]]
    synthetic = Dataset(
        features=seeds + gap_fraction * (partners - seeds),
        target=np.ones(n_new, dtype=np.int8),
        sensitive=np.zeros(n_new, dtype=np.int8),
        feature_names=d.feature_names,
    )
    logger.debug(f"smote_f: added {n_new} interpolated S0Y1 rows (k={k})")
    return d.concat(synthetic)


def repair_dataset(d: Dataset, repair: RepairSpec, k_neighbors: int = DEFAULT_K_NEIGHBORS) -> Dataset:
    if repair.strategy == RepairStrategy.no_repair:
        return d
    if repair.strategy == RepairStrategy.smote_f:
        return smote_f(d, repair, k_neighbors)
    return counterfactual_augment(d, repair)


def repair_and_train(
    d_train: Dataset,
    repair: RepairSpec,
    learner: LearnerSpec,
    include_sensitive: bool = True,
    seed: int = 0,
) -> TrainedModel:
    """Augment the training set, then fit the learner on it"""
    return fit(learner, repair_dataset(d_train, repair), include_sensitive, seed=seed)


def doubling_spec(d: Dataset, strategy: RepairStrategy, seed: int = 0) -> RepairSpec:
    """Counterfactual RepairSpec whose N equals |S0Y1| (doubles the minority positives)"""
    pool = source_pool(d, strategy)
    n_target = len(partition_groups(d).s0y1)
    if n_target == 0:
        raise TooFewMinorityPositives("no S0Y1 rows to double")
    if len(pool) == 0:
        raise EmptySourcePool(f"{strategy.value} source pool is empty")
    amount = n_target / len(pool)
    if amount > 1.0:
        logger.warning(f"{strategy.value} pool ({len(pool)}) smaller than |S0Y1| ({n_target}); using the whole pool")
        amount = 1.0
    return RepairSpec(strategy=strategy, amount=amount, seed=seed)
