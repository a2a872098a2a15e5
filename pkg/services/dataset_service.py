import logging
from typing import List, Tuple

import numpy as np

from models.dataset import Dataset, GroupPartition
from schemas.dataset import SplitSpec, StratifyOn
from services.exceptions import ClassTooSmall, StratumTooSmall
from services.sampling import largest_remainder

logger = logging.getLogger(__name__)

Fold = Tuple[np.ndarray, np.ndarray]

# Stratum codes in class-major order: (y=0,s=0), (y=0,s=1), (y=1,s=0), (y=1,s=1)
_GROUP_CODE_ORDER = (0, 1, 2, 3)


def partition_groups(d: Dataset) -> GroupPartition:
    """Split row indices into the four (S, Y) cells"""
    s, y = d.sensitive, d.target
    return GroupPartition(
        s0y1=np.flatnonzero((s == 0) & (y == 1)),
        s0y0=np.flatnonzero((s == 0) & (y == 0)),
        s1y1=np.flatnonzero((s == 1) & (y == 1)),
        s1y0=np.flatnonzero((s == 1) & (y == 0)),
    )


def _stratum_codes(d: Dataset, stratify_on: StratifyOn) -> np.ndarray:
    y = d.target.astype(np.int64)
    if stratify_on == StratifyOn.target:
        return y
    return 2 * y + d.sensitive.astype(np.int64)


def _stratum_name(code: int, stratify_on: StratifyOn) -> str:
    if stratify_on == StratifyOn.target:
        return f"Y={code}"
    return f"S{code % 2}Y{code // 2}"


def _clamp_allocation(alloc: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    """Move units so every stratum keeps at least one row on each side"""
    alloc = alloc.copy()
    low, high = np.ones_like(sizes), sizes - 1
    for _ in range(int(sizes.sum())):
        under = np.flatnonzero(alloc < low)
        over = np.flatnonzero(alloc > high)
        if len(under) == 0 and len(over) == 0:
            return alloc
        if len(under):
            i = under[0]
            donors = np.flatnonzero(alloc > low)
            if len(donors) == 0:
                break
            j = donors[np.argmax((alloc - low)[donors])]
            alloc[i] += 1
            alloc[j] -= 1
        else:
            i = over[0]
            takers = np.flatnonzero(alloc < high)
            if len(takers) == 0:
                break
            j = takers[np.argmax((high - alloc)[takers])]
            alloc[i] -= 1
            alloc[j] += 1
    raise StratumTooSmall("train/test", int(alloc.sum()), needed=len(sizes))


def split_indices(d: Dataset, spec: SplitSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Stratified train/test index sets; deterministic for a fixed seed"""
    codes = _stratum_codes(d, spec.stratify_on)
    present = np.unique(codes)
    sizes = np.array([(codes == c).sum() for c in present], dtype=np.int64)

    for code, size in zip(present, sizes):
        if size < 2:
            raise StratumTooSmall(_stratum_name(int(code), spec.stratify_on), int(size))

    n_train = int(np.floor(spec.train_fraction * d.n + 1e-9))
    alloc = largest_remainder(n_train * sizes / d.n, n_train)
    alloc = _clamp_allocation(alloc, sizes)

    rng = np.random.default_rng(spec.seed)
    train_parts, test_parts = [], []
    for code, k in zip(present, alloc):
        members = rng.permutation(np.flatnonzero(codes == code))
        train_parts.append(members[:k])
        test_parts.append(members[k:])

    train_idx = np.sort(np.concatenate(train_parts))
    test_idx = np.sort(np.concatenate(test_parts))
    return train_idx, test_idx


def split(d: Dataset, spec: SplitSpec) -> Tuple[Dataset, Dataset]:
    """Stratified train/test split"""
    train_idx, test_idx = split_indices(d, spec)
    logger.debug(f"Split {d.n} rows into train={len(train_idx)}, test={len(test_idx)}")
    return d.subset(train_idx), d.subset(test_idx)


def stratified_kfold(
    d: Dataset,
    k: int,
    seed: int,
    stratify_on: StratifyOn = StratifyOn.target,
) -> List[Fold]:
    """
    k (train_idx, valid_idx) pairs; every row is validated exactly once.

    Rows are shuffled within each stratum, laid out class-major, and dealt to
    folds round-robin, so each class (and each stratum) lands within one row
    of its share in every fold.
    """
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    for label in (0, 1):
        count = int((d.target == label).sum())
        if count < k:
            raise ClassTooSmall(label, count, folds=k)

    codes = _stratum_codes(d, stratify_on)
    rng = np.random.default_rng(seed)
    order = [c for c in _GROUP_CODE_ORDER if stratify_on == StratifyOn.class_and_group or c < 2]
    laid_out = np.concatenate([rng.permutation(np.flatnonzero(codes == c)) for c in order])

    fold_of = np.empty(d.n, dtype=np.int64)
    fold_of[laid_out] = np.arange(d.n) % k
    return [(np.flatnonzero(fold_of != f), np.flatnonzero(fold_of == f)) for f in range(k)]
