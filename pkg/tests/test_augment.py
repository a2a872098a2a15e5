import numpy as np
import pytest
from pydantic import ValidationError

from models.dataset import Dataset
from schemas.learner import LearnerKind, LearnerSpec
from schemas.repair import RepairSpec, RepairStrategy
from services import augment_service, learner_service
from services.dataset_service import partition_groups
from services.exceptions import EmptySourcePool, TooFewMinorityPositives


def _appended(before: Dataset, after: Dataset) -> Dataset:
    assert after.subset(np.arange(before.n)) == before
    return after.subset(np.arange(before.n, after.n))


# ==== counterfactual ====

def test_cf_f_flips_sensitive_of_favoured_positives(small_synthetic):
    groups = partition_groups(small_synthetic)
    out = augment_service.counterfactual_augment(small_synthetic, RepairSpec(strategy=RepairStrategy.counterfactual_f, amount=0.5, seed=1))
    new = _appended(small_synthetic, out)
    assert new.n == 63                      # round(0.5 * 126)
    assert np.all(new.sensitive == 0)
    assert np.all(new.target == 1)
    pool_rows = {tuple(r) for r in small_synthetic.features[groups.s1y1]}
    assert all(tuple(r) in pool_rows for r in new.features)


def test_cf_l_relabels_minority_negatives(small_synthetic):
    groups = partition_groups(small_synthetic)
    out = augment_service.counterfactual_augment(small_synthetic, RepairSpec(strategy=RepairStrategy.counterfactual_l, amount=1.0, seed=2))
    new = _appended(small_synthetic, out)
    assert new.n == len(groups.s0y0)
    assert np.all(new.sensitive == 0)
    assert np.all(new.target == 1)


def test_counterfactual_empty_pool(four_cell_dataset):
    d = four_cell_dataset.subset([0, 1, 3])    # drops the only S1Y1 row
    with pytest.raises(EmptySourcePool):
        augment_service.counterfactual_augment(d, RepairSpec(strategy=RepairStrategy.counterfactual_f, seed=0))


def test_counterfactual_is_deterministic(small_synthetic):
    spec = RepairSpec(strategy=RepairStrategy.counterfactual_f, amount=0.3, seed=5)
    assert augment_service.counterfactual_augment(small_synthetic, spec) == augment_service.counterfactual_augment(small_synthetic, spec)


def test_doubling_adds_one_row_per_minority_positive(small_synthetic):
    groups = partition_groups(small_synthetic)
    for strategy in (RepairStrategy.counterfactual_f, RepairStrategy.counterfactual_l):
        spec = augment_service.doubling_spec(small_synthetic, strategy, seed=3)
        out = augment_service.repair_dataset(small_synthetic, spec)
        assert out.n - small_synthetic.n == len(groups.s0y1)


# ==== smote_f ====

def test_smote_closes_the_gap_at_full_amount(small_synthetic):
    groups = partition_groups(small_synthetic)
    out = augment_service.smote_f(small_synthetic, RepairSpec(strategy=RepairStrategy.smote_f, amount=1.0, seed=4))
    after = partition_groups(out)
    assert len(after.s0y1) == len(groups.s1y1)
    assert len(after.s1y1) == len(groups.s1y1)


def test_smote_rows_lie_inside_the_minority_positive_box(small_synthetic):
    groups = partition_groups(small_synthetic)
    out = augment_service.smote_f(small_synthetic, RepairSpec(strategy=RepairStrategy.smote_f, amount=0.5, seed=6))
    new = _appended(small_synthetic, out)
    assert new.n == 36                      # round(0.5 * (126 - 54))
    seeds = small_synthetic.features[groups.s0y1]
    assert np.all(new.features >= seeds.min(axis=0) - 1e-9)
    assert np.all(new.features <= seeds.max(axis=0) + 1e-9)
    assert np.all(new.target == 1) and np.all(new.sensitive == 0)


def test_smote_needs_two_minority_positives(four_cell_dataset):
    with pytest.raises(TooFewMinorityPositives):
        augment_service.smote_f(four_cell_dataset, RepairSpec(strategy=RepairStrategy.smote_f, seed=0))


def test_smote_with_nothing_to_add_returns_input():
    # three S0Y1 rows against two S1Y1 rows
    d = Dataset(
        features=[[0.0], [1.0], [2.0], [3.0], [4.0], [5.0]],
        target=[1, 1, 1, 1, 1, 0],
        sensitive=[0, 0, 0, 1, 1, 1],
        feature_names=("x",),
    )
    out = augment_service.smote_f(d, RepairSpec(strategy=RepairStrategy.smote_f, seed=0))
    assert out is d


def test_smote_rejects_bad_k(small_synthetic):
    with pytest.raises(ValueError):
        augment_service.smote_f(small_synthetic, RepairSpec(strategy=RepairStrategy.smote_f, seed=0), k_neighbors=0)


# ==== dispatch ====

def test_no_repair_is_identity(small_synthetic):
    assert augment_service.repair_dataset(small_synthetic, RepairSpec(strategy=RepairStrategy.no_repair)) is small_synthetic


def test_repair_never_modifies_input(small_synthetic):
    before = small_synthetic.features.copy()
    for strategy in (RepairStrategy.smote_f, RepairStrategy.counterfactual_f, RepairStrategy.counterfactual_l):
        augment_service.repair_dataset(small_synthetic, RepairSpec(strategy=strategy, seed=1))
    assert np.array_equal(small_synthetic.features, before)


def test_repair_and_train_returns_a_fitted_model(small_synthetic):
    model = augment_service.repair_and_train(
        small_synthetic,
        RepairSpec(strategy=RepairStrategy.counterfactual_l, amount=0.2, seed=1),
        LearnerSpec.default(LearnerKind.gaussian_nb),
    )
    assert model.predict_dataset(small_synthetic).shape == (small_synthetic.n,)


@pytest.mark.parametrize("kind", [LearnerKind.logreg, LearnerKind.neural_net, LearnerKind.decision_tree])
def test_repair_and_train_without_repair_matches_plain_fit(kind, small_synthetic):
    spec = LearnerSpec.default(kind)
    repaired = augment_service.repair_and_train(
        small_synthetic, RepairSpec(strategy=RepairStrategy.no_repair), spec, seed=3
    )
    plain = learner_service.fit(spec, small_synthetic, seed=3)
    assert np.array_equal(repaired.predict_proba_dataset(small_synthetic), plain.predict_proba_dataset(small_synthetic))


def test_full_cf_f_raises_minority_positive_rate(small_synthetic):
    before = partition_groups(small_synthetic)
    repaired = augment_service.repair_dataset(
        small_synthetic, RepairSpec(strategy=RepairStrategy.counterfactual_f, amount=1.0, seed=4)
    )
    after = partition_groups(repaired)
    rate_before = len(before.s0y1) / (len(before.s0y1) + len(before.s0y0))
    rate_after = len(after.s0y1) / (len(after.s0y1) + len(after.s0y0))
    assert rate_after > rate_before
    assert len(after.s0y1) == len(before.s0y1) + len(before.s1y1)


def test_parse_strategy():
    assert augment_service.parse_strategy("SMOTE") == RepairStrategy.smote_f
    assert augment_service.parse_strategy("counterfactual_l") == RepairStrategy.counterfactual_l
    with pytest.raises(ValueError):
        augment_service.parse_strategy("reweigh")


def test_amount_bounds():
    with pytest.raises(ValidationError):
        RepairSpec(strategy=RepairStrategy.smote_f, amount=0.0)
    with pytest.raises(ValidationError):
        RepairSpec(strategy=RepairStrategy.smote_f, amount=1.5)
