import math
import os

import numpy as np
import pytest

from schemas.learner import LearnerKind, LearnerSpec
from schemas.repair import RepairStrategy
from schemas.sweep import RepeatRecord
from schemas.synth import DEFAULT_SIGMAS, SynthConfig
from services import experiment_service, learner_service
from services.dataset_service import partition_groups
from services.exceptions import UndefinedMetric
from services.metrics_service import report_from_predictions
from services.synth_service import cell_counts, generate

# acceptance-scale runs spread repeats over every available core
SLOW_JOBS = os.cpu_count() or 1

NB = LearnerSpec.default(LearnerKind.gaussian_nb)
LOGREG = LearnerSpec.default(LearnerKind.logreg)
SMALL = SynthConfig(n=400, class_rate=0.3, minority_share=0.3)


def _report(y, p, s):
    return report_from_predictions(y, p, s)


# ==== aggregate ====

def test_aggregate_skips_undefined_repeats():
    defined = [
        RepeatRecord(repeat=i, seed=i, report=_report([1, 0, 1, 0], p, [0, 0, 1, 1]))
        for i, p in enumerate(([1, 0, 1, 0], [0, 0, 1, 0], [1, 1, 1, 0]))
    ]
    undefined = RepeatRecord(repeat=3, seed=3, report=_report([0, 0, 1, 1], [1, 0, 1, 0], [0, 0, 1, 1]))
    failed = RepeatRecord(repeat=4, seed=4, error="SingleClassTrainingSet: boom")
    medians = experiment_service.aggregate(defined + [undefined, failed])
    assert medians.us_s == 1.0                 # median of 1, 0, 2
    assert medians.n_defined == 3
    assert medians.n_skipped == 2
    assert medians.n_failed == 1


def test_aggregate_of_nothing_defined_is_none():
    failed = [RepeatRecord(repeat=i, seed=i, error="InfeasibleQuota") for i in range(3)]
    medians = experiment_service.aggregate(failed)
    assert medians.us_s is None and medians.balanced_accuracy is None
    assert medians.n_failed == 3


def test_repeat_record_needs_report_or_error():
    with pytest.raises(ValueError):
        RepeatRecord(repeat=0, seed=0)


# ==== sweeps on a small grid ====

def test_noise_sweep_shape_and_medians():
    result = experiment_service.sweep_noise(NB, SMALL, sigmas=(0.0, 1.0), repeats=2, seed=3)
    assert result.axis_names == ["sigma"]
    assert result.shape == (2,)
    for cell in result.cells:
        assert len(cell.records) == 2
        assert cell.medians == experiment_service.aggregate(cell.records)
    assert result.metadata.master_seed == 3
    assert result.cell_for(sigma=1.0).index == (1,)


def test_sweep_rerun_is_identical():
    a = experiment_service.sweep_noise(NB, SMALL, sigmas=(0.0, 0.5), repeats=2, seed=7)
    b = experiment_service.sweep_noise(NB, SMALL, sigmas=(0.0, 0.5), repeats=2, seed=7)
    assert a.cells == b.cells


def test_worker_processes_match_sequential_run():
    a = experiment_service.sweep_noise(NB, SMALL, sigmas=(0.0, 0.5), repeats=2, seed=7)
    b = experiment_service.sweep_noise(NB, SMALL, sigmas=(0.0, 0.5), repeats=2, seed=7, n_jobs=2)
    assert a.cells == b.cells


def test_repeat_seeds_are_a_function_of_cell_and_repeat():
    a = experiment_service.sweep_noise(NB, SMALL, sigmas=(0.0, 0.5), repeats=2, seed=7)
    b = experiment_service.sweep_noise(NB, SMALL, sigmas=(0.0, 0.5, 1.0), repeats=2, seed=7)
    for cell in a.cells:
        assert [r.seed for r in cell.records] == [r.seed for r in b.cells[cell.index[0]].records]
    seeds = [r.seed for cell in b.cells for r in cell.records]
    assert len(set(seeds)) == len(seeds)


def test_zero_repeats_rejected():
    with pytest.raises(ValueError):
        experiment_service.sweep_noise(NB, SMALL, sigmas=(0.0,), repeats=0, seed=0)


def test_regularization_sweep_uses_knob_name_as_axis():
    tree = LearnerSpec.default(LearnerKind.decision_tree)
    result = experiment_service.sweep_regularization(tree, SMALL, reg_grid=(1, 4), repeats=1, seed=0)
    assert result.axis_names == ["max_depth"]
    assert result.axes["max_depth"] == [1.0, 4.0]


def test_regularization_sweep_rejects_unregularized_kinds():
    with pytest.raises(ValueError):
        experiment_service.sweep_regularization(LearnerSpec.default(LearnerKind.knn), SMALL, repeats=1, seed=0)


def test_overwhelming_penalty_predicts_nobody_positive():
    result = experiment_service.sweep_regularization(LOGREG, SMALL, reg_grid=(1e6,), repeats=1, seed=2)
    assert result.cells[0].medians.us_s == 0.0


def test_depth_one_tree_predicts_only_the_majority_on_the_regularization_base():
    stump = LearnerSpec.default(LearnerKind.decision_tree, reg=1)
    for seed in range(4):
        d = generate(experiment_service.REGULARIZATION_BASE.model_copy(update={"seed": seed}))
        model = learner_service.fit(stump, d)
        assert model.predict_dataset(d).sum() == 0


def test_imbalance_sweep_marks_infeasible_cells():
    result = experiment_service.sweep_imbalance(
        NB, class_rates=(0.3, 0.9), minority_shares=(0.3,), repeats=2, seed=1, base=SynthConfig(n=400)
    )
    assert result.shape == (2, 1)
    feasible, infeasible = result.cell_at(0, 0), result.cell_at(1, 0)
    assert feasible.infeasible is None
    assert infeasible.infeasible.startswith("InfeasibleQuota")
    assert infeasible.medians.n_failed == 2
    assert all(r.failed for r in infeasible.records)
    assert math.isnan(result.median_grid("us_s")[1, 0])


def test_imbalance_cells_follow_quota_arithmetic():
    base = SynthConfig(n=1000)
    for class_rate in (0.1, 0.3):
        for share in (0.1, 0.5):
            cfg = base.model_copy(update={"class_rate": class_rate, "minority_share": share, "seed": 5})
            expected = cell_counts(cfg)["s0y1"]
            assert len(partition_groups(generate(cfg)).s0y1) == expected


def test_default_imbalance_grid_is_feasible():
    for class_rate in experiment_service.DEFAULT_CLASS_RATES:
        for share in experiment_service.DEFAULT_MINORITY_SHARES:
            cell_counts(SynthConfig(class_rate=class_rate, minority_share=share))


def test_remediation_arms_share_splits():
    result = experiment_service.compare_remediation(
        NB, [RepairStrategy.no_repair, RepairStrategy.counterfactual_l],
        repeats=2, seed=4, base=SynthConfig(n=400, class_rate=0.2, minority_share=0.45),
        tune_folds=3, amounts=(0.5, 1.0),
    )
    assert result.axes == {"strategy": ["no_repair", "cf_l"]}
    no_repair, cf_l = result.cells
    for a, b in zip(no_repair.records, cf_l.records):
        assert a.report.n_test == b.report.n_test
        assert a.report.counts.actual_positive(0) == b.report.counts.actual_positive(0)


def test_remediation_on_fixed_dataset(small_synthetic):
    result = experiment_service.compare_remediation(
        NB, [RepairStrategy.counterfactual_f], repeats=2, seed=1, data=small_synthetic, tune_folds=3, amounts=(1.0,)
    )
    assert result.cells[0].medians.n_failed == 0


def test_remediation_rejects_both_sources(small_synthetic):
    with pytest.raises(ValueError):
        experiment_service.compare_remediation(NB, [RepairStrategy.smote_f], repeats=1, seed=0, base=SMALL, data=small_synthetic)


def test_doubling_sweep_needs_counterfactual_strategy():
    with pytest.raises(ValueError):
        experiment_service.sweep_doubling(NB, RepairStrategy.smote_f, repeats=1, seed=0)


def test_doubling_sweep_runs_a_small_grid():
    result = experiment_service.sweep_doubling(
        NB, RepairStrategy.counterfactual_f, class_rates=(0.2,), minority_shares=(0.3, 0.5),
        repeats=1, seed=0, base=SynthConfig(n=400),
    )
    assert result.shape == (1, 2)
    assert result.metadata.learner.endswith("+cf_f")


# ==== trend ====

def test_trend_sign_and_undefined_case():
    result = experiment_service.sweep_regularization(LOGREG, SMALL, reg_grid=(1e-4, 1e6), repeats=1, seed=2)
    assert experiment_service.trend(result, "us_s", "l2_lambda") == pytest.approx(-1.0)
    single = experiment_service.sweep_regularization(LOGREG, SMALL, reg_grid=(1e-4,), repeats=1, seed=2)
    with pytest.raises(UndefinedMetric):
        experiment_service.trend(single, "us_s", "l2_lambda")
    with pytest.raises(ValueError):
        experiment_service.trend(result, "us_s", "sigma")


# ==== acceptance-scale trends ====

@pytest.mark.slow
def test_noise_magnifies_underestimation():
    result = experiment_service.sweep_noise(LOGREG, SynthConfig(n=5000), sigmas=DEFAULT_SIGMAS, repeats=20, seed=0, n_jobs=SLOW_JOBS)
    assert experiment_service.trend(result, "us_s", "sigma") <= -0.8
    assert experiment_service.trend(result, "balanced_accuracy", "sigma") <= -0.9


@pytest.mark.slow
@pytest.mark.parametrize("kind, weak, strong", [
    (LearnerKind.logreg, 1e-3, 1e3),
    (LearnerKind.decision_tree, 10, 1),
    (LearnerKind.neural_net, 1e-4, 1e2),
])
def test_regularization_exacerbates_underestimation(kind, weak, strong):
    result = experiment_service.sweep_regularization(
        LearnerSpec.default(kind), repeats=20, seed=0, n_jobs=SLOW_JOBS
    )
    axis = result.axis_names[0]
    assert result.cell_for(**{axis: float(strong)}).medians.us_s <= result.cell_for(**{axis: float(weak)}).medians.us_s - 0.1


@pytest.mark.slow
def test_imbalance_corner_is_darkest():
    result = experiment_service.sweep_imbalance(LOGREG, repeats=20, seed=0, n_jobs=SLOW_JOBS)
    grid = result.median_grid("us_s")
    assert grid[0, 0] <= grid[-1, -1] - 0.1
    diagonal = np.diag(grid)
    assert sum(later >= earlier for earlier, later in zip(diagonal, diagonal[1:])) >= 4


@pytest.mark.slow
def test_counterfactual_repair_brings_underestimation_near_one():
    nn = LearnerSpec.default(LearnerKind.neural_net)
    result = experiment_service.compare_remediation(
        nn,
        [RepairStrategy.no_repair, RepairStrategy.counterfactual_f, RepairStrategy.counterfactual_l],
        repeats=20, seed=0, n_jobs=SLOW_JOBS,
    )
    no_repair = result.cell_for(strategy="no_repair").medians
    cf_f = result.cell_for(strategy="cf_f").medians
    cf_l = result.cell_for(strategy="cf_l").medians
    assert no_repair.us_s < 0.9
    assert 0.85 <= cf_f.us_s <= 1.15
    assert 0.85 <= cf_l.us_s <= 1.15
    assert cf_f.balanced_accuracy >= no_repair.balanced_accuracy - 0.01
