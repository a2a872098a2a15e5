"""
Sweep families: repeated generate / split / fit / audit over a parameter grid.

Every repeat derives its seeds from the master seed, its repeat number and
(for everything after the split) its cell index. A rerun with the same
master seed reproduces the whole result whether the repeats run
sequentially or in worker processes.
"""
import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from datetime import datetime, timezone
from functools import partial
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import spearmanr

from models.dataset import Dataset
from schemas.audit import AuditReport
from schemas.dataset import SplitSpec, StratifyOn
from schemas.learner import LearnerKind, LearnerSpec
from schemas.repair import AMOUNT_GRID, RepairStrategy
from schemas.sweep import (
    METRICS,
    AxisValue,
    CellMedians,
    RepeatRecord,
    SweepCell,
    SweepFamily,
    SweepMetadata,
    SweepResult,
)
from schemas.synth import DEFAULT_SIGMAS, NoiseSpec, SynthConfig
from services.augment_service import doubling_spec, repair_dataset
from services.dataset_service import split
from services.exceptions import BiasToolkitError, InfeasibleConfiguration, UndefinedMetric
from services.learner_service import default_cv_grid, default_reg_grid, fit, tune_balanced_accuracy
from services.metrics_service import audit
from services.sampling import child_seed
from services.synth_service import cell_counts, generate, inject_noise
from services.tune_service import DEFAULT_TUNE_FOLDS, tune_amount

logger = logging.getLogger(__name__)

DEFAULT_REPEATS = 20
DEFAULT_CV_FOLDS = 10
DEFAULT_TRAIN_FRACTION = 0.7

DEFAULT_CLASS_RATES = (0.10, 0.15, 0.20, 0.25, 0.30)
DEFAULT_MINORITY_SHARES = (0.10, 0.20, 0.30, 0.40, 0.50)

# Synthetic setup of the remediation comparison: 20% positives, 45% of them minority
REMEDIATION_BASE = SynthConfig(class_rate=0.20, minority_share=0.45)

# Synthetic setup of the regularization sweep: 25% positives, half of them minority.
# At 30% positives a depth-1 tree's upper leaf sits near a 50% rate and predicts
# positives on some draws only.
REGULARIZATION_BASE = SynthConfig(class_rate=0.25, minority_share=0.50)

REGULARIZED_KINDS = (LearnerKind.logreg, LearnerKind.decision_tree, LearnerKind.neural_net)

# ==== SEEDS ====
# Data and split seeds depend on the repeat only, so cells of one repeat share
# the same draw; everything downstream of the cell parameters gets a cell seed.


def _data_seed(master_seed: int, repeat: int) -> int:
    return child_seed(master_seed, 0, repeat)


def _split_seed(master_seed: int, repeat: int) -> int:
    return child_seed(master_seed, 1, repeat)


def _cell_seed(master_seed: int, index: Tuple[int, ...], repeat: int) -> int:
    return child_seed(master_seed, 2, *index, repeat)


# ==== ONE REPEAT ====


def _split(d: Dataset, seed: int, train_fraction: float) -> Tuple[Dataset, Dataset]:
    return split(d, SplitSpec(train_fraction=train_fraction, seed=seed, stratify_on=StratifyOn.class_and_group))


def _tuned_audit(learner: LearnerSpec, train: Dataset, test: Dataset, cv_folds: int, seed: int) -> AuditReport:
    """CV-tune the learner on balanced accuracy, refit on all training rows, audit"""
    chosen = tune_balanced_accuracy(default_cv_grid(learner), train, cv_folds, child_seed(seed, 1))
    return audit(fit(chosen, train, seed=child_seed(seed, 2)), test)


def _synthetic_repeat(
    learner: LearnerSpec,
    cfg: SynthConfig,
    sigma: Optional[float],
    data_seed: int,
    split_seed: int,
    cell_seed: int,
    cv_folds: int,
    train_fraction: float,
) -> AuditReport:
    d = generate(cfg.model_copy(update={"seed": data_seed}))
    if sigma is not None:
        d = inject_noise(d, NoiseSpec(sigma=sigma, seed=child_seed(cell_seed, 0)))
    train, test = _split(d, split_seed, train_fraction)
    return _tuned_audit(learner, train, test, cv_folds, cell_seed)


def _fixed_knob_repeat(
    learner: LearnerSpec,
    cfg: SynthConfig,
    data_seed: int,
    split_seed: int,
    cell_seed: int,
    train_fraction: float,
) -> AuditReport:
    d = generate(cfg.model_copy(update={"seed": data_seed}))
    train, test = _split(d, split_seed, train_fraction)
    return audit(fit(learner, train, seed=child_seed(cell_seed, 2)), test)


def _remediation_repeat(
    learner: LearnerSpec,
    strategy: RepairStrategy,
    cfg: Optional[SynthConfig],
    data: Optional[Dataset],
    data_seed: int,
    split_seed: int,
    cell_seed: int,
    tune_folds: int,
    amounts: Sequence[float],
    train_fraction: float,
) -> AuditReport:
    d = data if data is not None else generate(cfg.model_copy(update={"seed": data_seed}))
    train, test = _split(d, split_seed, train_fraction)
    if strategy != RepairStrategy.no_repair:
        tuned = tune_amount(train, strategy, learner, k=tune_folds, seed=child_seed(cell_seed, 3), amounts=amounts)
        train = repair_dataset(train, tuned.model_copy(update={"seed": child_seed(cell_seed, 4)}))
    return audit(fit(learner, train, seed=child_seed(cell_seed, 2)), test)


def _doubling_repeat(
    learner: LearnerSpec,
    strategy: RepairStrategy,
    cfg: SynthConfig,
    data_seed: int,
    split_seed: int,
    cell_seed: int,
    train_fraction: float,
) -> AuditReport:
    d = generate(cfg.model_copy(update={"seed": data_seed}))
    train, test = _split(d, split_seed, train_fraction)
    train = repair_dataset(train, doubling_spec(train, strategy, seed=child_seed(cell_seed, 4)))
    return audit(fit(learner, train, seed=child_seed(cell_seed, 2)), test)


def _record(repeat: int, seed: int, job: Callable[[], AuditReport]) -> RepeatRecord:
    """Run one repeat; toolkit errors become a failure record instead of aborting the sweep"""
    try:
        return RepeatRecord(repeat=repeat, seed=seed, report=job())
    except BiasToolkitError as exc:
        logger.error(f"Repeat {repeat} (seed {seed}) failed: {type(exc).__name__}: {exc}")
        return RepeatRecord(repeat=repeat, seed=seed, error=f"{type(exc).__name__}: {exc}")


# ==== AGGREGATION ====


def aggregate(records: Sequence[RepeatRecord]) -> CellMedians:
    """Per-metric median over the repeats where that metric is defined"""
    medians: Dict[str, Optional[float]] = {}
    for metric in METRICS:
        values = [r.metric(metric) for r in records if r.metric(metric) is not None]
        medians[metric] = float(np.median(values)) if values else None
    n_defined = sum(1 for r in records if r.defined)
    return CellMedians(
        **medians,
        n_defined=n_defined,
        n_skipped=len(records) - n_defined,
        n_failed=sum(1 for r in records if r.failed),
    )


Job = Tuple[int, int, int, Callable[[], AuditReport]]   # (cell position, repeat, seed, job)


def _execute(jobs: List[Job], n_jobs: int) -> Dict[Tuple[int, int], RepeatRecord]:
    if n_jobs <= 1:
        return {(pos, r): _record(r, seed, job) for pos, r, seed, job in jobs}

    results: Dict[Tuple[int, int], RepeatRecord] = {}
    with ProcessPoolExecutor(max_workers=n_jobs) as executor:
        futures = {executor.submit(_record, r, seed, job): (pos, r) for pos, r, seed, job in jobs}
        for future in as_completed(futures):
            results[futures[future]] = future.result()
    return results


def _run_grid(
    family: SweepFamily,
    axes: Dict[str, List[AxisValue]],
    learner_label: str,
    repeats: int,
    master_seed: int,
    make_job: Callable[[Tuple[int, ...], int, int], Callable[[], AuditReport]],
    n_jobs: int,
    infeasible: Optional[Dict[Tuple[int, ...], str]] = None,
) -> SweepResult:
    """Build every (cell, repeat) job, run them, and reduce in cell order"""
    if repeats < 1:
        raise ValueError(f"repeats must be at least 1, got {repeats}")
    infeasible = infeasible or {}
    started = datetime.now(timezone.utc)
    indices = list(itertools.product(*[range(len(v)) for v in axes.values()]))
    logger.info(f"Starting {family.value} sweep: {len(indices)} cells x {repeats} repeats, seed={master_seed}")

    jobs: List[Job] = []
    for pos, index in enumerate(indices):
        if index in infeasible:
            continue
        for r in range(repeats):
            seed = _cell_seed(master_seed, index, r)
            jobs.append((pos, r, seed, make_job(index, r, seed)))
    results = _execute(jobs, n_jobs)

    names = list(axes)
    cells: List[SweepCell] = []
    for pos, index in enumerate(indices):
        coords = {name: axes[name][i] for name, i in zip(names, index)}
        if index in infeasible:
            records = [
                RepeatRecord(repeat=r, seed=_cell_seed(master_seed, index, r), error=infeasible[index])
                for r in range(repeats)
            ]
        else:
            records = [results[(pos, r)] for r in range(repeats)]
        medians = aggregate(records)
        if medians.n_skipped:
            logger.warning(f"Cell {coords}: {medians.n_skipped}/{repeats} repeats left out of the US_S median")
        cells.append(SweepCell(
            index=index,
            coords=coords,
            records=records,
            medians=medians,
            infeasible=infeasible.get(index),
        ))
        logger.debug(f"Cell {coords} done: median US_S={medians.us_s}")

    result = SweepResult(
        axes=axes,
        cells=cells,
        metadata=SweepMetadata(
            family=family,
            master_seed=master_seed,
            learner=learner_label,
            repeats=repeats,
            started_at=started,
            finished_at=datetime.now(timezone.utc),
        ),
    )
    logger.info(f"Finished {family.value} sweep in {(result.metadata.finished_at - started).total_seconds():.1f}s")
    return result


def _infeasible_cells(base: SynthConfig, class_rates: Sequence[float], minority_shares: Sequence[float]):
    infeasible: Dict[Tuple[int, ...], str] = {}
    for i, class_rate in enumerate(class_rates):
        for j, share in enumerate(minority_shares):
            try:
                cell_counts(base.model_copy(update={"class_rate": class_rate, "minority_share": share}))
            except InfeasibleConfiguration as exc:
                infeasible[(i, j)] = f"{type(exc).__name__}: {exc}"
                logger.warning(f"Cell class_rate={class_rate}, minority_share={share} is infeasible: {exc}")
    return infeasible


# ==== SWEEP FAMILIES ====


def sweep_noise(
    learner: LearnerSpec,
    base: SynthConfig,
    sigmas: Sequence[float] = DEFAULT_SIGMAS,
    repeats: int = DEFAULT_REPEATS,
    seed: int = 0,
    cv_folds: int = DEFAULT_CV_FOLDS,
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
    n_jobs: int = 1,
) -> SweepResult:
    """Irreducible-error sweep: noise of growing sigma on standardized features"""
    axes = {"sigma": [float(s) for s in sigmas]}

    def make_job(index, r, cell_seed):
        return partial(
            _synthetic_repeat, learner, base, axes["sigma"][index[0]],
            _data_seed(seed, r), _split_seed(seed, r), cell_seed, cv_folds, train_fraction,
        )

    return _run_grid(SweepFamily.noise, axes, learner.label(), repeats, seed, make_job, n_jobs)


def sweep_regularization(
    learner: LearnerSpec,
    base: Optional[SynthConfig] = None,
    reg_grid: Optional[Sequence[float]] = None,
    repeats: int = DEFAULT_REPEATS,
    seed: int = 0,
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
    n_jobs: int = 1,
) -> SweepResult:
    """Fit with each regularization knob value held fixed; the knob is the x-axis"""
    if learner.kind not in REGULARIZED_KINDS:
        raise ValueError(f"regularization sweep supports {[k.value for k in REGULARIZED_KINDS]}, got {learner.kind.value}")
    base = base or REGULARIZATION_BASE
    values = [float(v) for v in (reg_grid if reg_grid is not None else default_reg_grid(learner.kind))]
    axes = {learner.semantics: values}

    def make_job(index, r, cell_seed):
        return partial(
            _fixed_knob_repeat, learner.with_reg(values[index[0]]), base,
            _data_seed(seed, r), _split_seed(seed, r), cell_seed, train_fraction,
        )

    return _run_grid(SweepFamily.regularization, axes, learner.label(), repeats, seed, make_job, n_jobs)


def sweep_imbalance(
    learner: LearnerSpec,
    class_rates: Sequence[float] = DEFAULT_CLASS_RATES,
    minority_shares: Sequence[float] = DEFAULT_MINORITY_SHARES,
    repeats: int = DEFAULT_REPEATS,
    seed: int = 0,
    base: Optional[SynthConfig] = None,
    cv_folds: int = DEFAULT_CV_FOLDS,
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
    n_jobs: int = 1,
) -> SweepResult:
    """
    Class imbalance x feature imbalance grid.

    Cells whose quotas are infeasible are kept in the result with a failure
    record per repeat and SweepCell.infeasible set.
    """
    base = base or SynthConfig()
    axes = {"class_rate": [float(v) for v in class_rates], "minority_share": [float(v) for v in minority_shares]}
    infeasible = _infeasible_cells(base, axes["class_rate"], axes["minority_share"])

    def make_job(index, r, cell_seed):
        cfg = base.model_copy(update={
            "class_rate": axes["class_rate"][index[0]],
            "minority_share": axes["minority_share"][index[1]],
        })
        return partial(
            _synthetic_repeat, learner, cfg, None,
            _data_seed(seed, r), _split_seed(seed, r), cell_seed, cv_folds, train_fraction,
        )

    return _run_grid(SweepFamily.imbalance, axes, learner.label(), repeats, seed, make_job, n_jobs, infeasible)


def compare_remediation(
    learner: LearnerSpec,
    strategies: Sequence[RepairStrategy],
    repeats: int = DEFAULT_REPEATS,
    seed: int = 0,
    base: Optional[SynthConfig] = None,
    data: Optional[Dataset] = None,
    tune_folds: int = DEFAULT_TUNE_FOLDS,
    amounts: Sequence[float] = AMOUNT_GRID,
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
    n_jobs: int = 1,
) -> SweepResult:
    """
    Tuned repair strategies against each other on the same splits.

    Works on fresh synthetic draws (base) or on one fixed dataset (data), in
    which case repeats differ only in the split and the tuning folds.
    """
    if base is not None and data is not None:
        raise ValueError("pass either a synthetic base or a dataset, not both")
    if not strategies:
        raise ValueError("strategies must not be empty")
    strategies = list(dict.fromkeys(strategies))
    if base is None and data is None:
        base = REMEDIATION_BASE
    axes = {"strategy": [s.value for s in strategies]}

    def make_job(index, r, cell_seed):
        return partial(
            _remediation_repeat, learner, strategies[index[0]], base, data,
            _data_seed(seed, r), _split_seed(seed, r), cell_seed, tune_folds, tuple(amounts), train_fraction,
        )

    return _run_grid(SweepFamily.remediation, axes, learner.label(), repeats, seed, make_job, n_jobs)


def sweep_doubling(
    learner: LearnerSpec,
    strategy: RepairStrategy,
    class_rates: Sequence[float] = DEFAULT_CLASS_RATES,
    minority_shares: Sequence[float] = DEFAULT_MINORITY_SHARES,
    repeats: int = DEFAULT_REPEATS,
    seed: int = 0,
    base: Optional[SynthConfig] = None,
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
    n_jobs: int = 1,
) -> SweepResult:
    """Untuned counterfactual repair (N = |S0Y1|) over the imbalance grid"""
    if strategy not in (RepairStrategy.counterfactual_f, RepairStrategy.counterfactual_l):
        raise ValueError(f"doubling sweep needs cf_f or cf_l, got {strategy.value}")
    base = base or SynthConfig()
    axes = {"class_rate": [float(v) for v in class_rates], "minority_share": [float(v) for v in minority_shares]}
    infeasible = _infeasible_cells(base, axes["class_rate"], axes["minority_share"])

    def make_job(index, r, cell_seed):
        cfg = base.model_copy(update={
            "class_rate": axes["class_rate"][index[0]],
            "minority_share": axes["minority_share"][index[1]],
        })
        return partial(
            _doubling_repeat, learner, strategy, cfg,
            _data_seed(seed, r), _split_seed(seed, r), cell_seed, train_fraction,
        )

    label = f"{learner.label()}+{strategy.value}"
    return _run_grid(SweepFamily.doubling, axes, label, repeats, seed, make_job, n_jobs, infeasible)


def trend(result: SweepResult, metric: str, axis: str) -> float:
    """Spearman rank correlation between an axis and the per-cell median of a metric"""
    if axis not in result.axes:
        raise ValueError(f"Unknown axis '{axis}'; result has {result.axis_names}")
    position = result.axis_names.index(axis)
    xs, ys = [], []
    for cell, value in zip(result.cells, result.median_grid(metric).ravel()):
        if not math.isnan(value):
            xs.append(float(result.axes[axis][cell.index[position]]))
            ys.append(float(value))
    if len(xs) < 2 or len(set(xs)) < 2 or len(set(ys)) < 2:
        raise UndefinedMetric("spearman", f"need two distinct defined points along {axis}")
    rho, _ = spearmanr(xs, ys)
    return float(rho)
