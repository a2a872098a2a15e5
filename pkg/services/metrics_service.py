import logging

import numpy as np

from learners.base import TrainedModel
from models.dataset import Dataset
from schemas.audit import AuditReport, ContingencyTable
from services.exceptions import UndefinedMetric

logger = logging.getLogger(__name__)

EIGHTY_PERCENT_RULE = 0.8


def _table(y_true, y_pred, s) -> ContingencyTable:
    return ContingencyTable.from_arrays(y_true, y_pred, s)


def underestimation_score(y_true, y_pred, s) -> float:
    """
    US_S = P[Y_hat=1 | S=0] / P[Y=1 | S=0].

    Below 1 the classifier under-predicts the desirable outcome for the minority.
    """
    table = _table(y_true, y_pred, s)
    if table.group_size(0) == 0:
        raise UndefinedMetric("US_S", "no minority (S=0) rows")
    value = table.us_s()
    if value is None:
        raise UndefinedMetric("US_S", "no minority row has Y=1")
    return value


def disparate_impact(y_pred, s) -> float:
    """DI_S = P[Y_hat=1 | S=0] / P[Y_hat=1 | S=1]"""
    y_pred = np.asarray(y_pred)
    table = _table(np.zeros(len(y_pred), dtype=np.int64), y_pred, s)
    if table.group_size(0) == 0 or table.group_size(1) == 0:
        raise UndefinedMetric("DI_S", "both groups must be present")
    value = table.di_s()
    if value is None:
        raise UndefinedMetric("DI_S", "no majority (S=1) row is predicted positive")
    return value


def balanced_accuracy(y_true, y_pred) -> float:
    """Mean of true-positive and true-negative rates"""
    y_true = np.asarray(y_true)
    table = _table(y_true, y_pred, np.ones(len(y_true), dtype=np.int64))
    value = table.balanced_accuracy()
    if value is None:
        raise UndefinedMetric("balanced_accuracy", "both classes must be present in y_true")
    return value


def passes_eighty_percent_rule(di: float, tau: float = EIGHTY_PERCENT_RULE) -> bool:
    return di >= tau


def report_from_predictions(y_true, y_pred, s) -> AuditReport:
    """AuditReport from label arrays; undefined metrics stay None"""
    table = _table(y_true, y_pred, s)
    return AuditReport(
        us_s=table.us_s(),
        di_s=table.di_s(),
        balanced_accuracy=table.balanced_accuracy(),
        counts=table,
        n_test=table.total,
    )


def audit(m: TrainedModel, test: Dataset) -> AuditReport:
    """Predict on a held-out test set and report US_S, DI_S, balanced accuracy"""
    if test.n == 0:
        raise ValueError("audit needs a nonempty test set")
    y_pred = m.predict_dataset(test)
    report = report_from_predictions(test.target, y_pred, test.sensitive)
    if not report.us_defined:
        logger.warning(f"US_S undefined on test set of {test.n} rows (no minority positives)")
    return report
