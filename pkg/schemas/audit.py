from typing import Dict, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


def cell_key(s: int, y: int, y_hat: int) -> str:
    return f"s{s}_y{y}_p{y_hat}"


CELL_KEYS = tuple(cell_key(s, y, p) for s in (0, 1) for y in (0, 1) for p in (0, 1))


def _binary(name: str, values) -> np.ndarray:
    raw = np.asarray(values).ravel()
    if raw.size and not np.isin(raw, (0, 1)).all():
        bad = np.unique(raw[~np.isin(raw, (0, 1))])[:5].tolist()
        raise ValueError(f"{name} must contain only 0 and 1, got {bad}")
    return raw.astype(np.int64)


class ContingencyTable(BaseModel):
    """Counts of test rows per (S, Y, Y_hat) cell"""
    model_config = ConfigDict(frozen=True)

    counts: Dict[str, int]

    @model_validator(mode="after")
    def _all_cells(self) -> "ContingencyTable":
        missing = [k for k in CELL_KEYS if k not in self.counts]
        if missing:
            raise ValueError(f"missing contingency cells: {missing}")
        if any(v < 0 for v in self.counts.values()):
            raise ValueError("contingency counts must be nonnegative")
        return self

    @classmethod
    def from_arrays(cls, y_true, y_pred, s) -> "ContingencyTable":
        y_true, y_pred, s = (_binary(name, a) for name, a in (("y_true", y_true), ("y_pred", y_pred), ("s", s)))
        if not (len(y_true) == len(y_pred) == len(s)):
            raise ValueError("y_true, y_pred and s must have equal lengths")
        binned = np.bincount(4 * s + 2 * y_true + y_pred, minlength=8)
        return cls(counts={
            cell_key(s_, y_, p_): int(binned[4 * s_ + 2 * y_ + p_])
            for s_ in (0, 1) for y_ in (0, 1) for p_ in (0, 1)
        })

    def cell(self, s: int, y: int, y_hat: int) -> int:
        return self.counts[cell_key(s, y, y_hat)]

    @property
    def total(self) -> int:
        return sum(self.counts[k] for k in CELL_KEYS)

    def group_size(self, s: int) -> int:
        return sum(self.cell(s, y, p) for y in (0, 1) for p in (0, 1))

    def predicted_positive(self, s: int) -> int:
        return self.cell(s, 0, 1) + self.cell(s, 1, 1)

    def actual_positive(self, s: int) -> int:
        return self.cell(s, 1, 0) + self.cell(s, 1, 1)

    # ---- metric recomputation; None marks an undefined value ----

    def us_s(self) -> Optional[float]:
        n0 = self.group_size(0)
        if n0 == 0 or self.actual_positive(0) == 0:
            return None
        return (self.predicted_positive(0) / n0) / (self.actual_positive(0) / n0)

    def di_s(self) -> Optional[float]:
        n0, n1 = self.group_size(0), self.group_size(1)
        if n0 == 0 or n1 == 0 or self.predicted_positive(1) == 0:
            return None
        return (self.predicted_positive(0) / n0) / (self.predicted_positive(1) / n1)

    def balanced_accuracy(self) -> Optional[float]:
        tp = self.cell(0, 1, 1) + self.cell(1, 1, 1)
        fn = self.cell(0, 1, 0) + self.cell(1, 1, 0)
        tn = self.cell(0, 0, 0) + self.cell(1, 0, 0)
        fp = self.cell(0, 0, 1) + self.cell(1, 0, 1)
        if tp + fn == 0 or tn + fp == 0:
            return None
        return (tp / (tp + fn) + tn / (tn + fp)) / 2.0


class AuditReport(BaseModel):
    """
    Fairness and accuracy of one model on one test set.

    A metric whose denominator is zero is None, never 0 or infinity.
    """
    model_config = ConfigDict(frozen=True)

    us_s: Optional[float] = Field(default=None, ge=0.0)
    di_s: Optional[float] = Field(default=None, ge=0.0)
    balanced_accuracy: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    counts: ContingencyTable
    n_test: int = Field(..., ge=0)

    @model_validator(mode="after")
    def _counts_cover_test(self) -> "AuditReport":
        if self.counts.total != self.n_test:
            raise ValueError(f"contingency cells sum to {self.counts.total}, expected {self.n_test}")
        return self

    @property
    def us_defined(self) -> bool:
        return self.us_s is not None

    @property
    def di_defined(self) -> bool:
        return self.di_s is not None
