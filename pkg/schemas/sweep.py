from datetime import datetime
from enum import Enum
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from schemas.audit import AuditReport

AxisValue = Union[float, str]

METRICS = ("us_s", "di_s", "balanced_accuracy")


class SweepFamily(str, Enum):
    noise = "noise"
    regularization = "regularization"
    imbalance = "imbalance"
    remediation = "remediation"
    doubling = "doubling"


class RepeatRecord(BaseModel):
    """One repeat of one cell: an AuditReport or the reason it failed"""
    model_config = ConfigDict(frozen=True)

    repeat: int = Field(..., ge=0)
    seed: int = Field(..., ge=0)
    report: Optional[AuditReport] = None
    error: Optional[str] = None

    @model_validator(mode="after")
    def _report_or_error(self) -> "RepeatRecord":
        if (self.report is None) == (self.error is None):
            raise ValueError("a repeat record holds exactly one of report or error")
        return self

    @property
    def failed(self) -> bool:
        return self.error is not None

    @property
    def defined(self) -> bool:
        return self.report is not None and self.report.us_defined

    def metric(self, name: str) -> Optional[float]:
        if self.report is None:
            return None
        return getattr(self.report, name)


class CellMedians(BaseModel):
    model_config = ConfigDict(frozen=True)

    us_s: Optional[float] = None
    di_s: Optional[float] = None
    balanced_accuracy: Optional[float] = None
    n_defined: int = 0   # repeats with a defined US_S
    n_skipped: int = 0   # repeats left out of the US_S median
    n_failed: int = 0

    def metric(self, name: str) -> Optional[float]:
        return getattr(self, name)


class SweepCell(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: Tuple[int, ...]
    coords: Dict[str, AxisValue]
    records: List[RepeatRecord]
    medians: CellMedians
    infeasible: Optional[str] = None


class SweepMetadata(BaseModel):
    model_config = ConfigDict(frozen=True)

    family: SweepFamily
    master_seed: int
    learner: str
    repeats: int = Field(..., ge=1)
    started_at: datetime
    finished_at: datetime


class SweepResult(BaseModel):
    """
    Repeated audits over a parameter grid.

    Cells are stored in row-major order of the axes, so cells[i].index is the
    i-th element of itertools.product over the axis positions.
    """
    model_config = ConfigDict(frozen=True)

    axes: Dict[str, List[AxisValue]]
    cells: List[SweepCell]
    metadata: SweepMetadata

    @model_validator(mode="after")
    def _complete(self) -> "SweepResult":
        expected = int(np.prod([len(v) for v in self.axes.values()]))
        if len(self.cells) != expected:
            raise ValueError(f"expected {expected} cells, got {len(self.cells)}")
        for cell in self.cells:
            if len(cell.records) != self.metadata.repeats:
                raise ValueError(f"cell {cell.index} has {len(cell.records)} records, expected {self.metadata.repeats}")
        return self

    @property
    def axis_names(self) -> List[str]:
        return list(self.axes)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(len(v) for v in self.axes.values())

    def cell_at(self, *index: int) -> SweepCell:
        position = int(np.ravel_multi_index(index, self.shape))
        return self.cells[position]

    def cell_for(self, **coords: AxisValue) -> SweepCell:
        index = tuple(self.axes[name].index(coords[name]) for name in self.axes)
        return self.cell_at(*index)

    def median_grid(self, metric: str) -> np.ndarray:
        """Per-cell medians shaped like the grid; NaN where undefined"""
        if metric not in METRICS:
            raise ValueError(f"Unknown metric '{metric}'; choose from {METRICS}")
        values = [c.medians.metric(metric) for c in self.cells]
        return np.array([np.nan if v is None else v for v in values], dtype=np.float64).reshape(self.shape)
