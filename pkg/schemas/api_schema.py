from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, model_validator


class ScoreRequest(BaseModel):
    """Label arrays to score: truth, prediction and group per test row"""
    y_true: List[int] = Field(..., min_length=1)
    y_pred: List[int]
    s: List[int]

    @model_validator(mode="after")
    def _aligned(self) -> "ScoreRequest":
        if not (len(self.y_true) == len(self.y_pred) == len(self.s)):
            raise ValueError("y_true, y_pred and s must have equal lengths")
        for name in ("y_true", "y_pred", "s"):
            if any(v not in (0, 1) for v in getattr(self, name)):
                raise ValueError(f"{name} must contain only 0 and 1")
        return self


class ScoreResponse(BaseModel):
    us_s: Optional[float] = None
    di_s: Optional[float] = None
    balanced_accuracy: Optional[float] = None
    passes_80_rule: Optional[bool] = None
    counts: Dict[str, int]


class SynthSummary(BaseModel):
    cells: Dict[str, int]
    quotas: Dict[str, float]
    summary: Dict[str, Any]


class RepairResponse(BaseModel):
    strategy: str
    amount: float
    rows_before: int
    rows_after: int
    csv: str


class HealthResponse(BaseModel):
    status: str
    version: str
    learners: List[str]
    strategies: List[str]
