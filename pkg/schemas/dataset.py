from enum import Enum

from pydantic import BaseModel, ConfigDict, Field


class StratifyOn(str, Enum):
    target = "class"
    class_and_group = "class_and_group"


class SplitSpec(BaseModel):
    """Train/test split request"""
    model_config = ConfigDict(frozen=True)

    train_fraction: float = Field(default=0.7, gt=0.0, lt=1.0)
    seed: int = Field(..., ge=0, lt=2**64)
    stratify_on: StratifyOn = StratifyOn.target
