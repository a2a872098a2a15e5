from enum import Enum
from typing import Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field


class RepairStrategy(str, Enum):
    smote_f = "smote_f"
    counterfactual_f = "cf_f"   # flip the sensitive Feature of S1Y1 rows to S=0
    counterfactual_l = "cf_l"   # flip the Label of S0Y0 rows to Y=1
    no_repair = "no_repair"


STRATEGY_ALIASES: Dict[str, RepairStrategy] = {
    "smote_f": RepairStrategy.smote_f,
    "smote": RepairStrategy.smote_f,
    "cf_f": RepairStrategy.counterfactual_f,
    "counterfactual_f": RepairStrategy.counterfactual_f,
    "cf_l": RepairStrategy.counterfactual_l,
    "counterfactual_l": RepairStrategy.counterfactual_l,
    "no_repair": RepairStrategy.no_repair,
    "none": RepairStrategy.no_repair,
}

# Candidate amounts searched by the tuner: 5%, 10%, ..., 100%
AMOUNT_GRID: Tuple[float, ...] = tuple(round(0.05 * i, 2) for i in range(1, 21))


class RepairSpec(BaseModel):
    """Repair strategy and the fraction of its source pool to add"""
    model_config = ConfigDict(frozen=True)

    strategy: RepairStrategy
    amount: float = Field(default=1.0, gt=0.0, le=1.0)
    seed: int = Field(default=0, ge=0)


class AmountScore(BaseModel):
    """Cross-validated outcome of one candidate amount"""
    model_config = ConfigDict(frozen=True)

    amount: float
    median_us_s: Optional[float] = None
    median_balanced_accuracy: Optional[float] = None
    objective: Optional[float] = None   # |median US_S - 1|
    defined_folds: int = 0
    folds: int = 0
