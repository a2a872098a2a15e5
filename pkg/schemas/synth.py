from enum import Enum
from typing import Dict

from pydantic import BaseModel, ConfigDict, Field, model_validator


class IncidenceMode(str, Enum):
    """How SynthConfig.minority_share is read"""
    minority_share = "minority_share"      # P(S=0 | Y=1)
    conditional_rate = "conditional_rate"  # P(Y=1 | S=0)


class SynthConfig(BaseModel):
    """Admissions-style synthetic world: IQ, SAT, group S, admit Y"""
    model_config = ConfigDict(frozen=True)

    n: int = Field(default=5000, ge=4)
    p_minority: float = Field(default=0.5, gt=0.0, lt=1.0)
    class_rate: float = Field(default=0.3, gt=0.0, lt=1.0)
    minority_share: float = Field(default=0.3, ge=0.0, le=1.0)
    incidence_mode: IncidenceMode = IncidenceMode.minority_share
    sat_noise_sd: float = Field(default=100.0, ge=0.0)
    seed: int = Field(default=0, ge=0)

    # SAT = clamp(round(1000 + sat_iq_weight*(IQ-100) + sat_group_shift*S + eps), 400, 1600)
    sat_iq_weight: float = 15.0
    sat_group_shift: float = 80.0
    # admission propensity = logistic((SAT - admit_center) / admit_scale)
    admit_center: float = 1100.0
    admit_scale: float = Field(default=100.0, gt=0.0)

    def quotas(self) -> Dict[str, float]:
        """Real-valued target counts for the four (S, Y) cells"""
        n = float(self.n)
        if self.incidence_mode == IncidenceMode.minority_share:
            s0y1 = n * self.class_rate * self.minority_share
            s1y1 = n * self.class_rate * (1.0 - self.minority_share)
        else:
            s0y1 = n * self.p_minority * self.minority_share
            s1y1 = n * self.class_rate - s0y1
        return {
            "s0y1": s0y1,
            "s1y1": s1y1,
            "s0y0": n * self.p_minority - s0y1,
            "s1y0": n * (1.0 - self.p_minority) - s1y1,
        }


class NoiseSpec(BaseModel):
    """Additive Gaussian noise on standardized features"""
    model_config = ConfigDict(frozen=True)

    sigma: float = Field(..., ge=0.0)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _finite(self) -> "NoiseSpec":
        if self.sigma == float("inf"):
            raise ValueError("sigma must be finite")
        return self


DEFAULT_SIGMAS = (0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0)
