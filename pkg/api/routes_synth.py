from fastapi import APIRouter, HTTPException

from schemas.api_schema import SynthSummary
from schemas.synth import SynthConfig
from services import synth_service
from services.exceptions import BiasToolkitError

router = APIRouter(prefix="/synth", tags=["Synthetic data"])


@router.post("/summary", response_model=SynthSummary)
def summarize_synthetic(cfg: SynthConfig):
    """Generate a synthetic dataset and describe its cells and group means"""
    try:
        d = synth_service.generate(cfg)
    except BiasToolkitError as e:
        raise HTTPException(status_code=e.status_code, detail=str(e))
    return SynthSummary(
        cells=synth_service.cell_counts(cfg),
        quotas=cfg.quotas(),
        summary=synth_service.describe(d),
    )
