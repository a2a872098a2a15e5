from fastapi import APIRouter

from schemas.api_schema import ScoreRequest, ScoreResponse
from services.metrics_service import passes_eighty_percent_rule, report_from_predictions

router = APIRouter(prefix="/metrics", tags=["Metrics"])


@router.post("/score", response_model=ScoreResponse)
def score_predictions(request: ScoreRequest):
    """US_S, DI_S and balanced accuracy of given labels; undefined metrics are null"""
    report = report_from_predictions(request.y_true, request.y_pred, request.s)
    return ScoreResponse(
        us_s=report.us_s,
        di_s=report.di_s,
        balanced_accuracy=report.balanced_accuracy,
        passes_80_rule=passes_eighty_percent_rule(report.di_s) if report.di_defined else None,
        counts=report.counts.counts,
    )
