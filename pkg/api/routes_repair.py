from fastapi import APIRouter, File, Form, HTTPException, UploadFile

from api.uploads import load_upload
from schemas.api_schema import RepairResponse
from schemas.repair import RepairSpec
from services import ingest_service
from services.augment_service import parse_strategy, repair_dataset
from services.exceptions import BiasToolkitError

router = APIRouter(prefix="/repair", tags=["Repair"])


@router.post("", response_model=RepairResponse)
def repair_upload(
    file: UploadFile = File(...),
    schema: str = Form("synthetic"),
    strategy: str = Form(...),
    amount: float = Form(1.0),
    seed: int = Form(..., ge=0),
):
    """Augment an uploaded dataset and return it as CSV text"""
    d = load_upload(file, schema)
    try:
        spec = RepairSpec(strategy=parse_strategy(strategy), amount=amount, seed=seed)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    try:
        repaired = repair_dataset(d, spec)
    except BiasToolkitError as e:
        raise HTTPException(status_code=e.status_code, detail=str(e))
    return RepairResponse(
        strategy=spec.strategy.value,
        amount=spec.amount,
        rows_before=d.n,
        rows_after=repaired.n,
        csv=ingest_service.dataset_csv_text(repaired),
    )
