import logging
from typing import Optional

from fastapi import APIRouter, File, Form, HTTPException, UploadFile

from api.uploads import load_upload
from schemas.audit import AuditReport
from schemas.dataset import SplitSpec, StratifyOn
from schemas.learner import LearnerSpec
from services import learner_service
from services.dataset_service import split
from services.exceptions import BiasToolkitError
from services.metrics_service import audit
from services.sampling import child_seed
from settings import get_settings

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/audit", tags=["Audit"])


@router.post("", response_model=AuditReport)
def audit_upload(
    file: UploadFile = File(...),
    schema: str = Form("synthetic"),
    learner: str = Form("logreg"),
    seed: int = Form(..., ge=0),
    reg: Optional[float] = Form(None),
    train_fraction: float = Form(0.7),
):
    """Split an uploaded dataset, fit a learner on the training part and audit the test part"""
    d = load_upload(file, schema)
    try:
        spec = LearnerSpec.default(learner_service.parse_kind(learner), reg)
        split_spec = SplitSpec(train_fraction=train_fraction, seed=child_seed(seed, 0),
                               stratify_on=StratifyOn.class_and_group)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))

    try:
        train, test = split(d, split_spec)
        if reg is None:
            spec = learner_service.tune_balanced_accuracy(
                learner_service.default_cv_grid(spec), train, get_settings().cv_folds, child_seed(seed, 1),
            )
        model = learner_service.fit(spec, train, seed=child_seed(seed, 2))
        report = audit(model, test)
    except BiasToolkitError as e:
        raise HTTPException(status_code=e.status_code, detail=str(e))

    logger.info(f"Audited {spec.label()} on {test.n} test rows: US_S={report.us_s}")
    return report
