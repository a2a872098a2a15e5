import io

from fastapi import HTTPException, UploadFile

from models.dataset import Dataset
from services import ingest_service
from services.exceptions import BiasToolkitError


def load_upload(file: UploadFile, schema_name: str) -> Dataset:
    """Parse an uploaded CSV with a preset schema"""
    try:
        text = file.file.read().decode("utf-8")
    except UnicodeDecodeError:
        raise HTTPException(status_code=422, detail="Uploaded file must be UTF-8 CSV")
    try:
        schema = ingest_service.resolve_schema(schema_name)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    try:
        return ingest_service.load_csv(io.StringIO(text), schema)
    except BiasToolkitError as e:
        raise HTTPException(status_code=e.status_code, detail=str(e))
