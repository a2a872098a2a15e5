from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
import logging
from contextlib import asynccontextmanager

from api.routes_audit import router as audit_router
from api.routes_metrics import router as metrics_router
from api.routes_repair import router as repair_router
from api.routes_synth import router as synth_router

from schemas.api_schema import HealthResponse
from schemas.learner import LearnerKind
from schemas.repair import RepairStrategy
from settings import configure_logging, get_settings

VERSION = "1.0.0"

configure_logging()
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Application lifespan management"""
    settings = get_settings()
    logger.info(f"Starting bias audit API (log level {settings.log_level}, cv folds {settings.cv_folds})")
    yield
    logger.info("Shutting down bias audit API")


app = FastAPI(
    title="Underestimation Bias Audit",
    description="Measure underestimation and disparate impact of classifiers and repair training data",
    version=VERSION,
    lifespan=lifespan,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(metrics_router)
app.include_router(synth_router)
app.include_router(audit_router)
app.include_router(repair_router)


@app.get("/health", response_model=HealthResponse)
async def health_check():
    """Liveness plus the learners and repair strategies this build serves"""
    return HealthResponse(
        status="healthy",
        version=VERSION,
        learners=[k.value for k in LearnerKind],
        strategies=[s.value for s in RepairStrategy],
    )


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "main:app",
        host="0.0.0.0",
        port=8000,
        log_level=get_settings().log_level.lower(),
    )
