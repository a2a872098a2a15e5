import os
import logging
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

# Load environment variables from .env
load_dotenv()

logger = logging.getLogger(__name__)


class Settings(BaseModel):
    """Process-wide defaults, read from the environment"""
    model_config = ConfigDict(frozen=True)

    log_level: str = "INFO"
    n_jobs: int = Field(default=1, ge=1)
    repeats: int = Field(default=20, ge=1)
    cv_folds: int = Field(default=10, ge=2)
    tune_folds: int = Field(default=5, ge=2)
    census_path: Optional[str] = None
    recidivism_path: Optional[str] = None


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Build settings from BIAS_* environment variables"""
    return Settings(
        log_level=os.getenv("BIAS_LOG_LEVEL", "INFO").upper(),
        n_jobs=int(os.getenv("BIAS_N_JOBS", "1")),
        repeats=int(os.getenv("BIAS_REPEATS", "20")),
        cv_folds=int(os.getenv("BIAS_CV_FOLDS", "10")),
        tune_folds=int(os.getenv("BIAS_TUNE_FOLDS", "5")),
        census_path=os.getenv("BIAS_CENSUS_PATH") or None,
        recidivism_path=os.getenv("BIAS_RECIDIVISM_PATH") or None,
    )


def configure_logging(level: Optional[str] = None) -> None:
    """Configure root logging once for an entry point"""
    logging.basicConfig(
        level=(level or get_settings().log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def load_config_file(path: str) -> Dict[str, Dict[str, Any]]:
    """
    Load a nested YAML config document.

    Top-level keys are sub-command names; each maps flag names
    (dashes or underscores) to values.
    """
    config_path = Path(path)
    if not config_path.is_file():
        raise FileNotFoundError(f"Config file not found: {path}")

    data = yaml.safe_load(config_path.read_text(encoding="utf-8")) or {}
    if not isinstance(data, dict):
        raise ValueError(f"Config file {path} must contain a mapping at top level")

    sections: Dict[str, Dict[str, Any]] = {}
    for command, values in data.items():
        if values is None:
            continue
        if not isinstance(values, dict):
            raise ValueError(f"Config section '{command}' must be a mapping")
        sections[str(command)] = {str(k).replace("-", "_"): v for k, v in values.items()}

    logger.info(f"Loaded config file {path} with sections: {sorted(sections)}")
    return sections
