# Dataset and synthetic-data schemas
from .dataset import SplitSpec, StratifyOn
from .synth import DEFAULT_SIGMAS, IncidenceMode, NoiseSpec, SynthConfig

# Learners
from .learner import DEFAULT_REG, REG_SEMANTICS, LearnerKind, LearnerSpec, RegKnob

# Metrics and audit reports
from .audit import CELL_KEYS, AuditReport, ContingencyTable, cell_key

# Repair and tuning
from .repair import AMOUNT_GRID, AmountScore, RepairSpec, RepairStrategy

# Sweeps
from .sweep import CellMedians, RepeatRecord, SweepCell, SweepFamily, SweepMetadata, SweepResult

# Ingestion
from .ingest import PRESETS, IngestSchema, LoadReport, MissingPolicy

# HTTP payloads
from .api_schema import HealthResponse, RepairResponse, ScoreRequest, ScoreResponse, SynthSummary


__all__ = [
    # Dataset schemas
    "SplitSpec", "StratifyOn",
    "DEFAULT_SIGMAS", "IncidenceMode", "NoiseSpec", "SynthConfig",

    # Learner schemas
    "DEFAULT_REG", "REG_SEMANTICS", "LearnerKind", "LearnerSpec", "RegKnob",

    # Audit schemas
    "CELL_KEYS", "AuditReport", "ContingencyTable", "cell_key",

    # Repair schemas
    "AMOUNT_GRID", "AmountScore", "RepairSpec", "RepairStrategy",

    # Sweep schemas
    "CellMedians", "RepeatRecord", "SweepCell", "SweepFamily", "SweepMetadata", "SweepResult",

    # Ingestion schemas
    "PRESETS", "IngestSchema", "LoadReport", "MissingPolicy",

    # HTTP schemas
    "HealthResponse", "RepairResponse", "ScoreRequest", "ScoreResponse", "SynthSummary",
]
