from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class MissingPolicy(str, Enum):
    drop_row = "drop_row"
    impute_mode = "impute_mode"


class IngestSchema(BaseModel):
    """How to read a CSV file into a Dataset"""
    model_config = ConfigDict(frozen=True)

    target_column: str
    target_positive: str
    sensitive_column: str
    # exactly one of these: the minority literal maps to S=0, the majority literal to S=1
    sensitive_minority: Optional[str] = None
    sensitive_majority: Optional[str] = None
    numeric_columns: List[str] = Field(default_factory=list)
    categorical_columns: List[str] = Field(default_factory=list)
    missing_policy: MissingPolicy = MissingPolicy.drop_row
    missing_values: List[str] = Field(default_factory=lambda: ["", "?", "NA", "NaN"])
    strip_trailing_dot: bool = False   # adult.test writes labels as ">50K."

    @model_validator(mode="after")
    def _check_columns(self) -> "IngestSchema":
        if self.target_column == self.sensitive_column:
            raise ValueError("target and sensitive columns must be distinct")
        if (self.sensitive_minority is None) == (self.sensitive_majority is None):
            raise ValueError("set exactly one of sensitive_minority or sensitive_majority")
        features = self.numeric_columns + self.categorical_columns
        if len(set(features)) != len(features):
            raise ValueError("feature columns must be unique")
        if {self.target_column, self.sensitive_column} & set(features):
            raise ValueError("target and sensitive columns cannot also be features")
        return self

    @property
    def required_columns(self) -> List[str]:
        return [*self.numeric_columns, *self.categorical_columns, self.sensitive_column, self.target_column]


class LoadReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    path: str
    rows_read: int
    rows_kept: int
    rows_dropped: int
    dropped_lines: List[int] = Field(default_factory=list)   # file line numbers, header is line 1
    imputed_cells: int = 0
    positive_share: float
    minority_share: float


# ==== PRESETS ====

CENSUS_SCHEMA = IngestSchema(
    target_column="income",
    target_positive=">50K",
    sensitive_column="sex",
    sensitive_minority="Female",
    numeric_columns=["age", "fnlwgt", "education-num", "capital-gain", "capital-loss", "hours-per-week"],
    categorical_columns=[
        "workclass", "education", "marital-status", "occupation",
        "relationship", "race", "native-country",
    ],
    missing_policy=MissingPolicy.impute_mode,
    strip_trailing_dot=True,
)

# ProPublica two-year file reduced to seven features; any race other than Caucasian is S=0.
# Y=1 is the desirable outcome: not rearrested within two years.
RECIDIVISM_SCHEMA = IngestSchema(
    target_column="two_year_recid",
    target_positive="0",
    sensitive_column="race",
    sensitive_majority="Caucasian",
    numeric_columns=["age", "juv_fel_count", "juv_misd_count", "juv_other_count", "priors_count"],
    categorical_columns=["sex", "c_charge_degree"],
    missing_policy=MissingPolicy.drop_row,
)

# Layout written by write_dataset_csv for generated data
SYNTHETIC_SCHEMA = IngestSchema(
    target_column="Y",
    target_positive="1",
    sensitive_column="S",
    sensitive_minority="0",
    numeric_columns=["IQ", "SAT"],
)

PRESETS = {
    "census": CENSUS_SCHEMA,
    "adult": CENSUS_SCHEMA,
    "recidivism": RECIDIVISM_SCHEMA,
    "compas": RECIDIVISM_SCHEMA,
    "synthetic": SYNTHETIC_SCHEMA,
}
