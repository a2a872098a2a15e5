from typing import Dict, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class Dataset(BaseModel):
    """
    Feature matrix plus binary target Y and binary sensitive attribute S.

    S = 0 marks the minority (discriminated) group, Y = 1 the desirable outcome.
    Arrays are copied on construction and made read-only.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    features: np.ndarray
    target: np.ndarray
    sensitive: np.ndarray
    feature_names: Tuple[str, ...]

    @field_validator("features", mode="before")
    @classmethod
    def _coerce_features(cls, value):
        array = np.array(value, dtype=np.float64, copy=True)
        if array.ndim == 1:
            array = array.reshape(-1, 1)
        if array.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if not np.all(np.isfinite(array)):
            raise ValueError("features contain non-finite values")
        return _frozen(array)

    @field_validator("target", "sensitive", mode="before")
    @classmethod
    def _coerce_binary(cls, value, info):
        raw = np.asarray(value)
        array = raw.astype(np.int8, copy=True).reshape(-1)
        if raw.size and not np.array_equal(raw.reshape(-1), array):
            raise ValueError(f"{info.field_name} must hold integer 0/1 values")
        if np.any((array != 0) & (array != 1)):
            raise ValueError(f"{info.field_name} values must be exactly 0 or 1")
        return _frozen(array)

    @field_validator("feature_names", mode="before")
    @classmethod
    def _coerce_names(cls, value):
        return tuple(str(name) for name in value)

    @model_validator(mode="after")
    def _check_shapes(self) -> "Dataset":
        n = self.features.shape[0]
        if len(self.target) != n or len(self.sensitive) != n:
            raise ValueError(
                f"row count mismatch: features={n}, target={len(self.target)}, "
                f"sensitive={len(self.sensitive)}"
            )
        if len(self.feature_names) != self.features.shape[1]:
            raise ValueError("feature_names length must match feature column count")
        return self

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.features.shape[1])

    def subset(self, indices: Sequence[int]) -> "Dataset":
        """Rows at the given indices, in the given order"""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            features=self.features[idx],
            target=self.target[idx],
            sensitive=self.sensitive[idx],
            feature_names=self.feature_names,
        )

    def concat(self, other: "Dataset") -> "Dataset":
        """This dataset followed by the rows of other"""
        if other.feature_names != self.feature_names:
            raise ValueError("cannot concatenate datasets with different feature columns")
        return Dataset(
            features=np.vstack([self.features, other.features]),
            target=np.concatenate([self.target, other.target]),
            sensitive=np.concatenate([self.sensitive, other.sensitive]),
            feature_names=self.feature_names,
        )

    def with_features(self, features: np.ndarray) -> "Dataset":
        return Dataset(
            features=features,
            target=self.target,
            sensitive=self.sensitive,
            feature_names=self.feature_names,
        )

    def design_matrix(self, include_sensitive: bool = True) -> np.ndarray:
        """Model input: features, plus S as the last column when included"""
        if not include_sensitive:
            return self.features
        return np.column_stack([self.features, self.sensitive.astype(np.float64)])

    def positive_rate(self) -> float:
        return float(self.target.mean()) if self.n else 0.0

    def minority_share(self) -> float:
        return float((self.sensitive == 0).mean()) if self.n else 0.0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.feature_names == other.feature_names
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.target, other.target)
            and np.array_equal(self.sensitive, other.sensitive)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"<Dataset(n={self.n}, features={list(self.feature_names)})>"


class GroupPartition(BaseModel):
    """Index sets of the four (S, Y) cells"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    s0y1: np.ndarray
    s0y0: np.ndarray
    s1y1: np.ndarray
    s1y0: np.ndarray

    @field_validator("s0y1", "s0y0", "s1y1", "s1y0", mode="before")
    @classmethod
    def _coerce_indices(cls, value):
        return _frozen(np.array(value, dtype=np.int64, copy=True).reshape(-1))

    def cell(self, s: int, y: int) -> np.ndarray:
        return getattr(self, f"s{s}y{y}")

    def sizes(self) -> Dict[str, int]:
        return {
            "s0y1": len(self.s0y1),
            "s0y0": len(self.s0y0),
            "s1y1": len(self.s1y1),
            "s1y0": len(self.s1y0),
        }

    @property
    def total(self) -> int:
        return sum(self.sizes().values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroupPartition):
            return NotImplemented
        return all(
            np.array_equal(self.cell(s, y), other.cell(s, y)) for s in (0, 1) for y in (0, 1)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"<GroupPartition({self.sizes()})>"
