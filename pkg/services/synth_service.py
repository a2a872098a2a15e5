import logging
from typing import Any, Dict

import numpy as np
from scipy.special import expit

from models.dataset import Dataset
from schemas.synth import NoiseSpec, SynthConfig
from services.dataset_service import partition_groups
from services.exceptions import InfeasibleQuota
from services.sampling import largest_remainder

logger = logging.getLogger(__name__)

FEATURE_NAMES = ("IQ", "SAT")
_CELL_ORDER = ("s0y1", "s1y1", "s0y0", "s1y0")


def cell_counts(cfg: SynthConfig) -> Dict[str, int]:
    """Integer quota per (S, Y) cell; raises InfeasibleQuota on a negative cell"""
    quotas = cfg.quotas()
    for cell in _CELL_ORDER:
        if quotas[cell] < -1e-9:
            raise InfeasibleQuota(cell, quotas[cell])
    counts = largest_remainder([max(quotas[c], 0.0) for c in _CELL_ORDER], cfg.n)
    return {cell: int(count) for cell, count in zip(_CELL_ORDER, counts)}


def _draw_group(
    rng: np.random.Generator, cfg: SynthConfig, s: int, n_pos: int, n_neg: int
) -> Dict[str, np.ndarray]:
    size = n_pos + n_neg
    iq = rng.integers(80, 121, size=size).astype(np.float64)
    eps = rng.normal(0.0, cfg.sat_noise_sd, size=size) if cfg.sat_noise_sd > 0 else np.zeros(size)
    sat = np.clip(np.round(1000.0 + cfg.sat_iq_weight * (iq - 100.0) + cfg.sat_group_shift * s + eps), 400, 1600)

    y = np.zeros(size, dtype=np.int8)
    if n_pos:
        propensity = expit((sat - cfg.admit_center) / cfg.admit_scale)
        admitted = rng.choice(size, size=n_pos, replace=False, p=propensity / propensity.sum())
        y[admitted] = 1
    return {"iq": iq, "sat": sat, "y": y, "s": np.full(size, s, dtype=np.int8)}


def generate(cfg: SynthConfig) -> Dataset:
    """
    Draw the synthetic admissions dataset.

    Cell counts hit the quotas exactly: within each group the required number
    of admits is drawn without replacement, weighted by a logistic propensity
    in SAT.
    """
    counts = cell_counts(cfg)
    rng = np.random.default_rng(cfg.seed)

    groups = [
        _draw_group(rng, cfg, 0, counts["s0y1"], counts["s0y0"]),
        _draw_group(rng, cfg, 1, counts["s1y1"], counts["s1y0"]),
    ]
    order = rng.permutation(cfg.n)

    features = np.column_stack([
        np.concatenate([g["iq"] for g in groups]),
        np.concatenate([g["sat"] for g in groups]),
    ])[order]
    target = np.concatenate([g["y"] for g in groups])[order]
    sensitive = np.concatenate([g["s"] for g in groups])[order]

    logger.debug(f"Generated synthetic dataset n={cfg.n} cells={counts} seed={cfg.seed}")
    return Dataset(features=features, target=target, sensitive=sensitive, feature_names=FEATURE_NAMES)


def standardize_columns(features: np.ndarray) -> np.ndarray:
    mean = features.mean(axis=0)
    std = features.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return (features - mean) / std


def inject_noise(d: Dataset, spec: NoiseSpec) -> Dataset:
    """Standardize every feature column, then add i.i.d. N(0, sigma^2) noise"""
    if d.n_features < 1:
        raise ValueError("inject_noise needs at least one feature column")
    standardized = standardize_columns(d.features)
    if spec.sigma == 0:
        return d.with_features(standardized)
    rng = np.random.default_rng(spec.seed)
    return d.with_features(standardized + rng.normal(0.0, spec.sigma, size=standardized.shape))


def describe(d: Dataset) -> Dict[str, Any]:
    """Cell sizes, rates and per-group feature means"""
    summary: Dict[str, Any] = {
        "n": d.n,
        "cells": partition_groups(d).sizes(),
        "positive_rate": d.positive_rate(),
        "minority_fraction": d.minority_share(),
    }
    positives = d.target == 1
    summary["minority_share_of_positives"] = (
        float((d.sensitive[positives] == 0).mean()) if positives.any() else None
    )
    group_means: Dict[str, Dict[str, float]] = {}
    for s in (0, 1):
        mask = d.sensitive == s
        if mask.any():
            group_means[f"S={s}"] = {
                name: float(d.features[mask, j].mean()) for j, name in enumerate(d.feature_names)
            }
    summary["group_means"] = group_means
    return summary
