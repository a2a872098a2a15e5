import numpy as np
import pytest
from pydantic import ValidationError

from schemas.synth import IncidenceMode, NoiseSpec, SynthConfig
from services.dataset_service import partition_groups
from services.exceptions import InfeasibleQuota
from services.synth_service import FEATURE_NAMES, cell_counts, describe, generate, inject_noise, standardize_columns


def test_generate_hits_quotas_exactly():
    d = generate(SynthConfig(n=5000, class_rate=0.30, minority_share=0.50, seed=0))
    assert partition_groups(d).sizes() == {"s0y1": 750, "s0y0": 1750, "s1y1": 750, "s1y0": 1750}


def test_extreme_corner_has_fifty_minority_positives():
    assert cell_counts(SynthConfig(n=5000, class_rate=0.10, minority_share=0.10))["s0y1"] == 50


def test_generate_features_and_ranges():
    d = generate(SynthConfig(n=2000, seed=4))
    assert d.feature_names == FEATURE_NAMES
    iq, sat = d.features[:, 0], d.features[:, 1]
    assert iq.min() >= 80 and iq.max() <= 120
    assert np.all(iq == np.round(iq))
    assert sat.min() >= 400 and sat.max() <= 1600


def test_favored_group_has_higher_sat():
    d = generate(SynthConfig(n=5000, seed=5))
    sat = d.features[:, 1]
    assert sat[d.sensitive == 1].mean() > sat[d.sensitive == 0].mean()


def test_class_rate_and_minority_share_within_one_row():
    cfg = SynthConfig(n=3001, class_rate=0.23, minority_share=0.37, seed=8)
    d = generate(cfg)
    assert abs(d.positive_rate() - cfg.class_rate) <= 1.0 / cfg.n
    positives = d.target == 1
    share = (d.sensitive[positives] == 0).mean()
    assert abs(share - cfg.minority_share) <= 1.0 / (cfg.n * cfg.class_rate)


def test_generate_is_deterministic():
    cfg = SynthConfig(n=800, seed=99)
    assert generate(cfg) == generate(cfg)
    assert generate(cfg) != generate(cfg.model_copy(update={"seed": 100}))


def test_admission_rate_rises_with_sat_within_each_group():
    d = generate(SynthConfig(n=20000, seed=6))
    for s in (0, 1):
        mask = d.sensitive == s
        sat, y = d.features[mask, 1], d.target[mask]
        edges = np.quantile(sat, [0.25, 0.5, 0.75])
        bins = np.digitize(sat, edges)
        rates = [y[bins == b].mean() for b in range(4)]
        assert all(later >= earlier - 0.01 for earlier, later in zip(rates, rates[1:]))
        assert rates[-1] > rates[0]


def test_infeasible_quota_names_the_cell():
    cfg = SynthConfig(n=1000, class_rate=0.9, minority_share=0.9, p_minority=0.5)
    with pytest.raises(InfeasibleQuota) as excinfo:
        cell_counts(cfg)
    assert "s0y0" in str(excinfo.value)


def test_conditional_rate_mode():
    cfg = SynthConfig(n=5000, class_rate=0.3, minority_share=0.2, incidence_mode=IncidenceMode.conditional_rate)
    counts = cell_counts(cfg)
    assert counts["s0y1"] == 500          # 5000 * 0.5 * 0.2
    assert counts["s1y1"] == 1000         # 1500 - 500
    infeasible = SynthConfig(n=5000, class_rate=0.1, minority_share=0.5, incidence_mode=IncidenceMode.conditional_rate)
    with pytest.raises(InfeasibleQuota):
        cell_counts(infeasible)


def test_config_bounds():
    with pytest.raises(ValidationError):
        SynthConfig(class_rate=0.0)
    with pytest.raises(ValidationError):
        SynthConfig(minority_share=1.5)


# ==== inject_noise ====

def test_zero_noise_returns_standardized_input(small_synthetic):
    out = inject_noise(small_synthetic, NoiseSpec(sigma=0.0, seed=1))
    assert np.array_equal(out.features, standardize_columns(small_synthetic.features))


def test_unit_noise_variance():
    d = generate(SynthConfig(n=5000, seed=12))
    out = inject_noise(d, NoiseSpec(sigma=1.0, seed=3))
    diff = out.features - standardize_columns(d.features)
    for j in range(diff.shape[1]):
        assert 0.92 <= diff[:, j].var(ddof=1) <= 1.08


def test_noise_leaves_labels_and_groups_alone(small_synthetic):
    out = inject_noise(small_synthetic, NoiseSpec(sigma=2.0, seed=5))
    assert np.array_equal(out.target, small_synthetic.target)
    assert np.array_equal(out.sensitive, small_synthetic.sensitive)


def test_noise_spec_rejects_negative_and_infinite_sigma():
    with pytest.raises(ValidationError):
        NoiseSpec(sigma=-0.1)
    with pytest.raises(ValidationError):
        NoiseSpec(sigma=float("inf"))


def test_describe_reports_cells_and_group_means(small_synthetic):
    summary = describe(small_synthetic)
    assert summary["n"] == 600
    assert sum(summary["cells"].values()) == 600
    assert set(summary["group_means"]) == {"S=0", "S=1"}
