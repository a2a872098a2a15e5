import itertools
import xml.etree.ElementTree as ET
from datetime import datetime, timezone

import numpy as np
import pandas as pd
import pytest

from schemas.learner import LearnerKind, LearnerSpec
from schemas.repair import AmountScore
from schemas.sweep import CellMedians, RepeatRecord, SweepCell, SweepFamily, SweepMetadata, SweepResult
from schemas.synth import SynthConfig
from services import report_service
from services.exceptions import NotTwoDimensional
from services.experiment_service import aggregate, sweep_imbalance
from services.metrics_service import report_from_predictions

SVG = "{http://www.w3.org/2000/svg}"
NOW = datetime(2024, 1, 1, tzinfo=timezone.utc)


def _grid_result(axes, value_of, repeats=1, family=SweepFamily.imbalance) -> SweepResult:
    """Result whose cell medians are set directly from value_of(index)"""
    cells = []
    for index in itertools.product(*[range(len(v)) for v in axes.values()]):
        coords = {name: axes[name][i] for name, i in zip(axes, index)}
        records = [RepeatRecord(repeat=r, seed=r, error="constructed") for r in range(repeats)]
        cells.append(SweepCell(index=index, coords=coords, records=records, medians=CellMedians(us_s=value_of(index))))
    metadata = SweepMetadata(family=family, master_seed=0, learner="logreg", repeats=repeats, started_at=NOW, finished_at=NOW)
    return SweepResult(axes=axes, cells=cells, metadata=metadata)


def _cell_fills(path):
    root = ET.parse(path).getroot()
    return [rect.get("fill") for rect in root.iter(f"{SVG}rect") if rect.get("class") == "cell"]


def _luminance(fill: str) -> float:
    r, g, b = (int(fill[i:i + 2], 16) for i in (1, 3, 5))
    return 0.2126 * r + 0.7152 * g + 0.0722 * b


@pytest.fixture(scope="module")
def small_sweep():
    return sweep_imbalance(
        LearnerSpec.default(LearnerKind.gaussian_nb),
        class_rates=(0.2, 0.3), minority_shares=(0.3, 0.5), repeats=3, seed=5, base=SynthConfig(n=400),
    )


# ==== sweep CSV ====

def test_sweep_csv_has_one_row_per_cell_and_repeat(tmp_path, small_sweep):
    path = tmp_path / "imbalance.csv"
    companion = report_service.write_sweep_csv(small_sweep, path)
    assert companion == tmp_path / "imbalance_medians.csv"
    lines = path.read_bytes().split(b"\r\n")
    assert lines[0] == b"class_rate,minority_share,repeat,us_s,di_s,balanced_accuracy,defined,seed"
    assert len([line for line in lines[1:] if line]) == 12


def test_medians_recomputed_from_csv_match(tmp_path, small_sweep):
    path = tmp_path / "imbalance.csv"
    report_service.write_sweep_csv(small_sweep, path)
    frame = pd.read_csv(path, float_precision="round_trip")
    for (class_rate, share), rows in frame.groupby(["class_rate", "minority_share"]):
        cell = small_sweep.cell_for(class_rate=class_rate, minority_share=share)
        defined = rows["us_s"].dropna()
        assert float(np.median(defined)) == pytest.approx(cell.medians.us_s, abs=1e-12)
        assert rows["balanced_accuracy"].median() == pytest.approx(cell.medians.balanced_accuracy, abs=1e-12)


def test_sweep_csv_is_byte_stable(tmp_path, small_sweep):
    report_service.write_sweep_csv(small_sweep, tmp_path / "a.csv")
    report_service.write_sweep_csv(small_sweep, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a_medians.csv").read_bytes() == (tmp_path / "b_medians.csv").read_bytes()


def test_undefined_us_is_an_empty_field(tmp_path):
    undefined = report_from_predictions([0, 0, 1, 1], [1, 0, 1, 0], [0, 0, 1, 1])
    records = [RepeatRecord(repeat=0, seed=1, report=undefined)]
    cell = SweepCell(index=(0,), coords={"sigma": 0.5}, records=records, medians=aggregate(records))
    metadata = SweepMetadata(family=SweepFamily.noise, master_seed=0, learner="nb", repeats=1, started_at=NOW, finished_at=NOW)
    result = SweepResult(axes={"sigma": [0.5]}, cells=[cell], metadata=metadata)
    path = tmp_path / "noise.csv"
    report_service.write_sweep_csv(result, path)
    text = path.read_text(encoding="utf-8")
    assert "NaN" not in text and "nan" not in text
    assert text.splitlines()[1] == "0.5,0,,1.0,0.5,false,1"
    medians = (tmp_path / "noise_medians.csv").read_text(encoding="utf-8").splitlines()
    assert medians[1] == "0.5,,1.0,0.5,0,1"


def test_audit_csv_row(tmp_path):
    report = report_from_predictions([1, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 1])
    path = tmp_path / "audit.csv"
    report_service.write_audit_csv(report, path)
    frame = pd.read_csv(path, keep_default_na=False)
    assert frame.loc[0, "us_s"] == 0.5
    assert frame.loc[0, "n_test"] == 4
    assert frame.loc[0, "passes_80_rule"] == ""
    assert frame.loc[0, "s0_y1_p1"] == 1


def test_amount_scores_csv(tmp_path):
    scores = [AmountScore(amount=0.5, median_us_s=0.9, median_balanced_accuracy=0.7, objective=0.1, defined_folds=5, folds=5)]
    path = tmp_path / "scores.csv"
    report_service.write_amount_scores_csv(scores, path)
    assert path.read_text(encoding="utf-8").splitlines()[1] == "0.5,0.9,0.7,0.1,5,5"


# ==== SVG ====

def test_heatmap_is_well_formed_with_one_rect_per_cell(tmp_path, small_sweep):
    path = tmp_path / "heat.svg"
    report_service.render_heatmap(small_sweep, "us_s", path)
    root = ET.parse(path).getroot()
    assert root.tag == f"{SVG}svg"
    assert len(_cell_fills(path)) == 4
    texts = [t.text for t in root.iter(f"{SVG}text")]
    assert "class_rate" in texts and "minority_share" in texts


def test_heatmap_darkens_with_lower_values(tmp_path):
    result = _grid_result({"class_rate": [0.1, 0.2, 0.3], "minority_share": [0.1, 0.5]}, lambda idx: float(idx[0]))
    path = tmp_path / "rows.svg"
    report_service.render_heatmap(result, "us_s", path)
    fills = _cell_fills(path)
    rows = [_luminance(fills[2 * i]) for i in range(3)]
    assert rows[0] < rows[1] < rows[2]


def test_single_cell_heatmap(tmp_path):
    result = _grid_result({"class_rate": [0.3], "minority_share": [0.5]}, lambda idx: 0.875)
    path = tmp_path / "one.svg"
    report_service.render_heatmap(result, "us_s", path)
    assert len(_cell_fills(path)) == 1
    texts = [t.text for t in ET.parse(path).getroot().iter(f"{SVG}text")]
    assert texts.count("0.875") >= 2              # cell caption and legend


def test_undefined_cell_is_gray(tmp_path):
    result = _grid_result({"a": [1.0, 2.0], "b": [1.0]}, lambda idx: None if idx[0] == 0 else 0.5)
    path = tmp_path / "gray.svg"
    report_service.render_heatmap(result, "us_s", path)
    assert _cell_fills(path)[0] == report_service.UNDEFINED_FILL


def test_heatmap_needs_two_axes(tmp_path):
    result = _grid_result({"sigma": [0.0, 1.0]}, lambda idx: 1.0, family=SweepFamily.noise)
    with pytest.raises(NotTwoDimensional):
        report_service.render_heatmap(result, "us_s", tmp_path / "x.svg")


def test_curve_for_one_axis(tmp_path):
    result = _grid_result({"l2_lambda": [1e-3, 1.0, 1e3]}, lambda idx: 1.0 - 0.2 * idx[0], family=SweepFamily.regularization)
    path = tmp_path / "curve.svg"
    report_service.render_curve(result, "us_s", path)
    root = ET.parse(path).getroot()
    assert len(list(root.iter(f"{SVG}circle"))) == 3
    assert len(list(root.iter(f"{SVG}polyline"))) == 1
    assert "log10 l2_lambda" in [t.text for t in root.iter(f"{SVG}text")]
    with pytest.raises(ValueError):
        report_service.render_curve(_grid_result({"a": [1.0], "b": [1.0]}, lambda idx: 1.0), "us_s", path)


def test_ramp_runs_dark_to_light():
    assert report_service.ramp_color(0.0) == "#081d58"
    assert report_service.ramp_color(1.0) == "#ffffd9"
    assert _luminance(report_service.ramp_color(0.3)) < _luminance(report_service.ramp_color(0.7))
