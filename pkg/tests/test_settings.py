import pytest

from settings import get_settings, load_config_file


@pytest.fixture
def fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


def test_defaults(fresh_settings, monkeypatch):
    for name in ("BIAS_LOG_LEVEL", "BIAS_N_JOBS", "BIAS_REPEATS", "BIAS_CV_FOLDS", "BIAS_TUNE_FOLDS"):
        monkeypatch.delenv(name, raising=False)
    settings = get_settings()
    assert settings.repeats == 20
    assert settings.cv_folds == 10
    assert settings.tune_folds == 5
    assert settings.n_jobs == 1


def test_environment_overrides(fresh_settings, monkeypatch):
    monkeypatch.setenv("BIAS_REPEATS", "3")
    monkeypatch.setenv("BIAS_LOG_LEVEL", "debug")
    monkeypatch.setenv("BIAS_CENSUS_PATH", "/data/adult.csv")
    settings = get_settings()
    assert settings.repeats == 3
    assert settings.log_level == "DEBUG"
    assert settings.census_path == "/data/adult.csv"


def test_config_sections_normalize_dashes(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("sweep-noise:\n  seed: 7\n  out-dir: results\ngen:\n", encoding="utf-8")
    sections = load_config_file(str(path))
    assert sections == {"sweep-noise": {"seed": 7, "out_dir": "results"}}


def test_config_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config_file(str(tmp_path / "missing.yaml"))
    bad = tmp_path / "bad.yaml"
    bad.write_text("- just\n- a list\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_config_file(str(bad))
