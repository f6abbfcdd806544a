"""Tests for the config module."""

import pytest

from src.config import Config, ConfigManager, get_config, init_config, resolve_workers
from src.errors import ConfigError


@pytest.fixture(autouse=True)
def isolated_home(tmp_path, monkeypatch):
    monkeypatch.setenv("HOME", str(tmp_path))
    monkeypatch.setenv("XDG_CONFIG_HOME", str(tmp_path / "xdg"))
    monkeypatch.delenv("TFM_WORKERS", raising=False)


def test_defaults():
    config = Config()
    assert config.workers == 0
    assert config.max_fakes == 2
    assert config.max_contracts == 0
    assert config.report_dir == "reports"
    assert not config.timings


def test_missing_default_file_gives_defaults():
    assert get_config() == Config()


def test_explicit_missing_file_is_an_error(tmp_path):
    with pytest.raises(ConfigError):
        get_config(tmp_path / "absent.toml")


def test_init_then_load(tmp_path):
    path = init_config()
    assert path == tmp_path / "xdg" / "tfm" / "config.toml"
    assert path.exists()
    assert get_config() == Config()


def test_values_are_read_from_file(tmp_path):
    path = tmp_path / "tfm.toml"
    path.write_text('max_fakes = 1\nreport_dir = "out"\ntimings = true\n')
    config = get_config(path)
    assert config.max_fakes == 1
    assert config.report_dir == "out"
    assert config.timings


@pytest.mark.parametrize(
    "text",
    [
        "unknown_key = 1\n",
        'max_fakes = "two"\n',
        "max_fakes = -1\n",
        "debug = 1\n",
        "max_fakes = true\n",
        "max_fakes = = 1\n",
    ],
)
def test_bad_files_are_rejected(tmp_path, text):
    path = tmp_path / "tfm.toml"
    path.write_text(text)
    with pytest.raises(ConfigError):
        get_config(path)


def test_manager_set_validates(tmp_path):
    manager = ConfigManager()
    manager.set("seed", 7)
    assert manager.get("seed") == 7
    with pytest.raises(ConfigError):
        manager.set("seed", "seven")
    saved = manager.save(tmp_path / "saved.toml")
    assert get_config(saved).seed == 7


def test_worker_flag_wins(monkeypatch):
    monkeypatch.setenv("TFM_WORKERS", "3")
    assert resolve_workers(5, Config(workers=2)) == 5


def test_worker_env_beats_config(monkeypatch):
    monkeypatch.setenv("TFM_WORKERS", "3")
    assert resolve_workers(None, Config(workers=2)) == 3


def test_worker_config_beats_cpu_count():
    assert resolve_workers(None, Config(workers=2)) == 2
    assert resolve_workers(None, Config()) >= 1


@pytest.mark.parametrize("env", ["zero", "0", "-2"])
def test_bad_worker_env_is_rejected(monkeypatch, env):
    monkeypatch.setenv("TFM_WORKERS", env)
    with pytest.raises(ConfigError):
        resolve_workers(None, Config())


def test_bad_worker_flag_is_rejected():
    with pytest.raises(ConfigError):
        resolve_workers(0, Config())
