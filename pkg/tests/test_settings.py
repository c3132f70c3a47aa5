# tests/test_settings.py
"""Configuration defaults, directories and key=value files"""
import pytest

from config.settings import Config


def test_only_the_log_directory_is_created(tmp_path, monkeypatch):
    logs = tmp_path / 'logs'
    monkeypatch.setattr(Config, 'LOGS_DIR', str(logs))
    monkeypatch.setattr(Config, 'LOG_TO_FILE', True)
    Config.ensure_directories()
    assert [p.name for p in tmp_path.iterdir()] == ['logs']
    assert not hasattr(Config, 'OUTPUT_DIR')


def test_no_directory_without_file_logging(tmp_path, monkeypatch):
    monkeypatch.setattr(Config, 'LOGS_DIR', str(tmp_path / 'logs'))
    monkeypatch.setattr(Config, 'LOG_TO_FILE', False)
    Config.ensure_directories()
    assert list(tmp_path.iterdir()) == []


def test_config_file_keys_are_normalised(tmp_path):
    path = tmp_path / 'tvcut.conf'
    path.write_text('Max-Iter=50\ntau=0.1\n')
    assert Config.load_config_file(str(path)) == {'max_iter': '50', 'tau': '0.1'}
    assert Config.load_config_file(None) == {}
    with pytest.raises(FileNotFoundError):
        Config.load_config_file(str(tmp_path / 'missing.conf'))
