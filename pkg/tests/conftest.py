import pytest

from config import Config, TestingConfig


@pytest.fixture(autouse=True)
def quiet_logging(monkeypatch):
    """Keep test runs off the console and out of the shared log file."""
    monkeypatch.setattr(Config, 'LOG_FILE', TestingConfig.LOG_FILE)
    monkeypatch.setattr(Config, 'LOG_TO_STDOUT', TestingConfig.LOG_TO_STDOUT)
