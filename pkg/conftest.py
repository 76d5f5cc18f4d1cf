"""
Shared test setup
"""

import sys
import os

import pytest

# Add src directory to path
src_dir = os.path.join(os.path.dirname(__file__), 'src')
sys.path.insert(0, src_dir)


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False, help='Run long acceptance checks')


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: long-running acceptance check (needs --runslow)')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    """Point output and cache directories at a temporary location"""
    from utils.settings import settings

    monkeypatch.setenv('INTERSDN_OUTPUT_DIR', str(tmp_path / 'results'))
    monkeypatch.setenv('INTERSDN_CACHE_DIR', str(tmp_path / 'cache'))
    settings.reload()
    yield settings
    monkeypatch.undo()
    settings.reload()
