import pytest
import os
from app import create_app

@pytest.fixture(autouse=True)
def setup_test_output(tmp_path):
    import storage
    original_prefix = storage.OUTPUT_PREFIX
    test_prefix = os.path.join(str(tmp_path), "results") + os.sep
    storage.OUTPUT_PREFIX = test_prefix
    yield test_prefix
    storage.OUTPUT_PREFIX = original_prefix

@pytest.fixture
def app(setup_test_output):
    return create_app({"OUTPUT_PREFIX": setup_test_output, "LOG_LEVEL": "WARNING"})

@pytest.fixture
def runner(app):
    return app.test_cli_runner()
