"""
This conftest.py contains handy components shared by the unit tests: a local MLflow instance and an environment
without nodba variables leaking in from the developer's shell.
"""
import logging
import shutil
import tempfile
from pathlib import Path

import mlflow
import pytest

NODBA_ENV_VARS = ('NODBA_DB_URL', 'NODBA_EXPERIMENT_PATH', 'NODBA_EXPERIMENT_ID')


@pytest.fixture(scope="session", autouse=True)
def mlflow_local():
    """
    This fixture provides local instance of mlflow with support for tracking.
    After the test session:
    * temporary storage for tracking is deleted.
    * Active run will be automatically stopped to avoid verbose errors.
    :return: None
    """
    logging.info("Configuring local MLflow instance")
    tracking_dir = tempfile.mkdtemp()

    mlflow.set_tracking_uri(Path(tracking_dir).as_uri())
    logging.info("MLflow instance configured")
    yield None

    mlflow.end_run()

    if Path(tracking_dir).exists():
        shutil.rmtree(tracking_dir)
    logging.info("Test session finished, unrolling the MLflow instance")


@pytest.fixture(autouse=True)
def clean_nodba_env(monkeypatch):
    """
    Unit tests never talk to a live database or a configured experiment
    """
    for name in NODBA_ENV_VARS:
        monkeypatch.delenv(name, raising=False)
    yield
