import os
import pathlib
from typing import Dict, Any, Optional

import dotenv
import yaml

FIXTURES_DIR = pathlib.Path(__file__).resolve().parent.parent / 'fixtures'


def load_and_set_env_vars(env_file: Optional[str] = None) -> Dict[str, Any]:
    """
    Load a .env file (if given) into os.environ and return a dict of the resulting environment variables

    Parameters
    ----------
    env_file : str
        Path to a dotenv file. When None, only the already set environment is returned

    Returns
    -------
    Dictionary of set environment variables
    """
    if env_file:
        dotenv.load_dotenv(env_file)

    return dict(os.environ)


def load_config(conf_file: str) -> Dict[str, Any]:
    """
    Load a YAML pipeline config file. An empty file yields an empty dict

    Parameters
    ----------
    conf_file :  str
        Path to the YAML file

    Returns
    -------
    Dictionary of config params
    """
    pipeline_config = yaml.safe_load(pathlib.Path(conf_file).read_text())

    return pipeline_config or {}


def fixture_path(name: str) -> pathlib.Path:
    """
    Path of a file shipped in nodba/fixtures
    """
    return FIXTURES_DIR / name


def resolve_path(path: str) -> pathlib.Path:
    """
    Resolve a user supplied input path. Existing files win; otherwise a bare file name matching a bundled fixture
    (e.g. 'w1.json') resolves to the packaged copy.
    """
    candidate = pathlib.Path(path)
    if candidate.exists():
        return candidate
    bundled = fixture_path(candidate.name)
    if bundled.exists():
        return bundled

    return candidate
