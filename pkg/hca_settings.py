"""
Settings for the HCA-DBSCAN toolkit.

Values come from an env file loaded with python-dotenv, falling back to
built-in defaults. Variables already set in the process environment win over
the env file, and command line flags override everything.

Environment variables:
- HCA_ENV_PATH: env file to load (default: ./input_folder/hca_dbscan.env)
- OUTPUT_DIR: directory for labels and reports (default: ./output_folder)
- HCA_POLICY: merge policy, representative or exact (default: representative)
- HCA_COMPARATOR: distance comparator for the classic DBSCAN reference, le or lt (default: le)
- HCA_MINPTS: MINPTS for the classic DBSCAN reference (default: 1)
- HCA_BENCH_REPEAT: timed runs per size in bench (default: 5)
- HCA_ORACLE_MAX_N: largest n the naive oracles are benchmarked on (default: 25000)
- HCA_OFFSET_LIMIT: largest raw offset block enumerated before falling back to a cell scan (default: 200000)
- HCA_EAGER_MAX_DIM: largest d allowed for eager representatives (default: 10)
- HCA_CSV_DELIMITER: CSV delimiter (default: ,)
- HCA_CSV_HAS_HEADER: whether input CSVs carry a header row, true, false or auto (default: auto,
  row 1 is a header when any of its fields is not a number)
- HCA_LOG_LEVEL: logging level (default: INFO)
"""

import logging
import os
from dataclasses import dataclass
from typing import Optional

from dotenv import load_dotenv

from hca_errors import SettingsError

log = logging.getLogger(__name__)

DEFAULT_ENV_PATH = "./input_folder/hca_dbscan.env"

POLICIES = ("representative", "exact")
COMPARATORS = ("le", "lt")


@dataclass(frozen=True)
class Settings:
    output_dir: str = "./output_folder"
    policy: str = "representative"
    comparator: str = "le"
    minpts: int = 1
    bench_repeat: int = 5
    oracle_max_n: int = 25000
    offset_limit: int = 200000
    eager_max_dim: int = 10
    csv_delimiter: str = ","
    csv_has_header: Optional[bool] = None
    log_level: str = "INFO"


def _env_int(key, default, minimum=1):
    val = os.getenv(key)
    if val is None or val.strip() == "":
        return default
    try:
        parsed = int(val)
    except ValueError:
        raise SettingsError(f"{key} must be an integer (got {val!r})")
    if parsed < minimum:
        raise SettingsError(f"{key} must be >= {minimum} (got {parsed})")
    return parsed


def _env_bool(key, default, allow_auto=False):
    """Treats true/1/yes as True and false/0/no as False (case-insensitive); auto gives None when allowed."""
    val = os.getenv(key)
    if val is None or val.strip() == "":
        return default
    lowered = val.strip().lower()
    if allow_auto and lowered == "auto":
        return None
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise SettingsError(f"{key} must be a boolean (got {val!r})")


def _env_choice(key, default, choices):
    val = os.getenv(key)
    if val is None or val.strip() == "":
        return default
    val = val.strip().lower()
    if val not in choices:
        raise SettingsError(f"{key} must be one of {', '.join(choices)} (got {val!r})")
    return val


def load_settings(env_path=None):
    """
    Load settings from an env file and the environment.

    Args:
        env_path (str, optional): Path to the env file. If None, HCA_ENV_PATH or
            the default ./input_folder/hca_dbscan.env is used.

    Returns:
        Settings: the resolved settings
    """
    env_path = env_path or os.environ.get("HCA_ENV_PATH", DEFAULT_ENV_PATH)
    if os.path.exists(env_path):
        log.debug("Loading environment from: %s", env_path)
        load_dotenv(env_path)
    else:
        log.debug("Environment file %s not found, using default environment", env_path)
        load_dotenv()

    delimiter = os.getenv("HCA_CSV_DELIMITER", ",")
    if len(delimiter) != 1:
        raise SettingsError(f"HCA_CSV_DELIMITER must be a single character (got {delimiter!r})")

    log_level = os.getenv("HCA_LOG_LEVEL", "INFO").strip().upper()
    if log_level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        raise SettingsError(f"HCA_LOG_LEVEL is not a logging level (got {log_level!r})")

    return Settings(
        output_dir=os.getenv("OUTPUT_DIR", "./output_folder"),
        policy=_env_choice("HCA_POLICY", "representative", POLICIES),
        comparator=_env_choice("HCA_COMPARATOR", "le", COMPARATORS),
        minpts=_env_int("HCA_MINPTS", 1),
        bench_repeat=_env_int("HCA_BENCH_REPEAT", 5),
        oracle_max_n=_env_int("HCA_ORACLE_MAX_N", 25000, minimum=0),
        offset_limit=_env_int("HCA_OFFSET_LIMIT", 200000),
        eager_max_dim=_env_int("HCA_EAGER_MAX_DIM", 10),
        csv_delimiter=delimiter,
        csv_has_header=_env_bool("HCA_CSV_HAS_HEADER", None, allow_auto=True),
        log_level=log_level,
    )
