# app/config.py
"""
Runtime settings from the environment.

Experiment parameters live in the YAML configs; only process-level knobs are
read here. A .env file (path from ENV_FILE) is loaded first when python-dotenv
is available, without overriding variables already set in the shell.
"""
import os
from typing import Optional

try:
    from dotenv import load_dotenv  # type: ignore
    load_dotenv(dotenv_path=os.environ.get("ENV_FILE", ".env"), override=False)
except Exception:
    pass


def _getenv(name: str, default: Optional[str] = None) -> Optional[str]:
    v = os.environ.get(name)
    if v is None:
        return default
    return v


def _getint(name: str, default: int) -> int:
    try:
        return max(1, int(_getenv(name, str(default))))
    except (TypeError, ValueError):
        return default


# scipy.fft worker threads
NUM_THREADS = _getint("BSQ_THREADS", 1)

# recorded in run manifests
PACKAGE_VERSION = "0.3.0"
