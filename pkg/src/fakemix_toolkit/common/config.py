"""
Environment driven configuration.

Every variable carries the FAKEMIX_ prefix. Values read here sit between a
--config file and explicit command line flags in precedence.
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Optional

from fakemix_toolkit.common.error_handling import BadInputError, NotFoundError

LOGGER = logging.getLogger(__name__)

ENV_PREFIX = "FAKEMIX_"

LOG_LEVEL = os.getenv(f"{ENV_PREFIX}LOG_LEVEL", "INFO")
PRODUCTION = os.getenv(f"{ENV_PREFIX}PRODUCTION", "false").lower() == "true"

# environment variable suffix -> RunConfig field
ENV_FIELDS = {
    "SEED": "seed",
    "WORKERS": "workers",
    "METHOD": "method",
    "LAMBDA": "translate_ratio",
    "PROB": "keep_prob",
    "REPS": "repetitions",
    "CONTENT": "content_mode",
    "THICKNESS": "thickness",
}


def env_overrides(environ: Optional[dict[str, str]] = None) -> dict[str, str]:
    """
    Collect the FAKEMIX_* variables that map onto run configuration fields.

    Values are returned as strings; the pydantic model does the coercion.
    """
    environ = os.environ if environ is None else environ
    overrides = {}
    for suffix, field in ENV_FIELDS.items():
        value = environ.get(f"{ENV_PREFIX}{suffix}")
        if value is not None and value != "":
            overrides[field] = value
    if overrides:
        LOGGER.debug("Environment overrides: %s", overrides)
    return overrides


def load_config_file(path: Optional[Path]) -> dict[str, Any]:
    """
    Load a flat JSON config file whose keys mirror the command line flags.

    Flag spellings (lambda, prob, reps, content) are translated to field names.
    """
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as config_file:
            raw = json.load(config_file)
    except FileNotFoundError as err:
        raise NotFoundError(detail=f"Config file {path} does not exist") from err
    except UnicodeDecodeError as err:
        raise BadInputError(
            detail=f"Config file {path} is not UTF-8 text: {err}"
        ) from err
    except json.JSONDecodeError as err:
        raise BadInputError(detail=f"Config file {path} is not valid JSON: {err}")

    if not isinstance(raw, dict):
        raise BadInputError(detail=f"Config file {path} must hold a flat JSON object")

    flag_names = {key.lower(): field for key, field in ENV_FIELDS.items()}
    return {
        flag_names.get(key, key).replace("-", "_"): value for key, value in raw.items()
    }
