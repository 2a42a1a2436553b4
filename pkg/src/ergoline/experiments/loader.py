"""Loading, overriding and hashing experiment configs."""

import hashlib
import json
import logging
from pathlib import Path
from typing import Optional

from pydantic import ValidationError

from ..errors import ConfigError, ErgolineError, ExprSyntaxError
from ..models.experiment import ExperimentConfig

logger = logging.getLogger(__name__)

# Fields that change where or how fast a run happens, never what it computes
HASH_EXCLUDE = {"output_dir"}


def _first_error(e: ValidationError) -> str:
    errors = e.errors()
    if not errors:
        return str(e)
    first = errors[0]
    where = ".".join(str(part) for part in first.get("loc", ())) or "config"
    extra = f" (+{len(errors) - 1} more)" if len(errors) > 1 else ""
    return f"{where}: {first.get('msg', 'invalid')}{extra}"


def parse_config(data: dict) -> ExperimentConfig:
    """Validate a decoded config.

    Raises:
        ConfigError: For schema violations; expression syntax errors keep
            their byte offset
    """
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(_first_error(e)) from e
    except ExprSyntaxError as e:
        raise ConfigError(e.message, offset=e.offset) from e
    except ErgolineError as e:
        raise ConfigError(str(e)) from e


def load_config(
    path: Path,
    seed: Optional[int] = None,
    out_dir: Optional[Path] = None,
) -> ExperimentConfig:
    """Read a UTF-8 JSON config and apply CLI overrides.

    Args:
        path: Config file
        seed: Replaces sim.master_seed when given
        out_dir: Replaces output_dir when given

    Raises:
        ConfigError: Missing file, invalid JSON or invalid config
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON: {e.msg}", offset=e.pos) from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")

    if seed is not None:
        if not isinstance(data.get("sim"), dict):
            raise ConfigError("--seed needs a 'sim' section in the config")
        data["sim"] = {**data["sim"], "master_seed": seed}
    if out_dir is not None:
        data["output_dir"] = str(out_dir)

    cfg = parse_config(data)
    logger.debug(f"Loaded {path} as experiment '{cfg.name}'")
    return cfg


def config_hash(cfg: ExperimentConfig) -> str:
    """sha256 of the canonical JSON of the validated config, without output_dir."""
    payload = cfg.model_dump(mode="json", exclude=HASH_EXCLUDE)
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
