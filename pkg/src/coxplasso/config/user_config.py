"""
Persistent user configuration in ``~/.coxplassorc``.

The file is a YAML mapping. Sections mirror the settings dataclasses
(``solver``, ``path``, ``parallel``) and are read through dotted keys such
as ``path.nlambda``; ``output.results_dir`` names the directory where the
benchmark script writes its tables.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from coxplasso.utils.logging import get_logger

logger = get_logger(__name__)

DEFAULT_CONFIG_PATH = Path.home() / ".coxplassorc"
DEFAULT_USER_SPACE = Path.home() / ".coxplasso"
DEFAULT_RESULTS_DIR = DEFAULT_USER_SPACE / "results"

RESULTS_DIR_KEY = 'output.results_dir'


def _split(key: str) -> List[str]:
    return key.split('.')


def _read_mapping(path: Path) -> Dict[str, Any]:
    """Parse a YAML mapping; anything unreadable counts as an empty config."""
    if not path.exists():
        logger.debug(f"No user config at {path}")
        return {}

    try:
        content = yaml.safe_load(path.read_text())
    except (OSError, yaml.YAMLError) as e:
        logger.error(f"Ignoring unreadable user config {path}: {e}")
        return {}

    if content is None:
        logger.warning(f"User config {path} is empty")
        return {}
    if not isinstance(content, dict):
        logger.error(f"User config {path} must be a mapping, got {type(content).__name__}")
        return {}
    return content


class UserConfig:
    """Dotted-key view over the YAML user config file."""

    def __init__(self, config_path: Optional[Path] = None):
        self.config_path = Path(config_path) if config_path else DEFAULT_CONFIG_PATH
        self._config = _read_mapping(self.config_path)

    def get(self, key: str, default: Any = None) -> Any:
        """
        Look up a dotted key.

        Args:
            key: Dotted key, e.g. 'solver.tol_outer'
            default: Returned when any part of the key is missing

        Returns:
            Stored value or default
        """
        node: Any = self._config
        for part in _split(key):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def set(self, key: str, value: Any) -> None:
        """
        Store a value under a dotted key and write the file.

        Intermediate scalars on the key path are replaced by mappings.

        Raises:
            OSError: The file cannot be written
        """
        *parents, leaf = _split(key)
        node = self._config
        for part in parents:
            if not isinstance(node.get(part), dict):
                node[part] = {}
            node = node[part]
        node[leaf] = value

        self._write()
        logger.info(f"User config {key} = {value!r}")

    def get_all(self) -> Dict[str, Any]:
        """Shallow copy of the whole mapping."""
        return dict(self._config)

    def get_results_dir(self) -> Optional[Path]:
        """Configured results directory with ``~`` expanded, or None."""
        configured = self.get(RESULTS_DIR_KEY)
        return Path(configured).expanduser() if configured else None

    def set_results_dir(self, results_dir: Path) -> None:
        """Record the directory benchmark tables are written to."""
        self.set(RESULTS_DIR_KEY, str(results_dir))

    def _write(self) -> None:
        self.config_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.config_path, 'w') as f:
            yaml.safe_dump(self._config, f, default_flow_style=False, sort_keys=False, indent=2)
        logger.debug(f"Wrote user config {self.config_path}")


def initialize_user_space(results_dir: Optional[Path] = None) -> Path:
    """
    Create the results directory and record it in the user config.

    Args:
        results_dir: Custom directory; ``~/.coxplasso/results`` when None

    Returns:
        The results directory
    """
    target = DEFAULT_RESULTS_DIR if results_dir is None else Path(results_dir).expanduser().resolve()
    target.mkdir(parents=True, exist_ok=True)

    UserConfig().set_results_dir(target)
    logger.info(f"Benchmark results will be written to {target}")
    return target


def get_configured_results_dir() -> Path:
    """Results directory from the user config, falling back to the default."""
    return UserConfig().get_results_dir() or DEFAULT_RESULTS_DIR
