"""Configuration management module."""

import json
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, Optional

from .errors import ConfigError
from .workers import available_workers

WORKERS_ENV = "TFM_WORKERS"


@dataclass
class Config:
    """Configuration for tfm runs."""

    # Parallelism (0 = available parallelism)
    workers: int = 0

    # Search limits; 0 means unbounded for omissions and contracts
    max_fakes: int = 2
    max_omissions: int = 0
    max_contracts: int = 0

    # Reduction and checks
    bisect_max_iters: int = 64
    anonymity_sample_cap: int = 10000
    seed: int = 0
    debug: bool = False

    # Reports
    report_dir: str = "reports"
    timings: bool = False

    @classmethod
    def load(cls, config_path: Optional[Path] = None) -> "Config":
        """
        Load configuration from file.

        Args:
            config_path: Path to config file. If None, uses default locations.

        Returns:
            Config object with loaded settings.

        Raises:
            ConfigError: The file cannot be parsed or holds unknown keys.
        """
        if config_path is None:
            config_path = cls._find_config_file()
        elif not Path(config_path).exists():
            raise ConfigError(f"config file {config_path} does not exist")

        if config_path and Path(config_path).exists():
            return cls._parse_file(Path(config_path))
        return cls()

    @staticmethod
    def _find_config_file() -> Optional[Path]:
        """Find config file in standard locations."""
        # Priority: XDG_CONFIG_HOME > ~/.config > ~/.tfm
        xdg_config = os.environ.get("XDG_CONFIG_HOME")

        locations = [
            Path(xdg_config) / "tfm" / "config.toml" if xdg_config else None,
            Path.home() / ".config" / "tfm" / "config.toml",
            Path.home() / ".tfm" / "config.toml",
        ]

        for loc in locations:
            if loc and loc.exists():
                return loc

        return None

    @classmethod
    def _parse_file(cls, config_path: Path) -> "Config":
        """Parse config file and update settings."""
        try:
            import toml

            try:
                data = toml.load(config_path)
            except toml.TomlDecodeError as e:
                raise ConfigError(f"{config_path}: {e}")
        except ImportError:
            # Fallback to json if toml not available
            try:
                with open(config_path) as f:
                    data = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f"{config_path}: {e}")

        return cls._apply_dict(cls(), data, source=str(config_path))

    @classmethod
    def _apply_dict(cls, config: "Config", data: Dict[str, Any], source: str = "") -> "Config":
        """Apply dictionary values to config, checking names and types."""
        types = {f.name: f.type for f in fields(cls)}
        for key, value in data.items():
            if key not in types:
                raise ConfigError(f"{source or 'config'}: unknown key {key!r}")
            expected = bool if types[key] in (bool, "bool") else (
                int if types[key] in (int, "int") else str
            )
            if expected is int and (isinstance(value, bool) or not isinstance(value, int)):
                raise ConfigError(f"{source or 'config'}: {key} must be an integer")
            if expected is bool and not isinstance(value, bool):
                raise ConfigError(f"{source or 'config'}: {key} must be true or false")
            if expected is str and not isinstance(value, str):
                raise ConfigError(f"{source or 'config'}: {key} must be a string")
            if expected is int and value < 0:
                raise ConfigError(f"{source or 'config'}: {key} must not be negative")
            setattr(config, key, value)
        return config

    def save(self, config_path: Optional[Path] = None) -> Path:
        """
        Save configuration to file.

        Args:
            config_path: Path to save config. If None, uses default location.

        Returns:
            Path to saved config file.
        """
        if config_path is None:
            config_path = self._get_default_config_path()
        config_path = Path(config_path)
        config_path.parent.mkdir(parents=True, exist_ok=True)

        try:
            import toml

            with open(config_path, "w") as f:
                toml.dump(self._to_dict(), f)
        except ImportError:
            # Fallback to json
            with open(config_path, "w") as f:
                json.dump(self._to_dict(), f, indent=2)

        return config_path

    def _to_dict(self) -> Dict[str, Any]:
        """Convert config to dictionary."""
        return asdict(self)

    @staticmethod
    def _get_default_config_path() -> Path:
        """Get default config path."""
        xdg_config = os.environ.get("XDG_CONFIG_HOME")
        if xdg_config:
            return Path(xdg_config) / "tfm" / "config.toml"
        return Path.home() / ".config" / "tfm" / "config.toml"

    @classmethod
    def init(cls, config_path: Optional[Path] = None) -> Path:
        """Write a default config file and return its path."""
        return cls().save(config_path)


def resolve_workers(flag: Optional[int], config: Config) -> int:
    """
    Worker count: ``--workers`` flag, then ``TFM_WORKERS``, then the config
    file, then the machine's CPU count.

    Raises:
        ConfigError: A flag or environment value is not a positive integer.
    """
    if flag is not None:
        if flag < 1:
            raise ConfigError(f"--workers must be positive, got {flag}")
        return flag
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            workers = int(env)
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}")
        if workers < 1:
            raise ConfigError(f"{WORKERS_ENV} must be positive, got {workers}")
        return workers
    if config.workers:
        return config.workers
    return available_workers()


class ConfigManager:
    """Manager for configuration files."""

    def __init__(self, config_path: Optional[Path] = None):
        self.config_path = config_path
        self.config = Config.load(config_path)

    def get(self, key: str, default: Any = None) -> Any:
        """Get a config value."""
        return getattr(self.config, key, default)

    def set(self, key: str, value: Any):
        """Set a config value, with the same checks as the config file."""
        Config._apply_dict(self.config, {key: value})

    def reload(self):
        """Reload configuration from file."""
        self.config = Config.load(self.config_path)

    def save(self, config_path: Optional[Path] = None) -> Path:
        """Save current configuration."""
        return self.config.save(config_path or self.config_path)


def get_config(config_path: Optional[Path] = None) -> Config:
    """Get the current configuration."""
    return Config.load(config_path)


def init_config(config_path: Optional[Path] = None) -> Path:
    """
    Initialize a new config file.

    Args:
        config_path: Optional path to config file.

    Returns:
        Path to created config file.
    """
    return Config.init(config_path)
