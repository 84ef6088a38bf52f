import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from .config import CONFIG_ROOT, TEMPLATE_CONFIG, deep_merge


class SystemConfig:
    """Singleton for solver and runtime configuration."""

    _instance = None
    _config: Dict[str, Any] = {}

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._load_config()
        return cls._instance

    def _load_config(self, user_path: Optional[Path] = None):
        """Defaults, then the bundled template, then the user's config.yaml."""
        merged = self._get_defaults()
        for path in (TEMPLATE_CONFIG, user_path or CONFIG_ROOT / "config.yaml"):
            if not path.exists():
                continue
            try:
                with open(path, "r", encoding="utf-8") as f:
                    loaded = yaml.safe_load(f) or {}
                merged = deep_merge(merged, loaded)
            except (OSError, yaml.YAMLError):
                # A broken user file must not prevent the library from working
                continue
        self._config = self._apply_env(merged)

    def _get_defaults(self) -> Dict[str, Any]:
        """Default configuration."""
        return {
            "goursat": {"tol": 1e-12, "max_iter": 60, "m_ratio": 1},
            "potential": {"vanishing_threshold": 1e-8, "residual_tol": 5e-4},
            "spps": {"relative_cutoff": 1e-15},
            "export": {"significant_digits": 17},
            "runtime": {"threads": 1},
            "logging": {
                "level": "INFO",
                "file": True,
                "max_log_size": 10485760,
                "backup_count": 5,
            },
        }

    def _apply_env(self, cfg: Dict[str, Any]) -> Dict[str, Any]:
        threads = os.getenv("TRANSMUTANT_THREADS")
        if threads:
            try:
                cfg = deep_merge(cfg, {"runtime": {"threads": max(1, int(threads))}})
            except ValueError:
                pass
        level = os.getenv("TRANSMUTANT_LOG_LEVEL")
        if level:
            cfg = deep_merge(cfg, {"logging": {"level": level.upper()}})
        return cfg

    def reload(self, user_path: Optional[Path] = None):
        """Re-read configuration (CLI --settings and tests)."""
        self._load_config(user_path)

    def get(self, key_path: str, default: Any = None) -> Any:
        keys = key_path.split(".")
        value = self._config
        for key in keys:
            if isinstance(value, dict) and key in value:
                value = value[key]
            else:
                return default
        return value

    def get_solver_config(self) -> Dict[str, Any]:
        """Returns the Goursat solver section."""
        return self.get("goursat", {})

    def get_logging_config(self) -> Dict[str, Any]:
        """Returns logging configuration."""
        return self.get("logging", {})

    @property
    def threads(self) -> int:
        return int(self.get("runtime.threads", 1))

    @property
    def all(self) -> Dict[str, Any]:
        return self._config


config = SystemConfig()
