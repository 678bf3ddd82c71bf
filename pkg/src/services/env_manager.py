"""Environment Variables Management Service

This module loads the optional .env file with python-dotenv. The only environment-driven
setting of the toolkit is the default output directory; every numerical parameter comes
from configuration files or command-line flags.
"""

import os
from pathlib import Path
from typing import Any, Optional

from dotenv import load_dotenv

OUTPUT_DIR_KEY = "TOWERCTL_OUTPUT_DIR"


class EnvManager:
    """Service class for reading the output-directory environment setting."""

    def __init__(self, env_file: str = ".env"):
        """Initialize environment manager.

        Args:
            env_file: Path to the .env file
        """
        self.env_file = env_file
        self.env_path = Path(env_file)
        self._loaded = False

    def load_env(self) -> bool:
        """Load environment variables from the .env file if it exists.

        Returns:
            True if a file was found and loaded, False otherwise
        """
        self._loaded = True
        if not self.env_path.exists():
            return False
        return bool(load_dotenv(self.env_path, override=False))

    def get(self, key: str, default: Any = None) -> Any:
        """Get environment variable value.

        Args:
            key: Environment variable key
            default: Default value if key not found

        Returns:
            Environment variable value or default
        """
        if not self._loaded:
            self.load_env()
        return os.getenv(key, default)

    def get_output_dir(self, fallback: Optional[str] = None) -> Path:
        """Resolve the default output directory.

        Args:
            fallback: Directory used when the variable is unset

        Returns:
            Output directory path
        """
        value = self.get(OUTPUT_DIR_KEY) or fallback or "results"
        return Path(value)


# Global environment manager instance
env_manager = EnvManager()
