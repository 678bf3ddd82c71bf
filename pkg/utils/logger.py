"""Logging Utility

This module provides logging functionality for the toolkit.
"""

import logging
import os
from pathlib import Path
from typing import Optional

try:
    import coloredlogs
    COLOREDLOGS_AVAILABLE = True
except ImportError:
    coloredlogs = None
    COLOREDLOGS_AVAILABLE = False

CONSOLE_FORMAT = '%(levelname)s: %(message)s'
FILE_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class AppLogger:
    """Application logger with console output and an optional run log file."""

    def __init__(self, name: str = "towerctl", level: str = "INFO"):
        """Initialize application logger.

        Args:
            name: Logger name
            level: Initial log level name
        """
        self.name = name
        self.logger = logging.getLogger(name)
        self.logger.propagate = False
        self._file_handler: Optional[logging.FileHandler] = None
        self._setup_logger(level)

    def _setup_logger(self, level: str) -> None:
        """Set up logger with a console handler."""
        self.logger.handlers.clear()
        self.logger.setLevel(logging.DEBUG)

        if COLOREDLOGS_AVAILABLE:
            coloredlogs.install(
                level=level.upper(), logger=self.logger, fmt=CONSOLE_FORMAT, isatty=None
            )
        else:
            console_handler = logging.StreamHandler()
            console_handler.setLevel(level.upper())
            console_handler.setFormatter(logging.Formatter(CONSOLE_FORMAT))
            self.logger.addHandler(console_handler)

    def set_level(self, level: str) -> None:
        """Change the console log level.

        Args:
            level: Log level name
        """
        for handler in self.logger.handlers:
            if handler is not self._file_handler:
                handler.setLevel(level.upper())

    def attach_file_handler(self, directory: Path, filename: Optional[str] = None) -> str:
        """Write log records of the current run into a file.

        Args:
            directory: Directory receiving the log file
            filename: Log file name, defaults to the logger name

        Returns:
            Path to the log file
        """
        self.detach_file_handler()
        os.makedirs(directory, exist_ok=True)
        log_file = os.path.join(str(directory), filename or f"{self.name.lower()}.log")
        file_handler = logging.FileHandler(log_file, mode='w', encoding='utf-8')
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(FILE_FORMAT, datefmt='%Y-%m-%d %H:%M:%S'))
        self.logger.addHandler(file_handler)
        self._file_handler = file_handler
        return log_file

    def detach_file_handler(self) -> None:
        """Close the run log file if one is attached."""
        if self._file_handler is not None:
            self.logger.removeHandler(self._file_handler)
            self._file_handler.close()
            self._file_handler = None

    def debug(self, message: str) -> None:
        """Log debug message."""
        self.logger.debug(message)

    def info(self, message: str) -> None:
        """Log info message."""
        self.logger.info(message)

    def warning(self, message: str) -> None:
        """Log warning message."""
        self.logger.warning(message)

    def error(self, message: str, exc_info: bool = False) -> None:
        """Log error message.

        Args:
            message: Error message
            exc_info: Include exception info
        """
        self.logger.error(message, exc_info=exc_info)

    def _log_by_status(self, message: str, status: str) -> None:
        if status.lower() == 'error':
            self.error(message)
        elif status.lower() == 'warning':
            self.warning(message)
        else:
            self.info(message)

    def log_experiment_action(self, command: str, action: str, status: str,
                              details: Optional[str] = None) -> None:
        """Log experiment-related actions.

        Args:
            command: Experiment subcommand name
            action: Action performed (validate, run, write, etc.)
            status: Status of the action (success, error, warning)
            details: Additional details
        """
        message = f"Experiment '{command}' - {action.upper()}: {status.upper()}"
        if details:
            message += f" - {details}"
        self._log_by_status(message, status)

    def log_config_action(self, config_type: str, action: str, status: str,
                          details: Optional[str] = None) -> None:
        """Log configuration-related actions.

        Args:
            config_type: Type of configuration (experiment, system, input)
            action: Action performed (load, save, validate)
            status: Status of the action (success, error, warning)
            details: Additional details
        """
        message = f"Config '{config_type}' - {action.upper()}: {status.upper()}"
        if details:
            message += f" - {details}"
        self._log_by_status(message, status)

    def log_numerics_event(self, component: str, event: str,
                           details: Optional[str] = None) -> None:
        """Log a numerical event that deserves the user's attention.

        Args:
            component: Component reporting the event
            event: Event description
            details: Additional details
        """
        message = f"[{component}] {event}"
        if details:
            message += f" - {details}"
        self.warning(message)


# Global logger instance
app_logger = AppLogger()
