"""File System Utilities

This module provides file helpers for experiment artifacts: JSON documents, CSV tables
with a fixed float format, and run manifests.
"""

import csv
import json
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

PathLike = Union[str, Path]


class FileUtils:
    """File system utility functions."""

    @staticmethod
    def ensure_directory(path: PathLike) -> bool:
        """Ensure directory exists, create if it doesn't.

        Args:
            path: Directory path

        Returns:
            True if directory exists or was created successfully
        """
        try:
            if str(path):
                os.makedirs(path, exist_ok=True)
            return True
        except OSError:
            return False

    @staticmethod
    def safe_read_json(file_path: PathLike,
                       default: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        """Safely read JSON file with fallback to default.

        Args:
            file_path: Path to JSON file
            default: Default value if file doesn't exist or is invalid

        Returns:
            JSON data or default value
        """
        if default is None:
            default = {}
        try:
            if os.path.exists(file_path):
                with open(file_path, 'r', encoding='utf-8') as f:
                    data = json.load(f)
                    if isinstance(data, dict):
                        return data
        except (json.JSONDecodeError, OSError):
            pass
        return default

    @staticmethod
    def safe_write_json(file_path: PathLike, data: Dict[str, Any]) -> bool:
        """Write a JSON document with sorted keys so repeated runs are byte-identical.

        Args:
            file_path: Path to JSON file
            data: Data to write

        Returns:
            True if write was successful
        """
        try:
            FileUtils.ensure_directory(os.path.dirname(str(file_path)))
            with open(file_path, 'w', encoding='utf-8') as f:
                json.dump(data, f, indent=2, sort_keys=True, ensure_ascii=False)
                f.write('\n')
            return True
        except (OSError, TypeError, ValueError):
            return False

    @staticmethod
    def format_value(value: Any) -> str:
        """Format a table cell; floats use the shortest round-trip representation."""
        if isinstance(value, bool):
            return 'true' if value else 'false'
        if isinstance(value, float):
            return repr(value)
        if hasattr(value, 'item'):
            return FileUtils.format_value(value.item())
        return str(value)

    @staticmethod
    def write_csv(file_path: PathLike, header: Sequence[str],
                  rows: Iterable[Sequence[Any]]) -> bool:
        """Write a CSV table.

        Args:
            file_path: Destination path
            header: Column names
            rows: Table rows

        Returns:
            True if write was successful
        """
        try:
            FileUtils.ensure_directory(os.path.dirname(str(file_path)))
            with open(file_path, 'w', encoding='utf-8', newline='') as f:
                writer = csv.writer(f, lineterminator='\n')
                writer.writerow(list(header))
                for row in rows:
                    writer.writerow([FileUtils.format_value(cell) for cell in row])
            return True
        except OSError:
            return False

    @staticmethod
    def read_csv(file_path: PathLike) -> List[Dict[str, str]]:
        """Read a CSV table into a list of row dictionaries."""
        with open(file_path, 'r', encoding='utf-8', newline='') as f:
            return list(csv.DictReader(f))

    @staticmethod
    def write_manifest(artifact_path: PathLike, config: Dict[str, Any],
                       versions: Dict[str, str]) -> Path:
        """Write the run manifest beside an artifact.

        Args:
            artifact_path: Path of the artifact the manifest describes
            config: Echo of the effective configuration
            versions: Package versions used for the run

        Returns:
            Path to the manifest file
        """
        artifact = Path(artifact_path)
        manifest_path = artifact.with_name(f"{artifact.stem}.manifest.json")
        FileUtils.safe_write_json(manifest_path, {
            'artifact': artifact.name,
            'config': config,
            'versions': versions,
        })
        return manifest_path
