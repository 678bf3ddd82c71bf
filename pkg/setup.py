#!/usr/bin/env python3
"""Setup script for towerctl

This script provides installation and packaging functionality for the towerctl toolkit.
"""

from setuptools import setup, find_packages
from pathlib import Path

# Read the contents of README file
this_directory = Path(__file__).parent
long_description = ""
try:
    readme_file = this_directory / "README.md"
    if readme_file.exists():
        long_description = readme_file.read_text(encoding='utf-8')
except Exception:
    long_description = "Spectral-truncation experiments for control systems with irregular inputs"

# Read requirements
requirements = []
try:
    req_file = this_directory / "requirements.txt"
    if req_file.exists():
        requirements = req_file.read_text().strip().split('\n')
        requirements = [req.split('#')[0].strip() for req in requirements
                        if req.strip() and not req.startswith('#')]
except Exception:
    # Fallback requirements
    requirements = [
        "numpy>=1.24",
        "scipy>=1.12",
    ]

setup(
    name="towerctl",
    version="1.0.0",
    description="Spectral-truncation experiments for linear control systems with irregular inputs",
    long_description=long_description,
    long_description_content_type="text/markdown",
    # src/ and utils/ install beside main.py, which puts them on sys.path
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    py_modules=["main"],
    python_requires=">=3.9",
    install_requires=requirements,
    extras_require={
        "dev": [
            "pytest>=7.0",
            "pytest-cov>=2.0",
            "black>=21.0",
            "flake8>=3.8",
            "mypy>=0.800",
        ],
    },
    entry_points={
        "console_scripts": [
            "towerctl=main:main",
        ],
    },
    include_package_data=True,
    data_files=[
        ("config", ["config/experiment_example.conf"]),
        ("config/schemas", [str(p) for p in sorted(Path("config/schemas").glob("*.json"))]),
    ],
    zip_safe=False,
    keywords="control theory spectral truncation observability duality",
)
