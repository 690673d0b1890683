"""
Setup script for cnoma-solver.
"""

from setuptools import setup, find_packages
import re
from pathlib import Path


# Read the version from the package's __init__.py
init_path = Path("cnoma_solver") / "__init__.py"
with open(init_path, "r") as f:
    init_content = f.read()
    version_match = re.search(r'__version__\s*=\s*["\']([^"\']+)["\']', init_content)
    if version_match:
        version = version_match.group(1)
    else:
        raise RuntimeError("Unable to find version in cnoma_solver/__init__.py")


with open("README.md", "r") as f:
    long_description = f.read()


setup(
    name="cnoma-solver",
    version=version,
    description="Joint user pairing and power control for cooperative NOMA cells",
    long_description=long_description,
    long_description_content_type="text/markdown",
    author="HappyPathway",
    author_email="info@happypathway.com",
    packages=find_packages(exclude=["tests", "tests.*"]),
    python_requires=">=3.10",
    install_requires=[
        "typer>=0.9.0",
        "pydantic>=2.5.2",
        "rich>=13.6.0",
        "numpy>=1.26.0",
        "scipy>=1.11.0",
        "pandas>=2.1.0",
    ],
    entry_points={
        "console_scripts": [
            "cnoma-solver=cnoma_solver.cli:app",
        ],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering",
    ],
)
