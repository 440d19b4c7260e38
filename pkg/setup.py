"""Setup script for the isoflow package."""

from setuptools import find_packages, setup

setup(
    name="isoflow",
    version="0.1.0",
    description="Pullback and iso-Riemannian geometry from constant-determinant normalizing flows",
    author="isoflow developers",
    packages=find_packages(exclude=["tests*", "configs*", "docs*"]),
    python_requires=">=3.10",
    install_requires=[
        "numpy>=1.26.2",
        "pandas>=2.1.4",
        "pydantic>=2.5.0",
        "pydantic-settings>=2.1.0",
        "structlog>=24.1.0",
        "python-dotenv>=1.0.0",
        "pyyaml>=6.0.1",
        "matplotlib>=3.8.0",
    ],
    extras_require={
        "dev": [
            "pytest>=7.4.0",
            "pytest-cov>=4.1.0",
            "scipy>=1.11.0",
            "black>=23.12.0",
            "ruff>=0.1.9",
            "mypy>=1.8.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "isoflow=isoflow.cli:main",
        ],
    },
)
