"""
Setup script for coxplasso package.

This allows coxplasso to be installed as a Python package for use by other projects.
"""

from setuptools import setup, find_packages
from pathlib import Path

# Read the long description from README
this_directory = Path(__file__).parent
long_description = (this_directory / "README.md").read_text()

setup(
    name="coxplasso",
    version="0.1.0",
    description="Pliable lasso for the Cox proportional hazards model, with time-varying modifiers and a simulation benchmark",
    long_description=long_description,
    long_description_content_type="text/markdown",
    author="coxplasso Contributors",
    license="MIT",
    package_dir={"": "src"},
    packages=find_packages(where="src"),
    include_package_data=True,
    package_data={"coxplasso": ["py.typed", "simbench/definitions/*.json"]},
    install_requires=[
        "pandas>=1.5.0",
        "numpy>=1.20.0",
        "pyyaml>=6.0.0",
        "scipy>=1.9.0",
        "scikit-learn>=1.1.0",
        "joblib>=1.2.0",
    ],
    extras_require={
        "dev": [
            "pytest>=7.0.0",
            "pytest-cov>=4.0.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "coxplasso=coxplasso.cli:main",
        ],
    },
    python_requires=">=3.12",
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Topic :: Scientific/Engineering :: Medical Science Apps.",
    ],
    keywords="survival, cox, lasso, interactions, regularization, statistics",
)
