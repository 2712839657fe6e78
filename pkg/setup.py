"""Setuptools fallback for environments with older pip tooling.

This file keeps installation straightforward on systems where editable
installation from ``pyproject.toml`` is limited.
"""

from setuptools import find_packages, setup


setup(
    name="steerable-spheres",
    version="0.1.0",
    description="Spherical neurons and rotation-steerable filter banks for 3D point-cloud classification",
    packages=find_packages(include=["steerable_spheres", "steerable_spheres.*"]),
    python_requires=">=3.10",
    install_requires=["numpy>=1.24", "scipy>=1.10", "pyyaml>=6.0"],
    extras_require={"dev": ["pytest>=7.4", "hypothesis>=6.80"]},
    entry_points={
        "console_scripts": [
            "steerable-spheres=steerable_spheres.cli:main",
        ]
    },
)
