from os import path
from setuptools import find_packages, setup

pkg_name = "metric_dcov"
here = path.abspath(path.dirname(__file__))

with open(path.join(here, "README.md"), "r") as f:
    long_description = f.read()

with open(path.join(here, pkg_name, "version.py")) as f:
    exec(f.read())

setup(
    name=pkg_name.replace("_", "-"),
    python_requires=">=3.9",
    version=__version__,  # noqa F821
    description="Distance covariance and correlation in metric spaces",
    long_description=long_description,
    long_description_content_type="text/markdown",
    license="MIT",
    keywords="statistics distance-covariance independence-test metric-space",
    packages=find_packages(exclude=["contrib", "docs", "tests*"]),
    package_data={pkg_name: ["data/*.csv", "data/*.json"]},
    scripts=[],
    install_requires=[
        "numpy>=1.22",
        "scipy>=1.8",
        "pandas",
        "numba",
    ],
    extras_require={
        "tests": ["jsonschema>=4.0", "pre-commit", "pytest", "pytest-cov"],
    },
    entry_points={"console_scripts": ["mdcov = metric_dcov.cli:main"]},
)
