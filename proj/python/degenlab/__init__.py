"""Numerical checks for degenerate elliptic operators."""

import json
from importlib import resources

from ._core import (
    DegenlabError,
    builtin_names,
    eigenvalues,
    example1_residual,
    partial_sum,
    pucci_example_residual,
    pucci_plus,
    pucci_root,
    schema_version,
    suite_names,
)

__all__ = [
    "DegenlabError",
    "builtin_names",
    "eigenvalues",
    "example1_residual",
    "partial_sum",
    "pucci_example_residual",
    "pucci_plus",
    "pucci_root",
    "report_schema",
    "run_suite",
    "schema_version",
    "suite_names",
]


def run_suite(name, *, grid_h=0.0, seed=1, tol_scale=1.0, quick=False, n=0, alpha=-1.0,
              builtin="", deterministic=True):
    """Run a suite; returns (reports as dicts, exit code)."""
    from ._core import run_suite_json

    lines, code = run_suite_json(name, grid_h, seed, tol_scale, quick, n, alpha, builtin, deterministic)
    return [json.loads(s) for s in lines], code


def report_schema():
    """The JSON schema every report validates against."""
    return json.loads(resources.files(__package__).joinpath("check_report.schema.json").read_text())
