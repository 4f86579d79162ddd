import json
import math
import pathlib

import jsonschema
import pytest

import degenlab

REPO_SCHEMA = pathlib.Path(__file__).resolve().parents[2] / "schema" / "check_report.schema.json"


@pytest.fixture(scope="module")
def validator():
    schema = degenlab.report_schema()
    jsonschema.Draft202012Validator.check_schema(schema)
    return jsonschema.Draft202012Validator(schema)


def test_packaged_schema_matches_repo():
    if REPO_SCHEMA.exists():
        assert degenlab.report_schema() == json.loads(REPO_SCHEMA.read_text())


def test_quick_battery_validates(validator):
    reports, code = degenlab.run_suite("all", quick=True)
    assert code == 0
    assert {r["params"]["suite"] for r in reports} == set(degenlab.suite_names())
    for r in reports:
        validator.validate(r)
        assert r["pass"], r["params"]["case"]


def test_deterministic_reports():
    a, _ = degenlab.run_suite("examples", quick=True, seed=4)
    b, _ = degenlab.run_suite("examples", quick=True, seed=4)
    assert json.dumps(a) == json.dumps(b)
    assert all("elapsed_ms" not in r for r in a)


def test_timed_reports_validate(validator):
    reports, _ = degenlab.run_suite("kyfan", quick=True, deterministic=False)
    for r in reports:
        validator.validate(r)
        assert r["elapsed_ms"] >= 0


def test_builtin_mode_exit_code():
    reports, code = degenlab.run_suite("movingplane", builtin="example5_sin")
    assert code == 1
    assert all(r["expected"] is None for r in reports)


def test_bad_input_raises():
    with pytest.raises(degenlab.DegenlabError):
        degenlab.run_suite("nope")
    with pytest.raises(degenlab.DegenlabError):
        degenlab.partial_sum([[1.0, 0.0], [0.0, 2.0]], 3)


def test_primitives():
    assert degenlab.eigenvalues([[2.0, 1.0], [1.0, 2.0]]) == pytest.approx([1.0, 3.0])
    assert degenlab.partial_sum([[1.0, 0.0, 0.0], [0.0, -2.0, 0.0], [0.0, 0.0, 5.0]], 2) == pytest.approx(-1.0)
    assert abs(degenlab.pucci_example_residual(3, 0.5, 0.5)) <= 1e-8
    assert degenlab.pucci_root(2, 0.25) > 1.0
    assert abs(degenlab.example1_residual([0.3, -0.2, 0.1], 2)) <= 1e-8
    assert "paraboloid" in degenlab.builtin_names()
    assert degenlab.schema_version == 1
    assert math.isfinite(degenlab.pucci_plus([[1.0, 0.0], [0.0, -1.0]], 0.5))
