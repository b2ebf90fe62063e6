import json

import pytest

from src.errors import PoleError
from src.identities import check, get_identity
from src.report import Report, SampleRecord, format_params
from src.utils.metrics import pass_rate, verification_summary


def _report() -> Report:
    identity = get_identity("ramanujan_1psi1")
    params = {"a": 0.4, "c": 0.02, "z": 0.3, "q": 0.2}
    records = [
        SampleRecord.from_check(0, check(identity, params)),
        SampleRecord.from_error(1, {"a": 0.4, "c": 0.2, "z": 0.3, "q": 0.2}, PoleError("vanishing factor")),
    ]
    return Report(identity="ramanujan_1psi1", seed=42, tol=1e-8, samples=records)


def test_report_key_order():
    data = _report().to_dict()
    assert list(data) == ["schema_version", "identity", "seed", "tol", "samples", "summary"]
    assert list(data["samples"][0]) == [
        "index",
        "params",
        "lhs",
        "rhs",
        "rel_err",
        "effective_tol",
        "cancellation_digits",
        "pass",
    ]
    assert data["samples"][1]["error"].startswith("PoleError")
    assert data["samples"][1]["pass"] is False


def test_report_round_trip(tmp_path):
    report = _report()
    path = tmp_path / "reports" / "ramanujan.json"
    report.write(path)
    loaded = Report.read(path)
    assert loaded.summary() == report.summary()
    assert loaded.to_json() == report.to_json()
    assert path.read_text() == report.to_json()


def test_summary_counts_failed_evaluations():
    summary = _report().summary()
    assert summary["count"] == 2
    assert summary["passed"] == 1
    assert summary["max_rel_err"] == summary["mean_rel_err"]
    assert pass_rate(summary) == 0.5
    assert not _report().passed


def test_empty_report_does_not_pass():
    report = Report(identity="q_binomial", seed=1, tol=1e-8)
    assert not report.passed
    assert report.summary() == {"count": 0, "passed": 0, "max_rel_err": None, "mean_rel_err": None}
    assert pass_rate(report.summary()) == 0.0


def test_report_rejects_other_schema_versions():
    data = _report().to_dict()
    data["schema_version"] = "2"
    with pytest.raises(ValueError):
        Report.from_dict(data)


def test_scalars_are_written_as_strings():
    data = json.loads(_report().to_json())
    assert data["samples"][0]["params"] == {"a": "0.40000000000000002", "c": "0.02", "z": "0.29999999999999999", "q": "0.20000000000000001"}
    assert isinstance(data["samples"][0]["lhs"], str)
    assert format_params({"a": 0.5 - 0.25j, "m": 3}) == {"a": "0.5-0.25i", "m": "3"}


def test_verification_summary():
    samples = [
        {"rel_err": 1e-12, "pass": True},
        {"rel_err": 3e-12, "pass": True},
        {"rel_err": None, "pass": False},
    ]
    summary = verification_summary(samples)
    assert summary["count"] == 3
    assert summary["passed"] == 2
    assert summary["max_rel_err"] == pytest.approx(3e-12)
    assert summary["mean_rel_err"] == pytest.approx(2e-12)
