import pytest

import verification
from config import VerifySuite
from verification import SuiteReport, run_suite


@pytest.mark.parametrize("suite", [VerifySuite.IDENTITIES, VerifySuite.UNIFORMITY, VerifySuite.SPECTRUM])
def test_suites_pass(suite):
    report = run_suite(suite, seed=1)
    failed = [check.name for check in report.checks if not check.passed]
    assert failed == []
    assert report.checks


def test_spine_suite_covers_slopes_and_the_height_law(monkeypatch):
    monkeypatch.setattr(verification, "SPINE_PATHS", 200)
    report = run_suite(VerifySuite.SPINE, seed=1)
    by_name = {check.name: check for check in report.checks}
    assert {"mean slope of xi_mu", "mean slope of xi_nu", "mean extinction time"} <= set(by_name)
    ks = by_name["extinction time against 8x^3 exp(-2x^2)"]
    assert ks.tolerance == 1e-3
    assert 0.0 <= ks.value <= 1.0
    assert all("200 paths" in check.detail for check in report.checks[2:])


@pytest.mark.slow
def test_spine_suite_passes():
    report = run_suite(VerifySuite.SPINE, seed=1, threads=4)
    assert report.passed, [check for check in report.checks if not check.passed]


def test_report_bookkeeping():
    report = SuiteReport("spectrum")
    report.add_close("close", 1.0 + 1e-10, 1.0, 1e-9)
    report.add_close("relative", 101.0, 100.0, 0.02, relative=True)
    report.add_close("nan", float("nan"), 0.0, 1.0)
    report.add_exact("exact", 3, 3)
    assert [check.passed for check in report.checks] == [True, True, False, True]
    assert not report.passed
    summary = report.to_dict()
    assert summary["suite"] == "spectrum" and summary["passed"] is False
    assert summary["checks"][0]["tolerance"] == 1e-9


def test_pvalue_checks():
    report = SuiteReport("spine")
    report.add_pvalue("fits", 0.2, 1e-3)
    report.add_pvalue("rejected", 1e-5, 1e-3)
    report.add_pvalue("nan", float("nan"), 1e-3)
    assert [check.passed for check in report.checks] == [True, False, False]
    assert report.to_dict()["checks"][0]["expected"] == "p > 0.001"
