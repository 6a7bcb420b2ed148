"""Check tables: verdict logic, JSON round trips, residual sanitization."""
import json

import pytest

from qgw.errors import FormatError
from qgw.report import Check, Report, checks_from_residuals


def test_verdict_follows_thresholds():
    rep = Report("demo", [Check("a", 1e-10, 1e-8), Check("b", 0.0, 1e-8)],
                 1e-9)
    assert rep.verdict == "pass"
    assert rep.exit_code == 0
    rep2 = Report("demo", [Check("a", 1e-3, 1e-8)], 1e-9)
    assert rep2.verdict == "fail"
    assert rep2.exit_code == 1
    rep3 = Report("demo", [], 1e-9, error="boom")
    assert rep3.verdict == "error"
    assert rep3.exit_code == 2


def test_non_finite_residuals_become_null_and_fail():
    c = Check("lift", float("inf"), 1e-8)
    assert c.residual is None
    assert not c.passed
    rep = Report("demo", [c], 1e-9)
    doc = json.loads(rep.to_json())
    assert doc["checks"][0]["residual"] is None
    assert doc["verdict"] == "fail"


def test_json_round_trip_is_byte_identical():
    rep = Report(
        "hopf-check",
        [Check("coassociative", 3.25e-16, 1e-8),
         Check("state_pentagon", 0.0, 1e-7)],
        1e-9,
    )
    text = rep.to_json()
    back = Report.from_dict(json.loads(text))
    assert back.to_json() == text
    assert back.verdict == rep.verdict


def test_from_dict_rejects_forged_verdict():
    rep = Report("demo", [Check("a", 1.0, 1e-8)], 1e-9)
    doc = json.loads(rep.to_json())
    doc["verdict"] = "pass"
    with pytest.raises(FormatError, match="verdict"):
        Report.from_dict(doc)


def test_timing_stays_out_of_the_document():
    rep = Report("demo", [Check("a", 0.0, 1e-8)], 1e-9, timing_ms=12.5)
    doc = json.loads(rep.to_json())
    assert "timing_ms" not in doc
    assert not any("timing" in k for k in doc)
    assert "elapsed" in rep.render_text()


def test_checks_from_residuals_prefix_and_overrides():
    residuals = {"pentagon": 5e-8, "unitary": 1e-12}
    checks = checks_from_residuals(
        residuals, 1e-8, overrides={"pentagon": 1e-7}, prefix="state_"
    )
    named = {c.name: c for c in checks}
    assert set(named) == {"state_pentagon", "state_unitary"}
    assert named["state_pentagon"].threshold == 1e-7
    assert named["state_pentagon"].passed
    # anchors resolve from the raw name, not the prefixed one
    assert named["state_pentagon"].anchor == "pentagon-identity"
    assert named["state_unitary"].anchor == "unitarity"


def test_render_text_marks_failures():
    rep = Report("demo", [Check("good", 0.0, 1e-8), Check("bad", 1.0, 1e-8)],
                 1e-9)
    text = rep.render_text()
    assert "[pass] good" in text
    assert "[FAIL] bad" in text
    assert text.startswith("demo: FAIL")
