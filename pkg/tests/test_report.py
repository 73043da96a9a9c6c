import json
import math

import pytest

from holoverify.errors import SingularityError
from holoverify.expr import parse
from holoverify.geometry import Homotopy, Path, Rectangle
from holoverify.report import VerificationReport, decide, error_report, explain, make_report, plain
from holoverify.theorems import homotopy_invariance, rectangle_identity

Z = lambda t: parse(t, "z")  # noqa: E731


def test_plain_values():
    assert plain(1 + 2j) == [1.0, 2.0]
    assert plain({"a": (1, -0.0)}) == {"a": [1, 0.0]}
    assert math.copysign(1, plain(-0.0)) == 1
    assert plain(float("inf")) == "inf"


def test_decide_rules():
    assert decide([0, 1e-9], 1e-8) == "pass"
    assert decide([1e-8], 1e-8) == "pass"
    assert decide([1e-9, 1e-7], 1e-8) == "violation"
    assert decide([float("nan")], 1e-8) == "error"
    assert decide([float("inf"), 0], 1e-8) == "error"


def test_make_report_keeps_all_residuals():
    rep = make_report("k", [1], [1], [1e-12, 3e-9], 1e-8)
    assert rep.passed and rep.residual == 3e-9 and rep.diagnostics["residuals"] == [1e-12, 3e-9]
    with pytest.raises(ValueError):
        VerificationReport("j", "k", "maybe", [], [], 0, 1)


def test_json_round_trip():
    rep = rectangle_identity(Z("1/(z-0.5-0.5*i)"), Rectangle(0, 1, 0, 1))
    back = VerificationReport.from_json(rep.to_json())
    assert back == rep
    assert json.loads(rep.to_json(timings=False))["runtime_ms"] == 0


def test_error_report_carries_location():
    exc = SingularityError("pole on path", location={"x": 0.0, "y": 0.0})
    rep = error_report("contour_integral", exc, 1e-8)
    assert rep.status == "error" and rep.residual is None
    assert rep.diagnostics["location"] == {"x": 0.0, "y": 0.0}
    assert VerificationReport.from_json(rep.to_json()) == rep


def test_explain_pass_and_pole():
    text = explain(rectangle_identity(Z("exp(z)"), Rectangle(0, 1, 0, 1)))
    assert text.startswith("PASS: rectangle_identity")
    assert "residual" in text and "<= tolerance" in text
    text = explain(rectangle_identity(Z("1/(z-0.5-0.5*i)"), Rectangle(0, 1, 0, 1)))
    assert text.startswith("VIOLATION") and "winding=1" in text


def test_explain_homotopy_error():
    H = Homotopy(Path.arc(0, 1, 0, math.pi), Path.arc(0, 1, 0, -math.pi))
    text = explain(homotopy_invariance(Z("1/z"), H))
    assert text.startswith("ERROR")
    assert "homotopy crosses singularity" in text
    assert "offending sample: (t, eps) = (0.5, 0.5)" in text
