import pytest

from speedmeasure import oracle_library, verify_curve


def failed(rep):
    return {c.name for c in rep.checks if not c.passed}


@pytest.mark.parametrize("name", ["identity", "step", "staircase"])
def test_oracles_pass(name):
    rep = verify_curve(oracle_library(name))
    assert rep.passed, failed(rep)


def test_false_ground_truth_is_caught():
    curve = oracle_library("identity")
    curve.truth = dict(curve.truth, variation=2.0, continuous=False)
    assert {"variation matches ground truth", "continuity verdict matches ground truth"} <= failed(
        verify_curve(curve))


def test_false_ac_claim_is_caught():
    curve = oracle_library("cantor")
    curve.truth = dict(curve.truth, ac=True)
    assert "cross-level AC consistency" in failed(verify_curve(curve))


def test_summary_shape():
    doc = verify_curve(oracle_library("identity")).summary()
    assert doc["curve"] == "identity" and doc["passed"]
    assert all(set(c) == {"name", "passed", "detail"} for c in doc["checks"])
